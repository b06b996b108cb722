#pragma once

// 2x2 complex matrix algebra and the matrix models of Minkowski, Euclidean
// and hyperbolic 3-space. Euclidean space is the trace-free Hermitian
// matrices, hyperbolic space the positive Hermitian matrices of determinant 1.

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace lwr {

using cplx = std::complex<double>;

inline constexpr cplx I_UNIT{0.0, 1.0};

struct Error : std::runtime_error {
    std::string code;
    Error(std::string c, const std::string& msg)
        : std::runtime_error(c + ": " + msg), code(std::move(c)) {}
};

// Row-major 2x2 complex matrix.
struct Mat2 {
    cplx a{0}, b{0}, c{0}, d{0};

    constexpr Mat2() = default;
    constexpr Mat2(cplx a_, cplx b_, cplx c_, cplx d_) : a(a_), b(b_), c(c_), d(d_) {}

    static constexpr Mat2 identity() { return {1, 0, 0, 1}; }
    static constexpr Mat2 zero() { return {0, 0, 0, 0}; }
    static constexpr Mat2 diag(cplx x, cplx y) { return {x, 0, 0, y}; }

    constexpr cplx tr() const { return a + d; }
    constexpr cplx det() const { return a * d - b * c; }

    // adjugate: M * adj(M) = det(M) * I
    constexpr Mat2 adj() const { return {d, -b, -c, a}; }

    Mat2 dagger() const { return {std::conj(a), std::conj(c), std::conj(b), std::conj(d)}; }
    Mat2 conjugate() const { return {std::conj(a), std::conj(b), std::conj(c), std::conj(d)}; }

    Mat2 inv() const {
        cplx dt = det();
        if (std::abs(dt) == 0.0) throw Error("Singular", "matrix inverse of det-0 matrix");
        cplx s = 1.0 / dt;
        return {d * s, -b * s, -c * s, a * s};
    }

    double norm() const {  // Frobenius
        return std::sqrt(std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d));
    }

    friend constexpr Mat2 operator+(const Mat2& x, const Mat2& y) {
        return {x.a + y.a, x.b + y.b, x.c + y.c, x.d + y.d};
    }
    friend constexpr Mat2 operator-(const Mat2& x, const Mat2& y) {
        return {x.a - y.a, x.b - y.b, x.c - y.c, x.d - y.d};
    }
    friend constexpr Mat2 operator-(const Mat2& x) { return {-x.a, -x.b, -x.c, -x.d}; }
    friend constexpr Mat2 operator*(const Mat2& x, const Mat2& y) {
        return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
                x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
    }
    friend constexpr Mat2 operator*(cplx s, const Mat2& x) {
        return {s * x.a, s * x.b, s * x.c, s * x.d};
    }
    friend constexpr Mat2 operator*(const Mat2& x, cplx s) { return s * x; }
    Mat2& operator+=(const Mat2& y) { return *this = *this + y; }
    Mat2& operator-=(const Mat2& y) { return *this = *this - y; }
    Mat2& operator*=(cplx s) { return *this = s * *this; }
};

inline double dist(const Mat2& x, const Mat2& y) { return (x - y).norm(); }

// Lorentzian inner product <x,y> = -tr(x adj(y))/2; <x,x> = -det x.
inline cplx lorentz_inner(const Mat2& x, const Mat2& y) { return -0.5 * (x * y.adj()).tr(); }

// cross product on E3: x ^ y = -(i/2)[x,y]
inline Mat2 cross(const Mat2& x, const Mat2& y) { return -0.5 * I_UNIT * (x * y - y * x); }

inline Mat2 commutator(const Mat2& x, const Mat2& y) { return x * y - y * x; }

inline double dist_hermitian(const Mat2& x) { return 0.5 * (x - x.dagger()).norm(); }
inline double dist_su2(const Mat2& x) {  // anti-Hermitian and trace-free
    return 0.5 * (x + x.dagger()).norm() + 0.5 * std::abs(x.tr());
}
inline double dist_SU2(const Mat2& m) {  // unitary; caller guarantees det ~ 1
    return (m.dagger() * m - Mat2::identity()).norm();
}
inline double dist_pm_identity(const Mat2& m) {
    return std::min(dist(m, Mat2::identity()), dist(m, -Mat2::identity()));
}

// Point of E3 = i su2: Hermitian trace-free.
struct E3Point {
    Mat2 m;
    explicit E3Point(const Mat2& x, double tol = 1e-9) : m(x) {
        double s = std::max(1.0, x.norm());
        if (dist_hermitian(x) > tol * s || std::abs(x.tr()) > tol * s)
            throw Error("NotEuclidean", "matrix is not Hermitian trace-free");
    }
    // basis coefficients (x1,x2,x3) with m = [[x3, x1+ix2],[x1-ix2, -x3]]
    std::array<double, 3> coords() const { return {m.b.real(), m.b.imag(), m.a.real()}; }
    static E3Point from_coords(double x1, double x2, double x3) {
        return E3Point(Mat2{cplx(x3, 0), cplx(x1, x2), cplx(x1, -x2), cplx(-x3, 0)});
    }
};

// Point of H3: Hermitian, det 1, positive trace.
struct H3Point {
    Mat2 m;
    explicit H3Point(const Mat2& x, double tol = 1e-8) : m(x) {
        double s = std::max(1.0, x.norm());
        if (dist_hermitian(x) > tol * s) throw Error("NotHyperbolic", "matrix is not Hermitian");
        if (std::abs(x.det() - 1.0) > 10 * tol) throw Error("NotHyperbolic", "det != 1");
        if (x.tr().real() <= 0) throw Error("NotHyperbolic", "trace <= 0");
    }
    // Poincare ball coordinates (x1,x2,x3)/(1+x0)
    std::array<double, 3> ball() const {
        double x0 = 0.5 * (m.a + m.d).real();
        double x3 = 0.5 * (m.a - m.d).real();
        double x1 = m.b.real(), x2 = m.b.imag();
        double s = 1.0 + x0;
        return {x1 / s, x2 / s, x3 / s};
    }
};

// Spinor x = (u,v); x^perp = (-v, u) as a row, so that x^perp x = 0.
struct Spinor2 {
    cplx u{0}, v{0};
    double norm2() const { return std::norm(u) + std::norm(v); }
    // x x^perp = [[-uv, u^2],[-v^2, uv]]
    Mat2 outer_perp() const { return {-u * v, u * u, -v * v, u * v}; }
    Spinor2 apply(const Mat2& m) const { return {m.a * u + m.b * v, m.c * u + m.d * v}; }
};

// x x^perp-inverse: a spinor for a nilpotent trace-free matrix, up to sign.
// Branch rule: take the square root of the dominant off-diagonal entry.
inline Spinor2 spinor_of_nilpotent(const Mat2& A, double tol = 1e-10) {
    double s2 = A.norm() * A.norm();
    if (std::abs(A.det()) > tol * std::max(1e-300, s2) ||
        std::abs(A.tr()) > std::sqrt(tol) * std::max(1e-150, A.norm()))
        throw Error("NotNilpotent", "matrix is not nilpotent within tolerance");
    if (A.norm() == 0.0) return {0, 0};
    if (std::abs(A.b) >= std::abs(A.c)) {
        cplx u = std::sqrt(A.b);
        cplx v = (u != 0.0) ? -A.a / u : cplx(0);
        return {u, v};
    }
    cplx v = std::sqrt(-A.c);
    cplx u = (v != 0.0) ? -A.a / v : cplx(0);
    return {u, v};
}

// Stereographic projection: St^{-1}(u/v) = I - 2 nu nu^*/|nu|^2, nu = (u,v).
inline Mat2 stereo_inv(const Spinor2& nu) {
    double n2 = nu.norm2();
    if (n2 == 0.0) throw Error("NotUnit", "zero spinor");
    Mat2 p{nu.u * std::conj(nu.u), nu.u * std::conj(nu.v),
           nu.v * std::conj(nu.u), nu.v * std::conj(nu.v)};
    return Mat2::identity() - (2.0 / n2) * p;
}

// Inverse of the above: from a unit vector in S^2 back to a projective pair.
inline Spinor2 stereo(const E3Point& n, double tol = 1e-8) {
    if (std::abs(-n.m.det().real() - 1.0) > tol) throw Error("NotUnit", "vector is not unit");
    Mat2 p = 0.5 * (Mat2::identity() - n.m);  // rank-1 Hermitian projector nu nu^*/|nu|^2
    if (p.a.real() >= p.d.real()) return {p.a, p.c};
    return {p.b, p.d};
}

// adjugate, Lorentzian inner product and cross product in one call
struct AdjInnerCross {
    Mat2 adjugate;
    cplx inner;
    Mat2 cross_product;
};
inline AdjInnerCross adjugate_inner_cross(const Mat2& x, const Mat2& y) {
    return {x.adj(), lorentz_inner(x, y), cross(x, y)};
}

// Ordered pair of evaluation points.
struct EvaluationPair {
    cplx lambda0, lambda1;
    EvaluationPair(cplx l0, cplx l1) : lambda0(l0), lambda1(l1) {
        if (l0 == l1) throw Error("DegenerateEvaluation", "lambda0 == lambda1");
    }
    cplx delta() const { return lambda1 - lambda0; }
    EvaluationPair swapped() const { return {lambda1, lambda0}; }
};

// Eigenvalues of a 2x2 matrix, by the quadratic formula.
inline std::array<cplx, 2> eigenvalues(const Mat2& m) {
    cplx h = 0.5 * m.tr();
    cplx disc = std::sqrt(h * h - m.det());
    return {h + disc, h - disc};
}

// A (right) eigenvector for a given eigenvalue.
inline Spinor2 eigenvector(const Mat2& m, cplx lambda) {
    // rows of (m - lambda I) annihilate the eigenvector; take the larger row
    cplx r1u = m.a - lambda, r1v = m.b;
    cplx r2u = m.c, r2v = m.d - lambda;
    Spinor2 e1{-r1v, r1u};  // kernel of row 1
    Spinor2 e2{-r2v, r2u};
    Spinor2 e = (std::norm(e1.u) + std::norm(e1.v) >= std::norm(e2.u) + std::norm(e2.v)) ? e1 : e2;
    double n = std::sqrt(e.norm2());
    if (n == 0.0) return {1, 0};  // scalar matrix: every line works
    return {e.u / n, e.v / n};
}

// Eigen-decomposition of a Hermitian 2x2 matrix: m = U diag(ev) U^*.
struct HermEig {
    double ev0, ev1;
    Spinor2 u0, u1;  // orthonormal eigenvectors
};
inline HermEig hermitian_eig(const Mat2& m) {
    double h = 0.5 * m.tr().real();
    double det = m.det().real();
    double disc = std::sqrt(std::max(0.0, h * h - det));
    double e0 = h + disc, e1 = h - disc;
    Spinor2 u0 = eigenvector(m, e0);
    Spinor2 u1{-std::conj(u0.v), std::conj(u0.u)};
    return {e0, e1, u0, u1};
}

// Principal square root of a positive Hermitian matrix.
inline Mat2 hermitian_sqrt(const Mat2& m) {
    HermEig e = hermitian_eig(m);
    if (e.ev1 <= 0.0) throw Error("NotPositive", "Hermitian matrix not positive definite");
    double s0 = std::sqrt(e.ev0), s1 = std::sqrt(e.ev1);
    Mat2 p0{e.u0.u * std::conj(e.u0.u), e.u0.u * std::conj(e.u0.v),
            e.u0.v * std::conj(e.u0.u), e.u0.v * std::conj(e.u0.v)};
    Mat2 p1{e.u1.u * std::conj(e.u1.u), e.u1.u * std::conj(e.u1.v),
            e.u1.v * std::conj(e.u1.u), e.u1.v * std::conj(e.u1.v)};
    return s0 * p0 + s1 * p1;
}

}  // namespace lwr
