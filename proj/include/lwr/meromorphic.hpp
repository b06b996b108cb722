#pragma once

// Meromorphic scalar entries: finite sums of terms  coeff * z^alpha * P(z)/Q(z)
// with alpha real and P, Q polynomials. The class is closed under addition,
// multiplication and differentiation, so every evaluation comes with exact
// derivatives (third-order jets), enough for Hopf and Schwarzian computations.

#include <algorithm>
#include <cmath>
#include <vector>

#include "lwr/liealg.hpp"

namespace lwr {

// Value and first three z-derivatives at a point.
struct Jet3 {
    cplx f{0}, f1{0}, f2{0}, f3{0};

    static Jet3 constant(cplx c) { return {c, 0, 0, 0}; }
    static Jet3 variable(cplx z) { return {z, 1, 0, 0}; }

    friend Jet3 operator+(const Jet3& x, const Jet3& y) {
        return {x.f + y.f, x.f1 + y.f1, x.f2 + y.f2, x.f3 + y.f3};
    }
    friend Jet3 operator-(const Jet3& x, const Jet3& y) {
        return {x.f - y.f, x.f1 - y.f1, x.f2 - y.f2, x.f3 - y.f3};
    }
    friend Jet3 operator-(const Jet3& x) { return {-x.f, -x.f1, -x.f2, -x.f3}; }
    friend Jet3 operator*(const Jet3& x, const Jet3& y) {
        return {x.f * y.f,
                x.f1 * y.f + x.f * y.f1,
                x.f2 * y.f + 2.0 * x.f1 * y.f1 + x.f * y.f2,
                x.f3 * y.f + 3.0 * x.f2 * y.f1 + 3.0 * x.f1 * y.f2 + x.f * y.f3};
    }
    friend Jet3 operator*(cplx s, const Jet3& x) { return {s * x.f, s * x.f1, s * x.f2, s * x.f3}; }
    friend Jet3 operator*(const Jet3& x, cplx s) { return s * x; }
    Jet3& operator+=(const Jet3& y) { return *this = *this + y; }

    Jet3 inverse() const {
        cplx g = 1.0 / f;
        cplx g1 = -f1 * g * g;
        cplx g2 = (2.0 * f1 * f1 - f * f2) * g * g * g;
        cplx g3 = (6.0 * f1 * f * f2 - 6.0 * f1 * f1 * f1 - f * f * f3) * g * g * g * g;
        return {g, g1, g2, g3};
    }
    friend Jet3 operator/(const Jet3& x, const Jet3& y) { return x * y.inverse(); }

    Jet3 sqrt() const {
        cplx s = std::sqrt(f);
        if (s == 0.0) throw Error("BranchPoint", "jet sqrt at a zero");
        cplx s1 = 0.5 * f1 / s;
        cplx s2 = 0.5 * f2 / s - s1 * s1 / s;
        cplx s3 = 0.5 * f3 / s - (3.0 * s1 * s2) / s;
        return {s, s1, s2, s3};
    }
};

// Dense polynomial, coefficient of z^k at index k.
struct Poly {
    std::vector<cplx> c;

    Poly() : c{cplx(0)} {}
    explicit Poly(std::vector<cplx> coeffs) : c(std::move(coeffs)) { trim(); }
    static Poly one() { return Poly({cplx(1)}); }
    static Poly zero() { return Poly(); }

    void trim() {
        while (c.size() > 1 && c.back() == cplx(0)) c.pop_back();
        if (c.empty()) c.push_back(0);
    }
    int degree() const { return static_cast<int>(c.size()) - 1; }
    bool is_zero() const { return c.size() == 1 && c[0] == cplx(0); }
    bool is_one() const { return c.size() == 1 && c[0] == cplx(1); }

    friend Poly operator+(const Poly& p, const Poly& q) {
        std::vector<cplx> r(std::max(p.c.size(), q.c.size()), cplx(0));
        for (size_t i = 0; i < p.c.size(); ++i) r[i] += p.c[i];
        for (size_t i = 0; i < q.c.size(); ++i) r[i] += q.c[i];
        return Poly(std::move(r));
    }
    friend Poly operator*(const Poly& p, const Poly& q) {
        std::vector<cplx> r(p.c.size() + q.c.size() - 1, cplx(0));
        for (size_t i = 0; i < p.c.size(); ++i)
            for (size_t j = 0; j < q.c.size(); ++j) r[i + j] += p.c[i] * q.c[j];
        return Poly(std::move(r));
    }
    friend Poly operator*(cplx s, const Poly& p) {
        std::vector<cplx> r = p.c;
        for (auto& x : r) x *= s;
        return Poly(std::move(r));
    }
    friend Poly operator-(const Poly& p, const Poly& q) { return p + cplx(-1) * q; }
    friend bool operator==(const Poly& p, const Poly& q) { return p.c == q.c; }

    Poly derivative() const {
        if (c.size() == 1) return Poly();
        std::vector<cplx> r(c.size() - 1);
        for (size_t i = 1; i < c.size(); ++i) r[i - 1] = double(i) * c[i];
        return Poly(std::move(r));
    }

    Jet3 eval(cplx z) const {  // Horner with jet accumulation
        Jet3 r = Jet3::constant(c.back());
        Jet3 zj = Jet3::variable(z);
        for (int i = static_cast<int>(c.size()) - 2; i >= 0; --i)
            r = r * zj + Jet3::constant(c[i]);
        return r;
    }
};

inline cplx powi(cplx z, long n) {
    if (n < 0) return 1.0 / powi(z, -n);
    cplx r = 1.0, b = z;
    while (n) {
        if (n & 1) r *= b;
        b *= b;
        n >>= 1;
    }
    return r;
}

// z^alpha relative to a supplied continuous branch of log z; integer powers
// never consult the log, so polynomial potentials tolerate paths through 0.
inline cplx zpow(cplx z, double alpha, cplx logz) {
    if (alpha == 0.0) return 1.0;
    if (alpha == std::floor(alpha) && std::abs(alpha) <= 256.0)
        return powi(z, (long)alpha);
    return std::exp(alpha * logz);
}

// One term coeff * z^alpha * num/den.
struct Term {
    cplx coeff{0};
    double alpha{0};
    Poly num = Poly::one();
    Poly den = Poly::one();

    Jet3 eval(cplx z, cplx logz) const {
        Jet3 p;  // jet of coeff * z^alpha
        if (alpha == 0.0) {
            p = Jet3::constant(coeff);
        } else if (alpha == std::floor(alpha) && std::abs(alpha) <= 256.0) {
            long n = (long)alpha;
            auto fall = [&](int k) -> cplx {
                double c = 1;
                for (int j = 0; j < k; ++j) c *= alpha - j;
                if (c == 0.0) return 0.0;
                return coeff * c * powi(z, n - k);
            };
            p = {fall(0), fall(1), fall(2), fall(3)};
        } else {
            cplx w = coeff * std::exp(alpha * logz);
            cplx iz = 1.0 / z;
            p = {w, alpha * w * iz, alpha * (alpha - 1.0) * w * iz * iz,
                 alpha * (alpha - 1.0) * (alpha - 2.0) * w * iz * iz * iz};
        }
        if (num.is_one() && den.is_one()) return p;
        Jet3 r = p * num.eval(z);
        if (!den.is_one()) r = r / den.eval(z);
        return r;
    }
};

// Finite sum of terms; closed under +, *, d/dz.
class Entry {
  public:
    Entry() = default;
    explicit Entry(std::vector<Term> terms) : terms_(std::move(terms)) { merge(); }

    static Entry zero() { return Entry(); }
    static Entry constant(cplx c) { return monomial(c, 0.0); }
    static Entry monomial(cplx c, double alpha) {
        if (c == cplx(0)) return Entry();
        Term t;
        t.coeff = c;
        t.alpha = alpha;
        return Entry({t});
    }
    static Entry polynomial(const Poly& p) {
        std::vector<Term> ts;
        for (size_t i = 0; i < p.c.size(); ++i)
            if (p.c[i] != cplx(0)) {
                Term t;
                t.coeff = p.c[i];
                t.alpha = double(i);
                ts.push_back(t);
            }
        return Entry(std::move(ts));
    }
    static Entry rational(const Poly& num, const Poly& den) {
        Term t;
        t.coeff = 1;
        t.alpha = 0;
        t.num = num;
        t.den = den;
        Entry e({t});
        return e;
    }

    bool is_zero() const { return terms_.empty(); }
    const std::vector<Term>& terms() const { return terms_; }

    Jet3 eval(cplx z, cplx logz) const {
        Jet3 r;
        for (const auto& t : terms_) r += t.eval(z, logz);
        return r;
    }
    Jet3 eval(cplx z) const { return eval(z, std::log(z)); }

    Entry derivative() const {
        std::vector<Term> out;
        for (const auto& t : terms_) {
            if (t.alpha != 0.0) {
                Term s = t;
                s.coeff *= t.alpha;
                s.alpha -= 1.0;
                out.push_back(s);
            }
            Poly dnum = t.num.derivative() * t.den - t.num * t.den.derivative();
            if (!dnum.is_zero()) {
                Term s = t;
                s.num = dnum;
                s.den = t.den * t.den;
                out.push_back(s);
            }
        }
        return Entry(std::move(out));
    }

    // principal square root, defined for single-term entries only
    Entry sqrt_term() const {
        if (terms_.size() != 1 || !terms_[0].num.is_one() || !terms_[0].den.is_one())
            throw Error("NotATerm", "sqrt needs a single monomial term");
        return monomial(std::sqrt(terms_[0].coeff), terms_[0].alpha / 2.0);
    }

    friend Entry operator+(const Entry& x, const Entry& y) {
        std::vector<Term> ts = x.terms_;
        ts.insert(ts.end(), y.terms_.begin(), y.terms_.end());
        return Entry(std::move(ts));
    }
    friend Entry operator-(const Entry& x, const Entry& y) { return x + (cplx(-1) * y); }
    friend Entry operator*(cplx s, const Entry& x) {
        if (s == cplx(0)) return Entry();
        std::vector<Term> ts = x.terms_;
        for (auto& t : ts) t.coeff *= s;
        return Entry(std::move(ts));
    }
    friend Entry operator*(const Entry& x, const Entry& y) {
        std::vector<Term> out;
        out.reserve(x.terms_.size() * y.terms_.size());
        for (const auto& s : x.terms_)
            for (const auto& t : y.terms_) {
                Term r;
                r.coeff = s.coeff * t.coeff;
                r.alpha = s.alpha + t.alpha;
                r.num = s.num * t.num;
                r.den = s.den * t.den;
                out.push_back(r);
            }
        return Entry(std::move(out));
    }

  private:
    void merge() {
        std::vector<Term> out;
        for (auto& t : terms_) {
            if (t.coeff == cplx(0) || t.num.is_zero()) continue;
            bool found = false;
            for (auto& o : out)
                if (o.alpha == t.alpha && o.num == t.num && o.den == t.den) {
                    o.coeff += t.coeff;
                    found = true;
                    break;
                }
            if (!found) out.push_back(t);
        }
        out.erase(std::remove_if(out.begin(), out.end(),
                                 [](const Term& t) { return t.coeff == cplx(0); }),
                  out.end());
        terms_ = std::move(out);
    }

    std::vector<Term> terms_;
};

// 2x2 matrix of jets, the result of evaluating a matrix of entries.
struct Mat2Jet {
    Jet3 a, b, c, d;
    Mat2 at(int k) const {
        switch (k) {
            case 0: return {a.f, b.f, c.f, d.f};
            case 1: return {a.f1, b.f1, c.f1, d.f1};
            case 2: return {a.f2, b.f2, c.f2, d.f2};
            default: return {a.f3, b.f3, c.f3, d.f3};
        }
    }
};

// Matrix with meromorphic entries.
struct MatEntry {
    Entry a, b, c, d;

    static MatEntry zero() { return {}; }
    static MatEntry constant(const Mat2& m) {
        return {Entry::constant(m.a), Entry::constant(m.b), Entry::constant(m.c),
                Entry::constant(m.d)};
    }

    Mat2Jet eval(cplx z, cplx logz) const {
        return {a.eval(z, logz), b.eval(z, logz), c.eval(z, logz), d.eval(z, logz)};
    }
    Mat2 value(cplx z, cplx logz) const {
        Mat2Jet j = eval(z, logz);
        return j.at(0);
    }
    MatEntry derivative() const {
        return {a.derivative(), b.derivative(), c.derivative(), d.derivative()};
    }
    Entry det_entry() const { return a * d - b * c; }
    MatEntry adj_matrix() const { return {d, cplx(-1) * b, cplx(-1) * c, a}; }

    friend MatEntry operator+(const MatEntry& x, const MatEntry& y) {
        return {x.a + y.a, x.b + y.b, x.c + y.c, x.d + y.d};
    }
    friend MatEntry operator*(const MatEntry& x, const MatEntry& y) {
        return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
                x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
    }
    friend MatEntry operator*(cplx s, const MatEntry& x) {
        return {s * x.a, s * x.b, s * x.c, s * x.d};
    }
};

}  // namespace lwr
