#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"

using namespace lwr;
using namespace lwrtest;

TEST_CASE("adjugate, inner product and cross product") {
    Mat2 x{1, 2, 3, 4};
    auto r = adjugate_inner_cross(x, x);
    CHECK(mat_approx(r.adjugate, Mat2{4, -2, -3, 1}, 0));
    CHECK(approx(lorentz_inner(Mat2::identity(), Mat2::identity()), -1.0, 1e-15));

    // Pauli-like pair: x = diag(1,-1), y = [[0,1],[1,0]]
    Mat2 a = Mat2::diag(1, -1), b{0, 1, 1, 0};
    Mat2 c = cross(a, b);
    CHECK(mat_approx(c, Mat2{0, -I_UNIT, I_UNIT, 0}, 1e-15));
    CHECK(approx(lorentz_inner(c, a), 0.0, 1e-15));
    CHECK(approx(lorentz_inner(c, b), 0.0, 1e-15));
}

TEST_CASE("norm identity <x,x> = -det x on random Hermitians") {
    Rng rng(7);
    for (int k = 0; k < 50; ++k) {
        Mat2 x = rng.hermitian();
        cplx lhs = lorentz_inner(x, x) + x.det();
        CHECK(std::abs(lhs) <= 1e-12 * (1.0 + x.norm() * x.norm()));
    }
}

TEST_CASE("spinor of a nilpotent matrix") {
    Spinor2 s = spinor_of_nilpotent(Mat2{0, 1, 0, 0});
    CHECK(approx(s.u, 1.0, 1e-15));
    CHECK(approx(s.v, 0.0, 1e-15));

    Spinor2 z = spinor_of_nilpotent(Mat2::zero());
    CHECK(z.norm2() == 0.0);

    Spinor2 t = spinor_of_nilpotent(Mat2{-6, 4, -9, 6});
    bool plus = approx(t.u, 2.0, 1e-12) && approx(t.v, 3.0, 1e-12);
    bool minus = approx(t.u, -2.0, 1e-12) && approx(t.v, -3.0, 1e-12);
    CHECK((plus || minus));

    CHECK_THROWS_AS(spinor_of_nilpotent(Mat2{1, 0, 0, 1}), Error);
}

TEST_CASE("spinor properties") {
    Rng rng(11);
    for (int k = 0; k < 50; ++k) {
        Spinor2 x{rng.complex(), rng.complex()};
        Mat2 a = x.outer_perp();
        // x^perp x = 0 exactly; the outer product is nilpotent
        cplx xperp_x = -x.v * x.u + x.u * x.v;
        CHECK(xperp_x == cplx(0));
        CHECK(a.tr() == cplx(0));
        CHECK(std::abs(a.det()) <= 1e-15 * (1 + a.norm() * a.norm()));
        // <x x^perp, (x x^perp)^*> = |x|^4 / 2, the pairing entering the metric
        double n2 = x.norm2();
        CHECK(approx(lorentz_inner(a, a.dagger()), 0.5 * n2 * n2, 1e-12 * (1 + n2 * n2)));
        // (Phi x)^perp = x^perp Phi^-1: compare outer products
        Mat2 phi = rng.sl2c();
        Spinor2 y = x.apply(phi);
        CHECK(mat_approx(y.outer_perp(), phi * a * phi.inv(), 1e-10));
        // spinor extraction inverts the outer product up to sign
        Spinor2 r = spinor_of_nilpotent(a);
        bool same = approx(r.u, x.u, 1e-8) && approx(r.v, x.v, 1e-8);
        bool flip = approx(r.u, -x.u, 1e-8) && approx(r.v, -x.v, 1e-8);
        CHECK((same || flip));
    }
}

TEST_CASE("H3 isometry action") {
    Rng rng(13);
    for (int k = 0; k < 20; ++k) {
        Mat2 f = rng.sl2c();
        H3Point x(f * f.dagger());
        Mat2 v = rng.sl2c();
        CHECK_NOTHROW(H3Point(v * x.m * v.dagger()));
    }
}

TEST_CASE("stereographic projection") {
    Mat2 st = stereo_inv(Spinor2{0, 1});
    CHECK(mat_approx(st, Mat2::diag(1, -1), 1e-15));
    Spinor2 back = stereo(E3Point(Mat2::diag(1, -1)));
    CHECK(approx(back.u / back.v, 0.0, 1e-14));

    Rng rng(17);
    for (int k = 0; k < 20; ++k) {
        Spinor2 nu{rng.complex(), rng.complex()};
        Mat2 n = stereo_inv(nu);
        Spinor2 r = stereo(E3Point(n));
        CHECK(approx(r.u * nu.v - r.v * nu.u, 0.0, 1e-12));  // same projective line
    }
}

TEST_CASE("ball model") {
    auto o = H3Point(Mat2::identity()).ball();
    CHECK(o[0] == 0.0);
    CHECK(o[1] == 0.0);
    CHECK(o[2] == 0.0);
    double e = std::exp(1.0);
    auto p = H3Point(Mat2::diag(e, 1.0 / e)).ball();
    CHECK(approx(p[2], std::tanh(0.5), 1e-12));
    CHECK(approx(p[2], 0.46211715726000974, 1e-10));
}

TEST_CASE("eigen decomposition helpers") {
    Rng rng(19);
    for (int k = 0; k < 20; ++k) {
        Mat2 m = rng.mat();
        auto ev = eigenvalues(m);
        for (cplx lam : ev) {
            Spinor2 v = eigenvector(m, lam);
            Spinor2 mv = v.apply(m);
            CHECK(std::abs(mv.u - lam * v.u) + std::abs(mv.v - lam * v.v) <=
                  1e-8 * (1 + m.norm()));
        }
        Mat2 h = rng.hermitian() + Mat2::diag(3, 3);  // likely positive
        HermEig he = hermitian_eig(h);
        if (he.ev1 > 0.1) {
            Mat2 s = hermitian_sqrt(h);
            CHECK(mat_approx(s * s, h, 1e-10));
        }
    }
}

TEST_CASE("matrix inverse accuracy") {
    Rng rng(23);
    for (int k = 0; k < 30; ++k) {
        Mat2 m = rng.mat(2.0);
        if (std::abs(m.det()) < 1e-3) continue;
        Mat2 inv = m.inv();
        CHECK(mat_dist(m * inv, Mat2::identity()) <= 1e-12 * m.norm() * inv.norm());
    }
}
