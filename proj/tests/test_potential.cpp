#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "lwr/integrator.hpp"
#include "lwr/potential.hpp"

using namespace lwr;
using namespace lwrtest;

namespace {

// catenoid-type Fuchsian potential [[0,1],[q lambda + p, 0]] dz/z
Potential catenoid_potential(double p, double q) {
    Potential xi;
    xi.A = {Entry::zero(), Entry::zero(), Entry::monomial(q, -1.0), Entry::zero()};
    xi.B = {Entry::zero(), Entry::monomial(1.0, -1.0), Entry::monomial(p, -1.0), Entry::zero()};
    xi.poles = {0.0};
    xi.domain = Domain::PuncturedPlane;
    return xi;
}

Potential enneper_potential(double r, int n) {
    Potential xi;
    xi.A = {Entry::zero(), Entry::zero(), Entry::constant(1.0), Entry::zero()};
    xi.B = {Entry::zero(), Entry::monomial(r, double(n)), Entry::zero(), Entry::zero()};
    return xi;
}

// random polynomial gauge as a product of unimodular elementaries
Gauge random_poly_gauge(Rng& rng) {
    MatEntry u{Entry::constant(1), Entry::polynomial(Poly({rng.complex(0.5), rng.complex(0.3)})),
               Entry::zero(), Entry::constant(1)};
    MatEntry l{Entry::constant(1), Entry::zero(),
               Entry::polynomial(Poly({rng.complex(0.5), rng.complex(0.3)})), Entry::constant(1)};
    cplx c = 1.0 + rng.complex(0.3);
    MatEntry d{Entry::constant(c), Entry::zero(), Entry::zero(), Entry::constant(1.0 / c)};
    return Gauge{u * l * d, {}};
}

}  // namespace

TEST_CASE("identity gauge leaves the potential unchanged") {
    Potential xi = catenoid_potential(0.25, 1.0);
    Potential out = gauge_apply(xi, Gauge::identity());
    cplx z{1.2, 0.4};
    cplx lz = std::log(z);
    for (cplx lam : {cplx(0), cplx(1), cplx(0.3, 0.7)})
        CHECK(mat_approx(out.xi(z, lz, lam), xi.xi(z, lz, lam), 1e-13));
}

TEST_CASE("Schwarz form of the catenoid gauges to the simple-pole form") {
    // [[0,1],[(q lambda + s) z^-2, 0]] dz gauged by [[sqrt z, 0],[-1/(2 sqrt z), 1/sqrt z]]
    double q = 1.0, s = 0.15, p = s + 0.25;
    Potential xi;
    xi.A = {Entry::zero(), Entry::zero(), Entry::monomial(q, -2.0), Entry::zero()};
    xi.B = {Entry::zero(), Entry::constant(1.0), Entry::monomial(s, -2.0), Entry::zero()};
    xi.poles = {0.0};
    Gauge g{{Entry::monomial(1.0, 0.5), Entry::zero(), Entry::monomial(-0.5, -0.5),
             Entry::monomial(1.0, -0.5)},
            {0.0}};
    Potential out = gauge_apply(xi, g);
    Potential want = catenoid_potential(p, q);
    for (cplx z : {cplx(1.0), cplx(0.6, 0.9), cplx(2.0, -0.5)}) {
        cplx lz = std::log(z);
        g.check_unimodular(z, lz);
        for (cplx lam : {cplx(0), cplx(1), cplx(-0.4, 0.2)})
            CHECK(mat_approx(out.xi(z, lz, lam), want.xi(z, lz, lam), 1e-11));
    }
}

TEST_CASE("Weierstrass-to-Schwarz gauge chain for g = z^2, q = 1") {
    // xi1 = lambda [[g, -g^2],[1, -g]] q dz / g'
    Potential xi1;
    xi1.A = {Entry::monomial(0.5, 1.0), Entry::monomial(-0.5, 3.0), Entry::monomial(0.5, -1.0),
             Entry::monomial(-0.5, 1.0)};
    xi1.B = MatEntry::zero();
    xi1.poles = {0.0};
    Gauge k2{{Entry::constant(1), Entry::monomial(1.0, 2.0), Entry::zero(), Entry::constant(1)},
             {}};
    Gauge k3{{Entry::monomial(std::sqrt(2.0), 0.5), Entry::zero(), Entry::zero(),
              Entry::monomial(1.0 / std::sqrt(2.0), -0.5)},
             {0.0}};
    Gauge k4{{Entry::constant(1), Entry::zero(), Entry::monomial(-0.5, -1.0), Entry::constant(1)},
             {0.0}};
    Potential out = gauge_apply(gauge_apply(gauge_apply(xi1, k2), k3), k4);
    // expect [[0,1],[lambda + 3/(4 z^2), 0]] dz
    for (cplx z : {cplx(0.8), cplx(1.1, 0.7), cplx(-0.4, 1.3)}) {
        cplx lz = std::log(z);
        for (cplx lam : {cplx(0), cplx(1), cplx(0.2, -0.6)}) {
            Mat2 v = out.xi(z, lz, lam);
            Mat2 want{0, 1, lam + 0.75 / (z * z), 0};
            CHECK(mat_approx(v, want, 1e-10));
        }
    }
}

TEST_CASE("gauge action is a right action and preserves nilpotency") {
    Rng rng(31);
    Potential xi = enneper_potential(1.0, 1);
    for (int k = 0; k < 5; ++k) {
        Gauge g = random_poly_gauge(rng);
        Gauge h = random_poly_gauge(rng);
        Potential a = gauge_apply(xi, gauge_compose(g, h));
        Potential b = gauge_apply(gauge_apply(xi, g), h);
        for (cplx z : {cplx(0.5, 0.2), cplx(-0.7, 0.9)}) {
            cplx lz = std::log(z);
            for (cplx lam : {cplx(0), cplx(1)})
                CHECK(mat_approx(a.xi(z, lz, lam), b.xi(z, lz, lam), 1e-10));
            b.check_structure(z, lz, 1e-9);
        }
    }
}

TEST_CASE("q is invariant under gauging") {
    Rng rng(37);
    Potential xi = catenoid_potential(0.3, 0.8);
    std::vector<cplx> samples{cplx(1.0, 0.3), cplx(0.7, -0.6), cplx(1.8, 0.1)};
    for (int k = 0; k < 20; ++k) {
        Gauge g = random_poly_gauge(rng);
        Potential out = gauge_apply(xi, g);
        for (cplx z : samples) {
            cplx lz = std::log(z);
            cplx q0 = hopf_q(xi, z, lz);
            cplx q1 = hopf_q(out, z, lz);
            CHECK(std::abs(q0 - q1) <= 1e-9 * (1.0 + std::abs(q0)));
        }
    }
}

TEST_CASE("spinor field and Hopf examples") {
    // catenoid: x = (0, i sqrt(q) z^{-1/2}), Q = q z^-2 for ev (0,1)
    double p = 0.25, q = 1.0;
    Potential xi = catenoid_potential(p, q);
    EvaluationPair ev(0, 1);
    for (cplx z : {cplx(1.0), cplx(0.5, 0.8)}) {
        cplx lz = std::log(z);
        SpinorHopf sh = spinor_field_and_hopf(xi, ev, z, lz);
        CHECK(std::abs(sh.x.u) <= 1e-12);
        cplx want_v = I_UNIT * std::sqrt(q) * std::exp(-0.5 * lz);
        CHECK((approx(sh.x.v, want_v, 1e-10) || approx(sh.x.v, -want_v, 1e-10)));
        CHECK(approx(sh.Q, q / (z * z), 1e-11));
    }

    // constant nilpotent with B = 0: Q = 0
    Potential flat;
    flat.A = {Entry::zero(), Entry::constant(1.0), Entry::zero(), Entry::zero()};
    flat.B = MatEntry::zero();
    CHECK(approx(spinor_field_and_hopf(flat, ev, cplx(0.3, 0.1), 0).Q, 0.0, 1e-14));

    // Enneper: Q = (lambda1 - lambda0) r z^n
    Potential enn = enneper_potential(0.7, 2);
    EvaluationPair ev2(cplx(0.2, 0.1), cplx(1.5, -0.3));
    cplx z{0.9, 0.4};
    CHECK(approx(spinor_field_and_hopf(enn, ev2, z, std::log(z)).Q,
                 ev2.delta() * 0.7 * z * z, 1e-11));
}

TEST_CASE("Schwarzian derivative") {
    Entry id = Entry::monomial(1.0, 1.0);
    CHECK(approx(schwarzian(id, cplx(0.5, 0.2), std::log(cplx(0.5, 0.2))), 0.0, 1e-13));

    Entry z2 = Entry::monomial(1.0, 2.0);
    for (cplx z : {cplx(0.8), cplx(1.2, -0.5)})
        CHECK(approx(schwarzian(z2, z, std::log(z)), 0.75 / (z * z), 1e-11));

    // Moebius invariance: S[(a g + b)/(c g + d)] = S[g]
    Rng rng(41);
    for (int k = 0; k < 10; ++k) {
        Mat2 m = rng.sl2c();
        cplx z{0.7, 0.25};
        Jet3 g = Entry::monomial(1.0, 3.0).eval(z, std::log(z));  // g = z^3
        Jet3 num = Jet3::constant(m.a) * g + Jet3::constant(m.b);
        Jet3 den = Jet3::constant(m.c) * g + Jet3::constant(m.d);
        cplx s1 = schwarzian(num / den);
        cplx s2 = schwarzian(g);
        CHECK(approx(s1, s2, 1e-10 * (1.0 + std::abs(s2))));
    }

    CHECK_THROWS_AS(schwarzian(Jet3::constant(1.0)), Error);
}

TEST_CASE("Fuchsian normalization") {
    // already normalized residue: identity gauge
    Mat2 A{0, 0, 2.0, 0}, B{0, 1, 1.0, 0};
    FuchsianForm f = fuchsian_normalize(A, B);
    CHECK(mat_approx(f.gauge.g.value(cplx(0.7, 0.1), 0), Mat2::identity(), 1e-14));
    CHECK(approx(f.q, 2.0, 1e-14));
    CHECK(approx(f.p, 1.0, 1e-14));

    // K = [[sqrt p, -q],[-lambda, -sqrt p]]
    double p = 0.36, q = 1.7;
    Mat2 A2{0, 0, -1, 0}, B2{std::sqrt(p), -q, 0, -std::sqrt(p)};
    FuchsianForm f2 = fuchsian_normalize(A2, B2);
    CHECK(mat_approx(f2.residue_A, Mat2{0, 0, q, 0}, 1e-12));
    CHECK(mat_approx(f2.residue_B, Mat2{0, 1, p, 0}, 1e-12));

    // random residues with prescribed det: bookkeeping det(A lambda + B) = -(q lambda + p)
    Rng rng(43);
    for (int k = 0; k < 20; ++k) {
        Spinor2 x{rng.complex(), rng.complex()};
        Mat2 A3 = x.outer_perp();
        Mat2 B3 = rng.sl2c_tracefree();
        cplx qv = -(A3.a * B3.d + B3.a * A3.d - A3.b * B3.c - B3.b * A3.c);
        if (std::abs(qv) < 1e-2) continue;
        FuchsianForm f3 = fuchsian_normalize(A3, B3);
        for (cplx lam : {cplx(0), cplx(1), cplx(0.5, 0.5)}) {
            cplx det_out = (f3.residue_A * lam + Mat2::zero() + f3.residue_B).det();
            cplx det_in = (A3 * lam + Mat2::zero() + B3).det();
            CHECK(approx(det_out, det_in, 1e-10 * (1.0 + std::abs(det_in))));
        }
        // the swap branch: spinors with v = 0
        Spinor2 xs{rng.complex(), 0.0};
        Mat2 A4 = xs.outer_perp();
        cplx q4 = -(A4.a * B3.d + B3.a * A4.d - A4.b * B3.c - B3.b * A4.c);
        if (std::abs(q4) < 1e-2) continue;
        FuchsianForm f4 = fuchsian_normalize(A4, B3);
        CHECK(mat_approx(f4.residue_A, Mat2{0, 0, f4.q, 0}, 1e-9));
    }

    CHECK_THROWS_AS(fuchsian_normalize(Mat2::zero(), B2), Error);
}

TEST_CASE("schwarz_data on the catenoid") {
    double p = 0.4, q = 1.3;
    Potential xi = catenoid_potential(p, q);
    Mat2 K0{0, 1, p, 0};
    for (cplx z : {cplx(1.1), cplx(0.8, 0.5)}) {
        cplx lz = std::log(z);
        Mat2 phi0 = oracle_z_to_K(K0, lz);  // frame at lambda0 = 0 with C = I
        SchwarzSample s = schwarz_data(xi, phi0, 0.0, z, lz);
        CHECK(approx(s.q, q / (z * z), 1e-10));
        CHECK(approx(s.s, (p - 0.25) / (z * z), 1e-9));
    }
}

TEST_CASE("schwarz_data returns the entries of a Schwarz-form potential") {
    // xi = [[0,1],[lambda q(z) + s(z), 0]] dz with q = 1, s = z^2
    Potential xi;
    xi.A = {Entry::zero(), Entry::zero(), Entry::constant(1.0), Entry::zero()};
    xi.B = {Entry::zero(), Entry::constant(1.0), Entry::monomial(1.0, 2.0), Entry::zero()};
    LambdaSet set;
    set.lambdas = {0.0};
    set.with_derivative = {true};
    InitialData init = InitialData::constant(0.0, set, Mat2::identity());
    init.logz0 = 0;
    for (cplx z : {cplx(0.4), cplx(0.3, 0.5)}) {
        FrameBundle fb = integrate_frame(xi, PathSpec::line(0.0, z), init);
        SchwarzSample s = schwarz_data(xi, fb.phi[0], 0.0, z, std::log(z));
        CHECK(approx(s.q, 1.0, 1e-9));
        CHECK(approx(s.s, z * z, 1e-8));
    }
}

TEST_CASE("schwarz_data of the Enneper potential") {
    // r = 1, n = 0 at lambda0 = 0: q = 1 and s = S[z + const] = 0
    Potential xi = enneper_potential(1.0, 0);
    for (cplx z : {cplx(0.6), cplx(0.3, 0.4)}) {
        Mat2 phi0{1.0, z, 0.0, 1.0};  // explicit frame at lambda = 0
        SchwarzSample s = schwarz_data(xi, phi0, 0.0, z, std::log(z));
        CHECK(approx(s.q, 1.0, 1e-12));
        CHECK(approx(s.s, 0.0, 1e-11));
    }
}

TEST_CASE("affine law S[u/v] = lambda q + s across lambda") {
    double p = 0.3, q = 0.9;
    Potential xi = catenoid_potential(p, q);
    cplx z{1.4, 0.2};
    cplx lz = std::log(z);
    auto S_at = [&](cplx lam) {
        Mat2 K{0, 1, q * lam + p, 0};
        Mat2 phi = oracle_z_to_K(K, lz);
        SpinorJet x = spinor_field(xi, z, lz);
        SpinorJet y = y_jet(frame_jet(phi, xi, lam, z, lz), x);
        return schwarzian(y.u / y.v);
    };
    cplx s0 = S_at(0.0), s1 = S_at(1.0), shalf = S_at(0.5);
    // two-point affine fit predicts the third value
    CHECK(approx(0.5 * (s0 + s1), shalf, 1e-8 * (1.0 + std::abs(shalf))));
    CHECK(approx(s1 - s0, hopf_q(xi, z, lz), 1e-9));
}

TEST_CASE("degeneracy probe") {
    Potential flat;
    flat.A = {Entry::zero(), Entry::constant(1.0), Entry::zero(), Entry::zero()};
    flat.B = MatEntry::zero();
    std::vector<cplx> probes{cplx(0.3, 0.1), cplx(1.2, -0.4), cplx(0.9, 0.9)};
    CHECK(is_degenerate(flat, probes));
    CHECK_FALSE(is_degenerate(catenoid_potential(0.25, 1.0), probes));
}
