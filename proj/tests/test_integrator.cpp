#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "lwr/integrator.hpp"

using namespace lwr;
using namespace lwrtest;

namespace {

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

LambdaSet set01() {
    LambdaSet s;
    s.lambdas = {0.0, 1.0};
    s.with_derivative = {true, true};
    return s;
}

}  // namespace

TEST_CASE("zero potential gives the constant solution") {
    Potential xi;
    xi.A = MatEntry::zero();
    xi.B = MatEntry::zero();
    InitialData init = InitialData::constant(0.0, set01(), Mat2::identity());
    init.logz0 = 0;
    FrameBundle fb = integrate_frame(xi, PathSpec::line(0.0, cplx(1.3, 0.7)), init);
    CHECK(mat_approx(fb.phi[0], Mat2::identity(), 1e-13));
    CHECK(mat_approx(fb.phi[1], Mat2::identity(), 1e-13));
    CHECK(fb.phidot[0].norm() <= 1e-13);
}

TEST_CASE("Enneper frame at lambda 0 is the explicit unipotent matrix") {
    for (int n : {0, 1, 2}) {
        double r = 1.0;
        Potential xi = enneper_potential(r, n);
        InitialData init = InitialData::constant(0.0, set01(), Mat2::identity());
        init.logz0 = 0;
        for (cplx z : {cplx(1.0), cplx(0.3, 0.8), cplx(-0.6, 0.2)}) {
            FrameBundle fb = integrate_frame(xi, PathSpec::line(0.0, z), init);
            Mat2 want{1.0, r * std::pow(z, n + 1) / double(n + 1), 0.0, 1.0};
            CHECK(mat_dist(fb.phi[0], want) <= 1e-10);
        }
    }
}

TEST_CASE("Enneper derivative channel solves the augmented equation") {
    Potential xi = enneper_potential(1.0, 0);
    InitialData init = InitialData::constant(0.0, set01(), Mat2::identity());
    init.logz0 = 0;
    cplx z{1.0};
    FrameBundle fb = integrate_frame(xi, PathSpec::line(0.0, z), init);
    // hand-integrated: Phidot(z) = [[z^2/2, z^3/6],[z, z^2/2]] at lambda0 = 0
    Mat2 want{0.5, 1.0 / 6.0, 1.0, 0.5};
    CHECK(mat_dist(fb.phidot[0], want) <= 1e-10);
}

TEST_CASE("catenoid frame matches the z^K closed form") {
    double p = 0.25, q = 1.0;
    Potential xi = catenoid_potential(p, q);
    Mat2 C{1.0, 2.0, 0.5, 2.0};  // arbitrary unimodular init
    C = (1.0 / std::sqrt(C.det())) * C;
    InitialData init = InitialData::constant(1.0, set01(), C);
    FrameBundle fb = integrate_frame(xi, PathSpec::line(1.0, 2.0), init);
    for (int i : {0, 1}) {
        cplx lam = init.set.lambdas[i];
        Mat2 K{0, 1, q * lam + p, 0};
        Mat2 want = C * oracle_z_to_K(K, std::log(2.0));
        CHECK(mat_dist(fb.phi[i], want) <= 1e-9);
    }
}

TEST_CASE("reversing a path returns the initial bundle") {
    Potential xi = catenoid_potential(0.5, 1.5);
    InitialData init = InitialData::constant(1.0, set01(), Mat2::identity());
    PathSpec fwd = PathSpec::polyline({cplx(1.0), cplx(1.5, 0.8), cplx(0.4, 1.1)});
    FrameBundle mid = integrate_frame(xi, fwd, init);
    InitialData back;
    back.z0 = mid.z;
    back.logz0 = mid.logz;
    back.set = mid.set;
    back.C = mid.phi;
    back.Cdot = mid.phidot;
    FrameBundle home = integrate_frame(xi, fwd.reversed(), back);
    CHECK(mat_dist(home.phi[0], Mat2::identity()) <= 1e-8);
    CHECK(mat_dist(home.phi[1], Mat2::identity()) <= 1e-8);
    CHECK(home.phidot[0].norm() <= 1e-8);
}

TEST_CASE("derivative channel agrees with finite differences in lambda") {
    double h = 1e-4;
    Potential xi = catenoid_potential(0.3, 1.1);
    LambdaSet s;
    s.lambdas = {0.2, cplx(0.2 + h), cplx(0.2 - h)};
    s.with_derivative = {true, false, false};
    InitialData init = InitialData::constant(1.0, s, Mat2::identity());
    FrameBundle fb = integrate_frame(xi, PathSpec::line(1.0, cplx(0.9, 1.2)), init);
    Mat2 fd = (1.0 / (2 * h)) * (fb.phi[1] - fb.phi[2]);
    CHECK(mat_dist(fd, fb.phidot[0]) <= 1e-6);
}

TEST_CASE("determinant stays near one and tolerances converge") {
    Potential xi = catenoid_potential(1.0, -0.4);
    InitialData init = InitialData::constant(1.0, set01(), Mat2::identity());
    PathSpec path = PathSpec::circle(0.0, 1.0, 0.75, 0.0);
    SolverSettings loose;
    loose.rel_tol = 1e-10;
    SolverSettings tight;
    tight.rel_tol = 1e-12;
    FrameBundle a = integrate_frame(xi, path, init, loose);
    FrameBundle b = integrate_frame(xi, path, init, tight);
    CHECK(std::abs(a.phi[0].det() - 1.0) <= 1e-9);
    CHECK(std::abs(a.phi[1].det() - 1.0) <= 1e-9);
    CHECK(mat_dist(a.phi[0], b.phi[0]) <= 1e-8);
    CHECK(mat_dist(a.phi[1], b.phi[1]) <= 1e-8);
}

TEST_CASE("monodromy of a contractible loop is trivial") {
    Potential xi = enneper_potential(1.0, 1);
    InitialData init = InitialData::constant(0.3, set01(), Mat2::identity());
    PathSpec loop = PathSpec::circle(0.3, 0.4, 1.0, 0.0);
    // adjust: circle around the base point itself, starting on it
    loop = PathSpec::circle(cplx(0.7), 0.4, 1.0, M_PI);  // starts at 0.3
    InitialData init2 = InitialData::constant(0.3, set01(), Mat2::identity());
    MonodromySample m = monodromy(xi, loop, init2);
    CHECK(mat_dist(m.M[0], Mat2::identity()) <= 1e-9);
    CHECK(mat_dist(m.M[1], Mat2::identity()) <= 1e-9);
    CHECK(m.Mdot[0].norm() <= 1e-9);
}

TEST_CASE("catenoid monodromy eigenvalues") {
    double p = 0.25, q = 1.0;
    Potential xi = catenoid_potential(p, q);
    InitialData init = InitialData::constant(1.0, set01(), Mat2::identity());
    MonodromySample m = monodromy(xi, PathSpec::circle(0.0, 1.0, 1.0, 0.0), init);
    for (int i : {0, 1}) {
        cplx lam = init.set.lambdas[i];
        cplx mu = std::sqrt(q * lam + p);
        auto eig = eigenvalues(m.M[i]);
        cplx want = std::exp(2.0 * M_PI * I_UNIT * mu);
        double err = std::min(std::abs(eig[0] - want) + std::abs(eig[1] - 1.0 / want),
                              std::abs(eig[1] - want) + std::abs(eig[0] - 1.0 / want));
        CHECK(err <= 1e-8);
    }
    // at p = 1/4 the lambda0 monodromy is exactly -I
    CHECK(mat_dist(m.M[0], -Mat2::identity()) <= 1e-9);

    CHECK_THROWS_AS(monodromy(xi, PathSpec::line(1.0, 2.0), init), Error);
}

TEST_CASE("grid propagation: path independence and monodromy sheet") {
    Potential xi = catenoid_potential(0.25, 1.0);
    InitialData init = InitialData::constant(1.0, set01(), Mat2::identity());

    // rectangular patch right of the pole: two tree routes agree
    GridSpec grid = GridSpec::rect(cplx(1.2, 0.0), 0.3, 0.3, 9, 9);
    GridFrames gf = propagate_grid(xi, grid, init, {}, false);
    {
        cplx target = grid.z_at(8, 8);
        FrameBundle direct = integrate_frame(
            xi, PathSpec::polyline({cplx(1.0), cplx(1.2, 0.45), target}), init);
        CHECK(mat_dist(direct.phi[0], gf.nodes[grid.index(8, 8)].phi[0]) <= 1e-8);
        CHECK(mat_dist(direct.phidot[0], gf.nodes[grid.index(8, 8)].phidot[0]) <= 1e-8);
    }

    // serial and parallel kernels produce identical bytes
    GridFrames gp = propagate_grid(xi, grid, init, {}, true);
    double d = 0;
    for (size_t k = 0; k < gf.nodes.size(); ++k)
        for (size_t i = 0; i < gf.set.size(); ++i)
            d = std::max(d, mat_dist(gf.nodes[k].phi[i], gp.nodes[k].phi[i]));
    CHECK(d == 0.0);

    // annulus grid: the theta = 2 pi row differs from theta = 0 by the monodromy
    GridSpec ann = GridSpec::annulus(0.5, 2.0, 9, 17);
    GridFrames ga = propagate_grid(xi, ann, init, {}, true);
    MonodromySample m = monodromy(xi, PathSpec::circle(0.0, 1.0, 1.0, 0.0), init);
    for (int i = 0; i < ann.nx; i += 4) {
        const FrameBundle& lo = ga.nodes[ann.index(i, 0)];
        const FrameBundle& hi = ga.nodes[ann.index(i, ann.ny - 1)];
        CHECK(mat_dist(hi.phi[0], m.M[0] * lo.phi[0]) <= 1e-8);
        CHECK(mat_dist(hi.phi[1], m.M[1] * lo.phi[1]) <= 1e-8);
    }

    // single-node grid returns the initial bundle
    GridSpec tiny = GridSpec::rect(cplx(1.0, 0.0), 0.0, 0.0, 1, 1);
    GridFrames g1 = propagate_grid(xi, tiny, init, {}, false);
    CHECK(mat_dist(g1.nodes[0].phi[0], Mat2::identity()) <= 1e-12);
}

TEST_CASE("pole clearance rejects offending paths") {
    Potential xi = catenoid_potential(0.25, 1.0);
    InitialData init = InitialData::constant(1.0, set01(), Mat2::identity());
    CHECK_THROWS_AS(integrate_frame(xi, PathSpec::line(1.0, -1.0), init), Error);
}

TEST_CASE("interior stops match direct integration") {
    Potential xi = enneper_potential(1.0, 0);
    InitialData init = InitialData::constant(0.0, set01(), Mat2::identity());
    init.logz0 = 0;
    auto stops = integrate_frame_stops(xi, PathSpec::line(0.0, cplx(1.0)), init, {0.25, 0.5});
    REQUIRE(stops.size() == 3);
    FrameBundle direct = integrate_frame(xi, PathSpec::line(0.0, cplx(0.5)), init);
    CHECK(mat_dist(stops[1].phi[0], direct.phi[0]) <= 1e-10);
    CHECK(approx(stops[1].z, cplx(0.5), 1e-12));

    // a stop landing exactly on a segment boundary of a polyline
    PathSpec two = PathSpec::polyline({cplx(0.0), cplx(0.5), cplx(1.0)});
    auto stops2 = integrate_frame_stops(xi, two, init, {0.5});
    REQUIRE(stops2.size() == 2);
    CHECK(approx(stops2[0].z, cplx(0.5), 1e-12));
    CHECK(mat_dist(stops2[0].phi[0], direct.phi[0]) <= 1e-10);
}

TEST_CASE("pole distances of paths are exact") {
    std::vector<cplx> poles{cplx(0.0)};
    // a long chord passing near the pole between coarse sample points
    PathSpec chord = PathSpec::line(cplx(-10.0, 0.01), cplx(10.0, 0.01));
    CHECK(chord.min_pole_distance(poles) <= 0.011);
    // an arc that does not sweep the pole's angle uses endpoint distances
    PathSpec arc = PathSpec::circle(cplx(2.0), 1.0, 0.25, M_PI / 2);
    CHECK(arc.min_pole_distance(poles) >= 1.0);
    // a full circle around the pole
    PathSpec full = PathSpec::circle(cplx(0.0), 0.3, 1.0, 0.0);
    CHECK(approx(full.min_pole_distance(poles), 0.3, 1e-12));
}
