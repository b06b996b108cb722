#pragma once

// Lambda-affine meromorphic potentials xi = (A(z) lambda + B(z)) dz with A
// nilpotent, the gauge action, spinor fields, the Hopf invariant q and the
// Schwarz standard form.

#include <optional>
#include <vector>

#include "lwr/liealg.hpp"
#include "lwr/meromorphic.hpp"

namespace lwr {

enum class Domain { Plane, PuncturedPlane, PuncturedSphere };

struct Potential {
    MatEntry A;  // linear part, nilpotent
    MatEntry B;  // constant part, trace-free
    std::vector<cplx> poles;
    Domain domain = Domain::Plane;

    // value of the dz-coefficient A(z) lambda + B(z)
    Mat2 xi(cplx z, cplx logz, cplx lambda) const {
        return lambda * A.value(z, logz) + B.value(z, logz);
    }

    // checks the nilpotent/trace-free structure at one sample point
    void check_structure(cplx z, cplx logz, double tol = 1e-9) const;

    double min_pole_distance(cplx z) const {
        double d = 1e300;
        for (cplx p : poles) d = std::min(d, std::abs(z - p));
        return d;
    }
};

struct Gauge {
    MatEntry g;
    std::vector<cplx> poles;  // poles of g or of its inverse

    Mat2 value(cplx z, cplx logz) const { return g.value(z, logz); }
    void check_unimodular(cplx z, cplx logz, double tol = 1e-10) const {
        cplx det = g.det_entry().eval(z, logz).f;
        if (std::abs(det - 1.0) > tol)
            throw Error("NotUnimodular", "gauge determinant differs from 1");
    }
    static Gauge identity() { return {MatEntry::constant(Mat2::identity()), {}}; }
    static Gauge constant(const Mat2& m) { return {MatEntry::constant(m), {}}; }
};

// Right action xi.g = g^-1 xi g + g^-1 dg, computed with adj(g) = g^-1.
Potential gauge_apply(const Potential& xi, const Gauge& gauge);

// Composition so that xi.(gh) = (xi.g).h
Gauge gauge_compose(const Gauge& g, const Gauge& h);

struct SpinorJet {
    Jet3 u, v;
    bool zero = false;
};

// Spinor field x(z) of the potential with exact derivatives; sign fixed by the
// dominant-entry branch rule, so only sign-independent quantities should be
// derived from it across branch switches.
SpinorJet spinor_field(const Potential& xi, cplx z, cplx logz);

// q = det(x, Bx + x_z); gauge invariant, spinor-sign independent.
cplx hopf_q(const Potential& xi, cplx z, cplx logz);

struct SpinorHopf {
    Spinor2 x, x_z;
    cplx Q;  // (lambda1 - lambda0) * q
};
SpinorHopf spinor_field_and_hopf(const Potential& xi, const EvaluationPair& ev, cplx z,
                                 cplx logz);

// Schwarzian derivative S[g] = (g''/2g')^2 - (g''/2g')' from a 3-jet.
cplx schwarzian(const Jet3& g, double critical_tol = 1e-13);
cplx schwarzian(const Entry& g, cplx z, cplx logz);

// Frame 3-jet from its value and the potential: Phi' = Phi Xi, etc.
Mat2Jet frame_jet(const Mat2& phi, const Potential& xi, cplx lambda, cplx z, cplx logz);

// y = Phi x as a component jet pair (u, v)
SpinorJet y_jet(const Mat2Jet& phi, const SpinorJet& x);

// Fuchsian normalization of a z-independent residue K = A lambda + B with
// det K = -(q lambda + p): gauge chain g0? g1 g2 g3 taking K dz/z to
// [[0,1],[q lambda + p,0]] dz/z.
struct FuchsianForm {
    Gauge gauge;      // constant chain product
    cplx q, p;        // normalized residue data
    Mat2 residue_A, residue_B;
};
FuchsianForm fuchsian_normalize(const Mat2& A, const Mat2& B);

// q and s of the Schwarz form, evaluated pointwise: q with (lambda1-lambda0)=1
// and s = S[u/v] - lambda0 q where (u,v) = Phi_{lambda0} x.
struct SchwarzSample {
    cplx q, s;
};
SchwarzSample schwarz_data(const Potential& xi, const Mat2& phi_lambda0, cplx lambda0, cplx z,
                           cplx logz);

// Degeneracy probe: q sampled at pseudo-random points; degenerate iff all tiny.
bool is_degenerate(const Potential& xi, const std::vector<cplx>& probes, double tol = 1e-12);

}  // namespace lwr
