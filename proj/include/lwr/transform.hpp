#pragma once

// Evaluation-point moves, duality, holomorphic dressing and the induced rigid
// motions, simple factor dressing, closing-condition checks and unitarization
// of monodromy triples.

#include <optional>

#include "lwr/surface.hpp"

namespace lwr {

// Matrix exponential of a 2x2 complex matrix (exact via trace split).
Mat2 mat2_exp(const Mat2& x);

// Holomorphic dressing family evaluated on a lambda set.
struct DressingFamily {
    LambdaSet set;
    std::vector<Mat2> R;
    std::vector<Mat2> Rdot;

    const Mat2& at(cplx lambda) const { return R[set.index_of(lambda)]; }
    const Mat2& dot_at(cplx lambda) const {
        int i = set.index_of(lambda);
        if (!set.with_derivative[i])
            throw Error("MissingEvaluation", "no derivative channel at this lambda");
        return Rdot[i];
    }
    static DressingFamily constant(const LambdaSet& set, const Mat2& u);
    // R_lambda = exp((lambda - lambda_ref) X) U
    static DressingFamily exponential(const LambdaSet& set, cplx lambda_ref, const Mat2& x,
                                      const Mat2& u);
};

// Swapped evaluation pair; requires both lambdas tracked by the bundle.
EvaluationPair dual_swap(const FrameBundle& fb, const EvaluationPair& ev);

// New lambda1 = lambda0 + t (lambda1 - lambda0).
EvaluationPair associated_move(const EvaluationPair& ev, cplx t);

// Phi -> R Phi with the derivative channel by the product rule.
FrameBundle holomorphic_dress(const FrameBundle& fb, const DressingFamily& R);
MonodromySample conjugate_monodromy(const MonodromySample& m, const DressingFamily& R);

// Rigid motion induced by a dressing unitary at the relevant evaluation point.
struct RigidMotion {
    Target target;
    Mat2 rotation;     // E3: X -> U X U^-1; H3: X -> (V^-1)^* X V^-1 with V = rotation
    Mat2 translation;  // E3 only
    Mat2 apply(const Mat2& x) const;
    RigidMotion compose(const RigidMotion& other) const;  // this after other
};
RigidMotion rigid_motion_of_dressing(const DressingFamily& R, const EvaluationPair& ev,
                                     Target target, double tol = 1e-8);

// --- simple factor dressing --------------------------------------------------

struct SimpleFactorSpec {
    cplx alpha;
    Spinor2 ell;
    Spinor2 m;

    // SF(alpha, ell, m) at lambda
    Mat2 value(cplx lambda) const;
    Mat2 dvalue() const;  // d/dlambda, lambda-independent
};

// Hermitian-orthogonal line to ell, the default m.
Spinor2 orthogonal_line(const Spinor2& ell);

struct SimpleFactorDressed {
    FrameBundle bundle;       // dressed frames (normalized g-hat on the left)
    bool singular = false;    // z-dependent factor degenerate at this node
    double indicator = 0;     // |det [x | w]| with unit columns; 0 at singular nodes
};

// Dress one node: ghat_lambda Phi_lambda h_lambda^-1 where h is the unique
// z-dependent simple factor and ghat = sqrt(det g_ref) g_ref^-1 g.
SimpleFactorDressed simple_factor_dress(const FrameBundle& fb, const Potential& xi,
                                        const SimpleFactorSpec& sf, const EvaluationPair& ev,
                                        Target target, double singular_tol = 1e-7);

// Signed singularity indicator det[Phi_alpha^-1 ell | w] with unit-normalized
// columns; its zeros are the dressing singularities. The bundle must track
// alpha; sign is continuous in z for a fixed branch of the spinor.
cplx sf_singularity_indicator(const FrameBundle& fb, const Potential& xi,
                              const SimpleFactorSpec& sf);

// The dz-coefficient of the dressed potential xi . h^-1 at one (z, lambda).
Mat2 sf_dressed_potential(const FrameBundle& fb, const Potential& xi,
                          const SimpleFactorSpec& sf, cplx lambda);

// The normalized dressing family ghat evaluated on a lambda set.
DressingFamily sf_ghat_family(const SimpleFactorSpec& sf, const LambdaSet& set, cplx lambda_ref);

// Dressed monodromy gM g^-1; requires ell to be an eigenline of M_alpha.
MonodromySample dressed_monodromy(const MonodromySample& m, const SimpleFactorSpec& sf,
                                  const DressingFamily& g, double eigen_tol = 1e-8);

// --- closing ------------------------------------------------------------------

struct LoopVerdict {
    int loop_id = 0;
    double m0_residual = 0;  // distance of M_{lambda0} to {+-I}
    double e3_residual = 0;  // distance of (lambda1-lambda0) Mdot to su2
    double h3_residual = 0;  // distance of M_{lambda1} to SU2
    bool m0_scalar = false, e3_translation_ok = false, h3_unitary_ok = false;
};

struct ClosingVerdict {
    std::vector<LoopVerdict> loops;
    double tol = 1e-6;
    bool closed_e3 = false, closed_h3 = false;
};

ClosingVerdict check_closing(const std::vector<MonodromySample>& loops,
                             const EvaluationPair& ev, double tol = 1e-6);

// --- unitarization --------------------------------------------------------------

enum class TripleClass { Reducible, IrreducibleUnitarizable, IrreducibleNonunitarizable };

struct UnitarizeResult {
    TripleClass cls;
    std::optional<Mat2> unitarizer;  // det 1, Hermitian positive
    std::array<cplx, 3> eigendata;   // a_k (sl2C) or nu_k (SL2C), normalized
    cplx phi;                        // reducibility polynomial value
    double residual = 0;             // max distance to su2/SU2 after conjugation
};

// sl2C mode: A0+A1+A2 = 0, eigenvalues +-i a_k; classification by
// phi = det[A1,A2] and reality of the a_k; unitarizer from the invariant
// Hermitian form A_k^* P + P A_k = 0.
UnitarizeResult unitarize_sl2c(const Mat2& A0, const Mat2& A1, const Mat2& A2,
                               double tol = 1e-8);

// SL2C mode: M0 M1 M2 = I, classification by the trace polynomial
// 1 - t0^2 - t1^2 - t2^2 + 2 t0 t1 t2 and reality of the log-eigenvalues;
// unitarizer from M_k^* P M_k = P.
UnitarizeResult unitarize_sl2C_group(const Mat2& M0, const Mat2& M1, const Mat2& M2,
                                     double tol = 1e-8);

}  // namespace lwr
