#include "lwr/transform.hpp"

#include <algorithm>
#include <cmath>

namespace lwr {

Mat2 mat2_exp(const Mat2& x) {
    cplx h = 0.5 * x.tr();
    Mat2 x0 = x - Mat2::diag(h, h);          // trace-free part, x0^2 = -det(x0) I
    cplx mu2 = -x0.det();
    cplx mu = std::sqrt(mu2);
    cplx ch, shm;                            // cosh(mu), sinh(mu)/mu
    if (std::abs(mu) < 1e-8) {
        ch = 1.0 + mu2 / 2.0 + mu2 * mu2 / 24.0;
        shm = 1.0 + mu2 / 6.0 + mu2 * mu2 / 120.0;
    } else {
        ch = std::cosh(mu);
        shm = std::sinh(mu) / mu;
    }
    return std::exp(h) * (ch * Mat2::identity() + shm * x0);
}

DressingFamily DressingFamily::constant(const LambdaSet& set, const Mat2& u) {
    DressingFamily f;
    f.set = set;
    f.R.assign(set.size(), u);
    f.Rdot.assign(set.size(), Mat2::zero());
    return f;
}

DressingFamily DressingFamily::exponential(const LambdaSet& set, cplx lambda_ref, const Mat2& x,
                                           const Mat2& u) {
    cplx h = 0.5 * x.tr();
    Mat2 x0 = x - Mat2::diag(h, h);  // sl2c generator keeps det R = 1 for all lambda
    DressingFamily f;
    f.set = set;
    for (size_t i = 0; i < set.size(); ++i) {
        Mat2 e = mat2_exp((set.lambdas[i] - lambda_ref) * x0);
        f.R.push_back(e * u);
        f.Rdot.push_back(x0 * e * u);  // d/dlambda exp((l-l0)X) = X exp((l-l0)X)
    }
    return f;
}

EvaluationPair dual_swap(const FrameBundle& fb, const EvaluationPair& ev) {
    fb.set.index_of(ev.lambda0);
    fb.set.index_of(ev.lambda1);
    return ev.swapped();
}

EvaluationPair associated_move(const EvaluationPair& ev, cplx t) {
    if (t == cplx(0)) throw Error("ZeroParameter", "associated family parameter is zero");
    return {ev.lambda0, ev.lambda0 + t * ev.delta()};
}

FrameBundle holomorphic_dress(const FrameBundle& fb, const DressingFamily& R) {
    FrameBundle out = fb;
    for (size_t i = 0; i < fb.set.size(); ++i) {
        cplx lam = fb.set.lambdas[i];
        const Mat2& r = R.at(lam);
        if (std::abs(r.det() - 1.0) > 1e-10)
            throw Error("NotUnimodular", "dressing family determinant differs from 1");
        out.phi[i] = r * fb.phi[i];
        if (fb.set.with_derivative[i])
            out.phidot[i] = R.dot_at(lam) * fb.phi[i] + r * fb.phidot[i];
    }
    return out;
}

MonodromySample conjugate_monodromy(const MonodromySample& m, const DressingFamily& R) {
    MonodromySample out = m;
    for (size_t i = 0; i < m.set.size(); ++i) {
        cplx lam = m.set.lambdas[i];
        Mat2 r = R.at(lam);
        Mat2 rinv = r.inv();
        out.M[i] = r * m.M[i] * rinv;
        if (m.set.with_derivative[i]) {
            const Mat2& rdot = R.dot_at(lam);
            out.Mdot[i] = rdot * m.M[i] * rinv + r * m.Mdot[i] * rinv -
                          r * m.M[i] * rinv * rdot * rinv;
        }
    }
    return out;
}

Mat2 RigidMotion::apply(const Mat2& x) const {
    if (target == Target::E3) return rotation * x * rotation.inv() + translation;
    Mat2 vinv = rotation.inv();
    return vinv.dagger() * x * vinv;
}

RigidMotion RigidMotion::compose(const RigidMotion& other) const {
    if (target != other.target) throw Error("BadCompose", "mixed-target isometries");
    RigidMotion out;
    out.target = target;
    if (target == Target::E3) {
        out.rotation = rotation * other.rotation;
        out.translation = rotation * other.translation * rotation.inv() + translation;
    } else {
        out.rotation = rotation * other.rotation;
        out.translation = Mat2::zero();
    }
    return out;
}

RigidMotion rigid_motion_of_dressing(const DressingFamily& R, const EvaluationPair& ev,
                                     Target target, double tol) {
    RigidMotion out;
    out.target = target;
    out.translation = Mat2::zero();
    if (target == Target::E3) {
        Mat2 r0 = R.at(ev.lambda0);
        if (dist_SU2(r0) > tol)
            throw Error("NotUnitaryAtEvaluation", "R at lambda0 is not unitary");
        out.rotation = r0;
        Mat2 c = ev.delta() * (R.dot_at(ev.lambda0) * r0.inv());
        out.translation = c + c.dagger();
    } else {
        if (dist_SU2(R.at(ev.lambda1)) > tol)
            throw Error("NotUnitaryAtEvaluation", "R at lambda1 is not unitary");
        out.rotation = R.at(ev.lambda0);
    }
    return out;
}

// --- simple factors ----------------------------------------------------------

Mat2 SimpleFactorSpec::value(cplx lambda) const {
    Mat2 s{ell.u, m.u, ell.v, m.v};
    cplx det = s.det();
    if (std::abs(det) < 1e-14 * std::sqrt(ell.norm2() * m.norm2()))
        throw Error("DegenerateLines", "ell and m coincide as projective lines");
    return (1.0 / det) * (s * Mat2::diag(lambda - alpha, 1) * s.adj());
}

Mat2 SimpleFactorSpec::dvalue() const {
    Mat2 s{ell.u, m.u, ell.v, m.v};
    return (1.0 / s.det()) * (s * Mat2::diag(1, 0) * s.adj());
}

Spinor2 orthogonal_line(const Spinor2& ell) { return {-std::conj(ell.v), std::conj(ell.u)}; }

static Spinor2 unit(const Spinor2& s) {
    double n = std::sqrt(s.norm2());
    return {s.u / n, s.v / n};
}

cplx sf_singularity_indicator(const FrameBundle& fb, const Potential& xi,
                              const SimpleFactorSpec& sf) {
    Mat2 phia_inv = fb.at(sf.alpha).adj();
    Spinor2 x = unit(sf.ell.apply(phia_inv));
    SpinorJet wj = spinor_field(xi, fb.z, fb.logz);
    if (wj.zero) throw Error("DegeneratePotential", "potential spinor vanishes");
    Spinor2 w = unit({wj.u.f, wj.v.f});
    return x.u * w.v - x.v * w.u;
}

SimpleFactorDressed simple_factor_dress(const FrameBundle& fb, const Potential& xi,
                                        const SimpleFactorSpec& sf, const EvaluationPair& ev,
                                        Target target, double singular_tol) {
    if (std::abs(sf.alpha - ev.lambda0) < 1e-12 || std::abs(sf.alpha - ev.lambda1) < 1e-12)
        throw Error("AlphaAtEvaluation", "simple factor pole collides with evaluation point");
    SimpleFactorDressed out;
    out.bundle.z = fb.z;
    out.bundle.logz = fb.logz;
    cplx ind = sf_singularity_indicator(fb, xi, sf);
    out.indicator = std::abs(ind);
    if (out.indicator < singular_tol) {
        out.singular = true;
        return out;
    }

    Mat2 phia_inv = fb.at(sf.alpha).adj();
    Spinor2 x = sf.ell.apply(phia_inv);
    SpinorJet wj = spinor_field(xi, fb.z, fb.logz);
    SimpleFactorSpec h{sf.alpha, unit(x), unit({wj.u.f, wj.v.f})};

    cplx lam_ref = (target == Target::E3) ? ev.lambda0 : ev.lambda1;
    Mat2 g_ref_inv = sf.value(lam_ref).inv();
    cplx scale = std::sqrt(lam_ref - sf.alpha);  // sqrt(det g_ref), principal branch
    Mat2 sh{h.ell.u, h.m.u, h.ell.v, h.m.v};
    Mat2 sh_inv = sh.inv();

    // the slot at lambda = alpha is a removable singularity of the dressed
    // family; it is dropped rather than evaluated
    for (size_t i = 0; i < fb.set.size(); ++i) {
        cplx lam = fb.set.lambdas[i];
        if (std::abs(lam - sf.alpha) < 1e-12) continue;
        out.bundle.set.lambdas.push_back(lam);
        out.bundle.set.with_derivative.push_back(fb.set.with_derivative[i]);
        Mat2 ghat = scale * (g_ref_inv * sf.value(lam));
        Mat2 hinv = sh * Mat2::diag(1.0 / (lam - sf.alpha), 1) * sh_inv;
        out.bundle.phi.push_back(ghat * fb.phi[i] * hinv);
        if (fb.set.with_derivative[i]) {
            Mat2 ghat_dot = scale * (g_ref_inv * sf.dvalue());
            cplx d = lam - sf.alpha;
            Mat2 hinv_dot = sh * Mat2::diag(-1.0 / (d * d), 0) * sh_inv;
            out.bundle.phidot.push_back(ghat_dot * fb.phi[i] * hinv +
                                        ghat * fb.phidot[i] * hinv +
                                        ghat * fb.phi[i] * hinv_dot);
        } else {
            out.bundle.phidot.push_back(Mat2::zero());
        }
    }
    return out;
}

Mat2 sf_dressed_potential(const FrameBundle& fb, const Potential& xi,
                          const SimpleFactorSpec& sf, cplx lambda) {
    // xi.h^-1 = h xi h^-1 + h d(h^-1)/dz, with h = SF(alpha, Phi_alpha^-1 ell, span w)
    Mat2 phia = fb.at(sf.alpha);
    Mat2 phia_inv = phia.adj();
    Spinor2 x = sf.ell.apply(phia_inv);
    SpinorJet wj = spinor_field(xi, fb.z, fb.logz);
    Mat2 Xi_a = xi.xi(fb.z, fb.logz, sf.alpha);
    // x' = -Xi_alpha x;  w' from the spinor jet
    Spinor2 xp{-(Xi_a.a * x.u + Xi_a.b * x.v), -(Xi_a.c * x.u + Xi_a.d * x.v)};
    Mat2 S{x.u, wj.u.f, x.v, wj.v.f};
    Mat2 Sp{xp.u, wj.u.f1, xp.v, wj.v.f1};
    Mat2 Sinv = S.inv();
    cplx d = lambda - sf.alpha;
    Mat2 D = Mat2::diag(d, 1), Dinv = Mat2::diag(1.0 / d, 1);
    Mat2 h = S * D * Sinv;
    Mat2 hinv = S * Dinv * Sinv;
    Mat2 hinv_z = Sp * Dinv * Sinv - hinv * (Sp * Sinv);
    Mat2 Xi = xi.xi(fb.z, fb.logz, lambda);
    return h * Xi * hinv + h * hinv_z;
}

DressingFamily sf_ghat_family(const SimpleFactorSpec& sf, const LambdaSet& set, cplx lambda_ref) {
    DressingFamily f;
    f.set = set;
    Mat2 g_ref_inv = sf.value(lambda_ref).inv();
    cplx scale = std::sqrt(lambda_ref - sf.alpha);
    for (size_t i = 0; i < set.size(); ++i) {
        f.R.push_back(scale * (g_ref_inv * sf.value(set.lambdas[i])));
        f.Rdot.push_back(scale * (g_ref_inv * sf.dvalue()));
    }
    return f;
}

MonodromySample dressed_monodromy(const MonodromySample& m, const SimpleFactorSpec& sf,
                                  const DressingFamily& g, double eigen_tol) {
    const Mat2& ma = m.at(sf.alpha);
    auto ev = eigenvalues(ma);
    double scale = 1.0 + ma.norm();
    // a defective M_alpha (double eigenvalue, non-scalar) has no eigenline to dress
    if (std::abs(ev[0] - ev[1]) <= eigen_tol * scale) {
        cplx h = 0.5 * ma.tr();
        if ((ma - Mat2::diag(h, h)).norm() > eigen_tol * scale)
            throw Error("NotEigenline", "M_alpha is not diagonalizable");
    }
    double n = std::sqrt(sf.ell.norm2());
    Spinor2 l{sf.ell.u / n, sf.ell.v / n};
    double best = 1e300;
    for (cplx mu : ev) {
        Spinor2 r = l.apply(ma);
        best = std::min(best, std::sqrt(std::norm(r.u - mu * l.u) + std::norm(r.v - mu * l.v)));
    }
    if (best > eigen_tol * scale)
        throw Error("NotEigenline", "ell is not an eigenline of M_alpha");
    // drop the alpha slot, where the dressing family is singular
    MonodromySample trimmed;
    trimmed.loop_id = m.loop_id;
    for (size_t i = 0; i < m.set.size(); ++i) {
        if (std::abs(m.set.lambdas[i] - sf.alpha) < 1e-12) continue;
        trimmed.set.lambdas.push_back(m.set.lambdas[i]);
        trimmed.set.with_derivative.push_back(m.set.with_derivative[i]);
        trimmed.M.push_back(m.M[i]);
        trimmed.Mdot.push_back(m.Mdot[i]);
    }
    return conjugate_monodromy(trimmed, g);
}

// --- closing -------------------------------------------------------------------

ClosingVerdict check_closing(const std::vector<MonodromySample>& loops,
                             const EvaluationPair& ev, double tol) {
    ClosingVerdict out;
    out.tol = tol;
    out.closed_e3 = out.closed_h3 = true;  // vacuously closed on a simply connected domain
    for (const auto& m : loops) {
        LoopVerdict v;
        v.loop_id = m.loop_id;
        const Mat2& m0 = m.at(ev.lambda0);
        v.m0_residual = dist_pm_identity(m0);
        v.m0_scalar = v.m0_residual <= tol;
        int i0 = m.set.index_of(ev.lambda0);
        if (m.set.with_derivative[i0]) {
            v.e3_residual = dist_su2(ev.delta() * m.Mdot[i0]);
            v.e3_translation_ok = v.e3_residual <= tol;
        } else {
            v.e3_residual = std::numeric_limits<double>::quiet_NaN();
            v.e3_translation_ok = false;
        }
        v.h3_residual = dist_SU2(m.at(ev.lambda1));
        v.h3_unitary_ok = v.h3_residual <= tol;
        out.closed_e3 = out.closed_e3 && v.m0_scalar && v.e3_translation_ok;
        out.closed_h3 = out.closed_h3 && v.m0_scalar && v.h3_unitary_ok;
        out.loops.push_back(v);
    }
    return out;
}

// --- unitarization ---------------------------------------------------------------

namespace {

// smallest eigenvector of a symmetric 4x4 matrix, by cyclic Jacobi
std::array<double, 4> smallest_eigvec4(double a[4][4]) {
    double v[4][4] = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0;
        for (int p = 0; p < 4; ++p)
            for (int q = p + 1; q < 4; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-30) break;
        for (int p = 0; p < 4; ++p)
            for (int q = p + 1; q < 4; ++q) {
                if (std::abs(a[p][q]) < 1e-18) continue;
                double theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1));
                double c = 1 / std::sqrt(t * t + 1), s = t * c;
                for (int k = 0; k < 4; ++k) {
                    double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < 4; ++k) {
                    double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (int k = 0; k < 4; ++k) {
                    double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
    }
    int best = 0;
    for (int k = 1; k < 4; ++k)
        if (a[k][k] < a[best][best]) best = k;
    return {v[0][best], v[1][best], v[2][best], v[3][best]};
}

Mat2 hermitian_from(const std::array<double, 4>& p) {
    return {cplx(p[0], 0), cplx(p[1], p[2]), cplx(p[1], -p[2]), cplx(p[3], 0)};
}

// Least-squares solve for Hermitian P from linear constraints L_k(P) = 0,
// each L_k mapping the 4 real coordinates of P to a Hermitian matrix.
std::optional<Mat2> solve_invariant_form(const std::vector<std::function<Mat2(const Mat2&)>>& ops,
                                         double posdef_tol) {
    // rows: real components of each constraint applied to the 4 basis matrices
    static const std::array<std::array<double, 4>, 4> basis_coords = {
        {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}};
    double nmat[4][4] = {};
    for (const auto& op : ops) {
        // each op contributes 4 real equations (entries of a Hermitian matrix)
        std::array<std::array<double, 4>, 4> rows{};  // row r, column = P coord
        for (int c = 0; c < 4; ++c) {
            Mat2 e = op(hermitian_from(basis_coords[c]));
            rows[0][c] = e.a.real();
            rows[1][c] = e.b.real();
            rows[2][c] = e.b.imag();
            rows[3][c] = e.d.real();
        }
        for (int r = 0; r < 4; ++r)
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) nmat[i][j] += rows[r][i] * rows[r][j];
    }
    auto pvec = smallest_eigvec4(nmat);
    Mat2 P = hermitian_from(pvec);
    double tr = P.tr().real();
    if (std::abs(tr) < 1e-12) return std::nullopt;
    P = (2.0 / tr) * P;
    HermEig eig = hermitian_eig(P);
    if (eig.ev1 <= posdef_tol) return std::nullopt;
    return P;
}

Mat2 unitarizer_from_form(const Mat2& P) {
    Mat2 C = hermitian_sqrt(P);
    cplx det = C.det();
    return (1.0 / std::sqrt(det)) * C;
}

}  // namespace

UnitarizeResult unitarize_sl2c(const Mat2& A0, const Mat2& A1, const Mat2& A2, double tol) {
    double scale = std::max({A0.norm(), A1.norm(), A2.norm(), 1e-30});
    if ((A0 + A1 + A2).norm() > 1e-10 * scale)
        throw Error("RelationViolated", "A0 + A1 + A2 != 0");
    UnitarizeResult out;
    out.phi = commutator(A1, A2).det();
    const Mat2* as[3] = {&A0, &A1, &A2};
    bool real_data = true;
    for (int k = 0; k < 3; ++k) {
        cplx a = std::sqrt(as[k]->det());
        if (std::abs(a.imag()) > 1e-8 * (1.0 + std::abs(a))) real_data = false;
        if (a.real() < 0) a = -a;
        out.eigendata[k] = a;
    }
    double phi_scale = std::pow(scale, 4);
    if (std::abs(out.phi) <= 1e-9 * phi_scale) {
        out.cls = TripleClass::Reducible;
        return out;
    }
    if (!real_data || out.phi.real() <= 0) {
        out.cls = TripleClass::IrreducibleNonunitarizable;
        return out;
    }
    std::vector<std::function<Mat2(const Mat2&)>> ops;
    for (int k = 0; k < 3; ++k) {
        Mat2 A = *as[k];
        ops.push_back([A](const Mat2& P) { return A.dagger() * P + P * A; });
    }
    auto P = solve_invariant_form(ops, 1e-8);
    if (!P) {
        out.cls = TripleClass::IrreducibleNonunitarizable;
        return out;
    }
    Mat2 C = unitarizer_from_form(*P);
    Mat2 Cinv = C.inv();
    double res = 0;
    for (int k = 0; k < 3; ++k) res = std::max(res, dist_su2(C * (*as[k]) * Cinv));
    out.residual = res;
    if (res > std::sqrt(tol) * scale) {
        out.cls = TripleClass::IrreducibleNonunitarizable;
        return out;
    }
    out.cls = TripleClass::IrreducibleUnitarizable;
    out.unitarizer = C;
    return out;
}

UnitarizeResult unitarize_sl2C_group(const Mat2& M0, const Mat2& M1, const Mat2& M2,
                                     double tol) {
    if ((M0 * M1 * M2 - Mat2::identity()).norm() > 1e-10 * (1.0 + M0.norm() * M1.norm()))
        throw Error("RelationViolated", "M0 M1 M2 != I");
    UnitarizeResult out;
    const Mat2* ms[3] = {&M0, &M1, &M2};
    cplx t[3];
    bool real_elliptic = true;
    for (int k = 0; k < 3; ++k) {
        t[k] = 0.5 * ms[k]->tr();
        // log-eigenvalue nu normalized so Re nu in [0, 1/2]
        cplx e = t[k] + std::sqrt(t[k] * t[k] - 1.0);
        cplx nu = std::log(e) / (2.0 * M_PI * I_UNIT);
        if (nu.real() < 0) nu = -nu;
        nu -= std::floor(nu.real());
        if (nu.real() > 0.5) nu = 1.0 - nu;
        out.eigendata[k] = nu;
        if (std::abs(t[k].imag()) > 1e-9 * (1.0 + std::abs(t[k])) || std::abs(t[k].real()) >= 1.0)
            real_elliptic = false;
    }
    out.phi = 1.0 - t[0] * t[0] - t[1] * t[1] - t[2] * t[2] + 2.0 * t[0] * t[1] * t[2];
    if (std::abs(out.phi) <= 1e-9) {
        out.cls = TripleClass::Reducible;
        return out;
    }
    if (!real_elliptic || out.phi.real() <= 0) {
        out.cls = TripleClass::IrreducibleNonunitarizable;
        return out;
    }
    std::vector<std::function<Mat2(const Mat2&)>> ops;
    for (int k = 0; k < 3; ++k) {
        Mat2 M = *ms[k];
        ops.push_back([M](const Mat2& P) { return M.dagger() * P * M - P; });
    }
    auto P = solve_invariant_form(ops, 1e-8);
    if (!P) {
        out.cls = TripleClass::IrreducibleNonunitarizable;
        return out;
    }
    Mat2 C = unitarizer_from_form(*P);
    Mat2 Cinv = C.inv();
    double res = 0;
    for (int k = 0; k < 3; ++k) res = std::max(res, dist_SU2(C * (*ms[k]) * Cinv));
    out.residual = res;
    if (res > std::sqrt(tol)) {
        out.cls = TripleClass::IrreducibleNonunitarizable;
        return out;
    }
    out.cls = TripleClass::IrreducibleUnitarizable;
    out.unitarizer = C;
    return out;
}

}  // namespace lwr
