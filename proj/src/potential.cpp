#include "lwr/potential.hpp"

namespace lwr {

void Potential::check_structure(cplx z, cplx logz, double tol) const {
    Mat2 a = A.value(z, logz);
    Mat2 b = B.value(z, logz);
    double sa = 1.0 + a.norm() * a.norm();
    if (std::abs(a.det()) > tol * sa || std::abs(a.tr()) > tol * std::sqrt(sa))
        throw Error("NotNilpotent", "linear part is not nilpotent at sample");
    if (std::abs(b.tr()) > tol * (1.0 + b.norm()))
        throw Error("NotTraceFree", "constant part is not trace-free at sample");
}

Potential gauge_apply(const Potential& xi, const Gauge& gauge) {
    const MatEntry& g = gauge.g;
    MatEntry ginv = g.adj_matrix();  // det g == 1
    Potential out;
    out.A = ginv * xi.A * g;
    out.B = ginv * xi.B * g + ginv * g.derivative();
    out.poles = xi.poles;
    for (cplx p : gauge.poles) out.poles.push_back(p);
    out.domain = xi.domain;
    return out;
}

Gauge gauge_compose(const Gauge& g, const Gauge& h) {
    Gauge out;
    out.g = g.g * h.g;
    out.poles = g.poles;
    out.poles.insert(out.poles.end(), h.poles.begin(), h.poles.end());
    return out;
}

SpinorJet spinor_field(const Potential& xi, cplx z, cplx logz) {
    Mat2Jet a = xi.A.eval(z, logz);
    Mat2 av = a.at(0);
    double scale = av.norm();
    double tol = 1e-10 * std::max(1e-300, scale * scale);
    if (std::abs(av.det()) > tol || std::abs(av.tr()) > 1e-7 * std::max(1e-150, scale))
        throw Error("NotNilpotent", "potential linear part not nilpotent at point");
    SpinorJet s;
    if (scale == 0.0) {
        s.zero = true;
        return s;
    }
    if (std::abs(av.b) >= std::abs(av.c)) {
        s.u = a.b.sqrt();                    // u = sqrt(A12)
        s.v = -(a.a / s.u);                  // v = -A11/u
    } else {
        s.v = (-a.c).sqrt();                 // v = sqrt(-A21)
        s.u = -(a.a / s.v);                  // u = -A11/v
    }
    return s;
}

cplx hopf_q(const Potential& xi, cplx z, cplx logz) {
    SpinorJet x = spinor_field(xi, z, logz);
    if (x.zero) return 0.0;
    Mat2 b = xi.B.value(z, logz);
    // Bx + x_z
    cplx pu = b.a * x.u.f + b.b * x.v.f + x.u.f1;
    cplx pv = b.c * x.u.f + b.d * x.v.f + x.v.f1;
    return x.u.f * pv - x.v.f * pu;
}

SpinorHopf spinor_field_and_hopf(const Potential& xi, const EvaluationPair& ev, cplx z,
                                 cplx logz) {
    SpinorJet x = spinor_field(xi, z, logz);
    SpinorHopf out;
    if (x.zero) {
        out.x = {0, 0};
        out.x_z = {0, 0};
        out.Q = 0;
        return out;
    }
    out.x = {x.u.f, x.v.f};
    out.x_z = {x.u.f1, x.v.f1};
    Mat2 b = xi.B.value(z, logz);
    cplx pu = b.a * x.u.f + b.b * x.v.f + x.u.f1;
    cplx pv = b.c * x.u.f + b.d * x.v.f + x.v.f1;
    out.Q = ev.delta() * (x.u.f * pv - x.v.f * pu);
    return out;
}

cplx schwarzian(const Jet3& g, double critical_tol) {
    double scale = std::max({std::abs(g.f1), std::abs(g.f2), std::abs(g.f3), 1.0});
    if (std::abs(g.f1) < critical_tol * scale)
        throw Error("CriticalPoint", "Schwarzian at a critical point of g");
    // w = g''/(2g'); S = w^2 - w'
    cplx w = g.f2 / (2.0 * g.f1);
    cplx wp = g.f3 / (2.0 * g.f1) - g.f2 * g.f2 / (2.0 * g.f1 * g.f1);
    return w * w - wp;
}

cplx schwarzian(const Entry& g, cplx z, cplx logz) { return schwarzian(g.eval(z, logz)); }

Mat2Jet frame_jet(const Mat2& phi, const Potential& xi, cplx lambda, cplx z, cplx logz) {
    Mat2Jet aj = xi.A.eval(z, logz);
    Mat2Jet bj = xi.B.eval(z, logz);
    Mat2 Xi = lambda * aj.at(0) + bj.at(0);
    Mat2 Xi1 = lambda * aj.at(1) + bj.at(1);
    Mat2 Xi2 = lambda * aj.at(2) + bj.at(2);
    Mat2 p1 = phi * Xi;
    Mat2 p2 = phi * (Xi * Xi + Xi1);
    Mat2 p3 = phi * (Xi * Xi * Xi + 2.0 * (Xi * Xi1) + Xi1 * Xi + Xi2);
    Mat2Jet out;
    out.a = {phi.a, p1.a, p2.a, p3.a};
    out.b = {phi.b, p1.b, p2.b, p3.b};
    out.c = {phi.c, p1.c, p2.c, p3.c};
    out.d = {phi.d, p1.d, p2.d, p3.d};
    return out;
}

SpinorJet y_jet(const Mat2Jet& phi, const SpinorJet& x) {
    SpinorJet y;
    y.zero = x.zero;
    y.u = phi.a * x.u + phi.b * x.v;
    y.v = phi.c * x.u + phi.d * x.v;
    return y;
}

FuchsianForm fuchsianize(const Mat2& A, const Mat2& B, bool swapped);

FuchsianForm fuchsian_normalize(const Mat2& A, const Mat2& B) {
    // det K = det(A lambda + B) = -(q lambda + p)
    // lambda coefficient: d/dlambda det = A.a*B.d + B.a*A.d - A.b*B.c - B.b*A.c
    cplx q = -(A.a * B.d + B.a * A.d - A.b * B.c - B.b * A.c);
    cplx p = -B.det();
    if (std::abs(q) < 1e-14) throw Error("ZeroWeight", "residue has lambda-independent det");

    // already normalized?
    Mat2 target_A{0, 0, q, 0}, target_B{0, 1, p, 0};
    if (dist(A, target_A) < 1e-14 && dist(B, target_B) < 1e-14) {
        FuchsianForm out;
        out.gauge = Gauge::identity();
        out.q = q;
        out.p = p;
        out.residue_A = target_A;
        out.residue_B = target_B;
        return out;
    }

    Spinor2 x = spinor_of_nilpotent(A, 1e-8);
    Mat2 chain = Mat2::identity();
    Mat2 A1 = A, B1 = B;
    if (std::abs(x.v) <= 1e-8 * std::sqrt(x.norm2())) {
        Mat2 g0{0, I_UNIT, I_UNIT, 0};  // swap so that v != 0
        chain = g0;
        A1 = g0.adj() * A * g0;
        B1 = g0.adj() * B * g0;
        x = spinor_of_nilpotent(A1, 1e-8);
    }
    // g1 maps the spinor to (0,1)
    Mat2 g1{1.0 / x.v, x.u, 0, x.v};
    A1 = g1.adj() * A1 * g1;
    B1 = g1.adj() * B1 * g1;
    // now A1 = [[0,0],[-1,0]], B1 = [[beta, -q],[gamma, -beta]]
    cplx beta = B1.a;
    cplx sq = std::sqrt(-q);
    Mat2 g2 = Mat2::diag(sq, 1.0 / sq);
    A1 = g2.adj() * A1 * g2;
    B1 = g2.adj() * B1 * g2;
    Mat2 g3{1, 0, -beta, 1};
    A1 = g3.adj() * A1 * g3;
    B1 = g3.adj() * B1 * g3;

    FuchsianForm out;
    out.gauge = Gauge::constant(chain * g1 * g2 * g3);
    out.q = q;
    out.p = p;
    out.residue_A = A1;
    out.residue_B = B1;
    if (dist(A1, target_A) > 1e-9 * (1.0 + A.norm()) ||
        dist(B1, target_B) > 1e-9 * (1.0 + B.norm()))
        throw Error("NormalizationFailed", "gauge chain did not reach the normal form");
    return out;
}

SchwarzSample schwarz_data(const Potential& xi, const Mat2& phi_lambda0, cplx lambda0, cplx z,
                           cplx logz) {
    SchwarzSample out;
    out.q = hopf_q(xi, z, logz);
    SpinorJet x = spinor_field(xi, z, logz);
    if (x.zero) throw Error("Degenerate", "potential spinor vanishes at sample");
    Mat2Jet phi = frame_jet(phi_lambda0, xi, lambda0, z, logz);
    SpinorJet y = y_jet(phi, x);
    Jet3 g = y.u / y.v;
    out.s = schwarzian(g) - lambda0 * out.q;
    return out;
}

bool is_degenerate(const Potential& xi, const std::vector<cplx>& probes, double tol) {
    double scale = 0.0;
    std::vector<cplx> qs;
    for (cplx z : probes) {
        cplx q = hopf_q(xi, z, std::log(z));
        qs.push_back(q);
        scale = std::max(scale, std::abs(q));
    }
    (void)qs;
    return scale < tol;
}

}  // namespace lwr
