#include "lwr/surface.hpp"

#include <cinttypes>
#include <cstdio>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lwr {

NullCurves null_curves(const FrameBundle& fb, const EvaluationPair& ev) {
    const Mat2& phi0 = fb.at(ev.lambda0);
    const Mat2& phi1 = fb.at(ev.lambda1);
    const Mat2& dot0 = fb.dot_at(ev.lambda0);
    Mat2 inv0 = phi0.adj();  // det = 1 maintained by the integrator
    NullCurves out;
    out.psi = ev.delta() * (dot0 * inv0);
    out.Psi = phi1 * inv0;
    return out;
}

Mat2 immerse(const FrameBundle& fb, const EvaluationPair& ev, Target target) {
    NullCurves nc = null_curves(fb, ev);
    if (target == Target::E3) return nc.psi + nc.psi.dagger();
    return nc.Psi.dagger() * nc.Psi;
}

double metric_density(const FrameBundle& fb, const EvaluationPair& ev, Target target,
                      const Spinor2& x) {
    cplx lam = (target == Target::E3) ? ev.lambda0 : ev.lambda1;
    Spinor2 y = x.apply(fb.at(lam));
    double n2 = y.norm2();
    return std::norm(ev.delta()) * n2 * n2;
}

Spinor2 gauss_pair(const FrameBundle& fb, const EvaluationPair& ev, const Spinor2& x) {
    return x.apply(fb.at(ev.lambda0));
}

static Mat2 reflection_of(const Spinor2& y) {
    double n2 = y.norm2();
    Mat2 p{y.u * std::conj(y.u), y.u * std::conj(y.v), y.v * std::conj(y.u),
           y.v * std::conj(y.v)};
    return Mat2::identity() - (2.0 / n2) * p;
}

Mat2 unit_normal(const FrameBundle& fb, const EvaluationPair& ev, Target target,
                 const Spinor2& x) {
    cplx lam = (target == Target::E3) ? ev.lambda0 : ev.lambda1;
    return reflection_of(x.apply(fb.at(lam)));
}

SurfaceSample evaluate_sample(const Potential& xi, const FrameBundle& fb,
                              const EvaluationPair& ev, Target target) {
    SurfaceSample s;
    s.z = fb.z;
    SpinorHopf sh = spinor_field_and_hopf(xi, ev, fb.z, fb.logz);
    NullCurves nc = null_curves(fb, ev);
    s.psi = nc.psi;
    s.Psi = nc.Psi;
    s.position = (target == Target::E3) ? nc.psi + nc.psi.dagger() : nc.Psi.dagger() * nc.Psi;
    s.hopf = sh.Q;
    s.metric_density = metric_density(fb, ev, target, sh.x);
    s.gauss = gauss_pair(fb, ev, sh.x);
    s.normal = unit_normal(fb, ev, target, sh.x);
    s.normal_full = (target == Target::E3) ? s.normal : nc.Psi.dagger() * s.normal * nc.Psi;
    return s;
}

SampledSurface evaluate_surface(const Potential& xi, const GridFrames& frames,
                                const EvaluationPair& ev, Target target, bool parallel) {
    SampledSurface out{frames.grid, target, ev, {}};
    out.samples.resize(frames.nodes.size());
    int n = static_cast<int>(frames.nodes.size());
    auto work = [&](int k) { out.samples[k] = evaluate_sample(xi, frames.nodes[k], ev, target); };
#ifdef _OPENMP
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (int k = 0; k < n; ++k) work(k);
    } else {
        for (int k = 0; k < n; ++k) work(k);
    }
#else
    (void)parallel;
    for (int k = 0; k < n; ++k) work(k);
#endif
    return out;
}

namespace {

// 4th-order central first and second derivative stencils with step multiplier m
template <typename Get>
Mat2 d1(Get f, int m, double h) {
    return (1.0 / (12.0 * h * m)) *
           (-f(2 * m) + 8.0 * f(m) - 8.0 * f(-m) + f(-2 * m));
}
template <typename Get>
Mat2 d2(Get f, int m, double h) {
    return (1.0 / (12.0 * h * m * h * m)) *
           (-f(2 * m) + 16.0 * f(m) - 30.0 * f(0) + 16.0 * f(-m) - f(-2 * m));
}

double mean_curvature_at(const SampledSurface& surf, int i, int j, int m) {
    const GridSpec& g = surf.grid;
    auto fx = [&](int k) { return surf.at(i + k, j).position; };
    auto fy = [&](int k) { return surf.at(i, j + k).position; };
    Mat2 f_x = d1(fx, m, g.hx), f_y = d1(fy, m, g.hy);
    Mat2 f_xx = d2(fx, m, g.hx), f_yy = d2(fy, m, g.hy);
    Mat2 f_w = 0.5 * (f_x - I_UNIT * f_y);
    Mat2 f_wb = 0.5 * (f_x + I_UNIT * f_y);
    Mat2 f_wwb = 0.25 * (f_xx + f_yy);
    cplx num = lorentz_inner(f_wwb, surf.at(i, j).normal_full);
    cplx den = lorentz_inner(f_w, f_wb);
    return (num / den).real();
}

}  // namespace

double mean_curvature_estimate(const SampledSurface& surf, int i, int j) {
    const GridSpec& g = surf.grid;
    if (i < 4 || j < 4 || i >= g.nx - 4 || j >= g.ny - 4)
        throw Error("BoundaryNode", "mean curvature stencil leaves the grid");
    for (int dj = -4; dj <= 4; ++dj)
        for (int di = -4; di <= 4; ++di)
            if (!surf.at(i + di, j + dj).valid)
                throw Error("BoundaryNode", "stencil touches an excluded node");
    double h1 = mean_curvature_at(surf, i, j, 1);
    double h2 = mean_curvature_at(surf, i, j, 2);
    return (16.0 * h1 - h2) / 15.0;
}

void estimate_mean_curvature(SampledSurface& surf) {
    const GridSpec& g = surf.grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (i < 4 || j < 4 || i >= g.nx - 4 || j >= g.ny - 4) continue;
            SurfaceSample& s = surf.at(i, j);
            if (!s.valid) continue;
            bool ok = true;
            for (int dj = -4; dj <= 4 && ok; ++dj)
                for (int di = -4; di <= 4 && ok; ++di)
                    if (!surf.at(i + di, j + dj).valid) ok = false;
            if (!ok) continue;
            double h1 = mean_curvature_at(surf, i, j, 1);
            double h2 = mean_curvature_at(surf, i, j, 2);
            s.h_est = (16.0 * h1 - h2) / 15.0;
        }
}

PdeResiduals pde_residuals(const SampledSurface& surf) {
    const GridSpec& g = surf.grid;
    PdeResiduals r;
    double expected_h = (surf.target == Target::E3) ? 0.0 : 1.0;

    // sign-continued y = Phi_{lambda0} x per node for the finite-difference route
    std::vector<Spinor2> yv(surf.samples.size());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            int k = g.index(i, j);
            Spinor2 y = surf.samples[k].gauss;
            // continue the spinor sign along rows, then down the first column
            Spinor2 ref = (i > 0) ? yv[g.index(i - 1, j)]
                                  : (j > 0 ? yv[g.index(0, j - 1)] : y);
            cplx ip = y.u * std::conj(ref.u) + y.v * std::conj(ref.v);
            yv[k] = (ip.real() < 0) ? Spinor2{-y.u, -y.v} : y;
        }

    auto window_valid = [&](int i, int j) {
        for (int dj = -2; dj <= 2; ++dj)
            for (int di = -2; di <= 2; ++di)
                if (!surf.at(i + di, j + dj).valid) return false;
        return true;
    };

    for (int j = 2; j < g.ny - 2; ++j)
        for (int i = 2; i < g.nx - 2; ++i) {
            const SurfaceSample& s = surf.at(i, j);
            if (!s.valid || !window_valid(i, j)) continue;
            auto fx = [&](int k) { return surf.at(i + k, j).position; };
            auto fy = [&](int k) { return surf.at(i, j + k).position; };
            Mat2 f_x = d1(fx, 1, g.hx), f_y = d1(fy, 1, g.hy);
            Mat2 f_w = 0.5 * (f_x - I_UNIT * f_y);
            Mat2 f_wb = 0.5 * (f_x + I_UNIT * f_y);
            double den = lorentz_inner(f_w, f_wb).real();
            r.conformality = std::max(r.conformality,
                                      std::abs(lorentz_inner(f_w, f_w)) / den);

            cplx w = g.w_at(i, j);
            double jac2 = std::norm(g.chart.dmap(w));
            double density_fd = 2.0 * den;
            double density_formula = s.metric_density * jac2;
            r.metric_consistency =
                std::max(r.metric_consistency,
                         std::abs(density_fd - density_formula) / density_formula);

            if (!std::isnan(s.h_est))
                r.h_deviation = std::max(r.h_deviation, std::abs(s.h_est - expected_h));

            // nullity of the finite-differenced null curves
            auto px = [&](int k) { return surf.at(i + k, j).psi; };
            auto py = [&](int k) { return surf.at(i, j + k).psi; };
            Mat2 dpsi = 0.5 * (d1(px, 1, g.hx) - I_UNIT * d1(py, 1, g.hy));
            double npsi = dpsi.norm();
            if (npsi > 0)
                r.nullity = std::max(r.nullity, std::abs(dpsi.det()) / (npsi * npsi));
            auto Px = [&](int k) { return surf.at(i + k, j).Psi; };
            auto Py = [&](int k) { return surf.at(i, j + k).Psi; };
            Mat2 dPsi = 0.5 * (d1(Px, 1, g.hx) - I_UNIT * d1(Py, 1, g.hy));
            double nPsi = dPsi.norm();
            if (nPsi > 0)
                r.nullity = std::max(r.nullity, std::abs(dPsi.det()) / (nPsi * nPsi));

            // Hopf from finite-differenced y against the spinor formula
            auto yu_x = [&](int k) { return yv[g.index(i + k, j)].u; };
            auto yv_x = [&](int k) { return yv[g.index(i + k, j)].v; };
            auto yu_y = [&](int k) { return yv[g.index(i, j + k)].u; };
            auto yv_y = [&](int k) { return yv[g.index(i, j + k)].v; };
            auto dc1 = [&](auto f, double h) {
                return (-f(2) + 8.0 * f(1) - 8.0 * f(-1) + f(-2)) / (12.0 * h);
            };
            cplx yu_w = 0.5 * (dc1(yu_x, g.hx) - I_UNIT * dc1(yu_y, g.hy));
            cplx yv_w = 0.5 * (dc1(yv_x, g.hx) - I_UNIT * dc1(yv_y, g.hy));
            const Spinor2& y0 = yv[g.index(i, j)];
            cplx dzdw = g.chart.dmap(w);
            cplx q_fd = (y0.u * yv_w - y0.v * yu_w) / dzdw;
            cplx Q_fd = surf.ev.delta() * q_fd;
            r.hopf_consistency =
                std::max(r.hopf_consistency, std::abs(Q_fd - s.hopf) / (1.0 + std::abs(s.hopf)));
        }
    return r;
}

Mesh build_mesh(const SampledSurface& surf) {
    const GridSpec& g = surf.grid;
    Mesh m;
    std::vector<int> vid(surf.samples.size(), -1);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const SurfaceSample& s = surf.at(i, j);
            if (!s.valid) continue;
            std::array<double, 3> p;
            if (surf.target == Target::E3) {
                p = {s.position.b.real(), s.position.b.imag(), s.position.a.real()};
            } else {
                double x0 = 0.5 * (s.position.a + s.position.d).real();
                double x3 = 0.5 * (s.position.a - s.position.d).real();
                p = {s.position.b.real() / (1 + x0), s.position.b.imag() / (1 + x0),
                     x3 / (1 + x0)};
            }
            bool finite = std::isfinite(p[0]) && std::isfinite(p[1]) && std::isfinite(p[2]);
            if (!finite) continue;
            vid[g.index(i, j)] = static_cast<int>(m.vertices.size());
            m.vertices.push_back(p);
            m.diagnostics.push_back(s);
        }
    auto d3 = [&](int u, int v) {
        const auto& a = m.vertices[u];
        const auto& b = m.vertices[v];
        double s = 0;
        for (int k = 0; k < 3; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
        return s;
    };
    for (int j = 0; j + 1 < g.ny; ++j)
        for (int i = 0; i + 1 < g.nx; ++i) {
            int v00 = vid[g.index(i, j)], v10 = vid[g.index(i + 1, j)];
            int v01 = vid[g.index(i, j + 1)], v11 = vid[g.index(i + 1, j + 1)];
            if (v00 < 0 || v10 < 0 || v01 < 0 || v11 < 0) continue;
            if (d3(v00, v11) <= d3(v10, v01)) {
                m.triangles.push_back({v00, v10, v11});
                m.triangles.push_back({v00, v11, v01});
            } else {
                m.triangles.push_back({v00, v10, v01});
                m.triangles.push_back({v10, v11, v01});
            }
        }
    return m;
}

void write_obj(const Mesh& mesh, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw Error("IoError", "cannot open " + path);
    for (const auto& v : mesh.vertices)
        std::fprintf(f, "v %.9f %.9f %.9f\n", v[0], v[1], v[2]);
    for (const auto& t : mesh.triangles)
        std::fprintf(f, "f %d %d %d\n", t[0] + 1, t[1] + 1, t[2] + 1);
    std::fclose(f);
}

void write_csv(const Mesh& mesh, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw Error("IoError", "cannot open " + path);
    std::fprintf(f, "z_re,z_im,ds2,Q_re,Q_im,G_re,G_im,H_est\n");
    for (const auto& s : mesh.diagnostics) {
        cplx G;
        bool ginf = std::abs(s.gauss.v) == 0.0;
        if (!ginf) G = s.gauss.u / s.gauss.v;
        std::fprintf(f, "%.12e,%.12e,%.12e,%.12e,%.12e,", s.z.real(), s.z.imag(),
                     s.metric_density, s.hopf.real(), s.hopf.imag());
        if (ginf)
            std::fprintf(f, "inf,inf,");
        else
            std::fprintf(f, "%.12e,%.12e,", G.real(), G.imag());
        if (std::isnan(s.h_est))
            std::fprintf(f, "nan\n");
        else
            std::fprintf(f, "%.12e\n", s.h_est);
    }
    std::fclose(f);
}

}  // namespace lwr
