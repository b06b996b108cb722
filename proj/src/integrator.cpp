#include "lwr/integrator.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lwr {

void InitialData::validate(double tol) const {
    if (C.size() != set.size() || Cdot.size() != set.size())
        throw Error("BadInitialData", "slot count mismatch");
    for (size_t i = 0; i < set.size(); ++i) {
        if (std::abs(C[i].det() - 1.0) > tol)
            throw Error("BadInitialData", "initial matrix is not unimodular");
        if (set.with_derivative[i]) {
            cplx t = (C[i].inv() * Cdot[i]).tr();
            if (std::abs(t) > 100 * tol)
                throw Error("BadInitialData", "derivative of det C does not vanish");
        }
    }
}

InitialData InitialData::constant(cplx z0, const LambdaSet& set, const Mat2& c) {
    InitialData d;
    d.z0 = z0;
    d.logz0 = std::log(z0);
    d.set = set;
    d.C.assign(set.size(), c);
    d.Cdot.assign(set.size(), Mat2::zero());
    return d;
}

cplx PathSegment::start() const { return kind == Kind::Line ? a : point(0.0); }
cplx PathSegment::end() const { return kind == Kind::Line ? b : point(1.0); }
cplx PathSegment::point(double t) const {
    if (kind == Kind::Line) return a + t * (b - a);
    double th = theta0 + t * (theta1 - theta0);
    return center + radius * std::exp(cplx(0, th));
}
cplx PathSegment::velocity(double t) const {
    if (kind == Kind::Line) return b - a;
    double th = theta0 + t * (theta1 - theta0);
    return radius * cplx(0, theta1 - theta0) * std::exp(cplx(0, th));
}

PathSpec PathSpec::line(cplx a, cplx b) {
    PathSegment s;
    s.kind = PathSegment::Kind::Line;
    s.a = a;
    s.b = b;
    return PathSpec{{s}};
}

PathSpec PathSpec::polyline(const std::vector<cplx>& pts) {
    PathSpec p;
    for (size_t i = 0; i + 1 < pts.size(); ++i) p.append(line(pts[i], pts[i + 1]));
    return p;
}

PathSpec PathSpec::circle(cplx center, double radius, double turns, double theta_start) {
    PathSegment s;
    s.kind = PathSegment::Kind::Arc;
    s.center = center;
    s.radius = radius;
    s.theta0 = theta_start;
    s.theta1 = theta_start + 2.0 * M_PI * turns;
    return PathSpec{{s}};
}

PathSpec& PathSpec::append(const PathSpec& other) {
    if (!segments.empty() && !other.segments.empty() &&
        std::abs(end() - other.start()) > 1e-12)
        throw Error("BadPath", "appended segment does not start at the path end");
    segments.insert(segments.end(), other.segments.begin(), other.segments.end());
    return *this;
}

PathSpec PathSpec::reversed() const {
    PathSpec out;
    for (auto it = segments.rbegin(); it != segments.rend(); ++it) {
        PathSegment s = *it;
        if (s.kind == PathSegment::Kind::Line) {
            std::swap(s.a, s.b);
        } else {
            std::swap(s.theta0, s.theta1);
        }
        out.segments.push_back(s);
    }
    return out;
}

double PathSpec::min_pole_distance(const std::vector<cplx>& poles, int /*unused*/) const {
    double d = 1e300;
    for (const auto& seg : segments)
        for (cplx p : poles) {
            if (seg.kind == PathSegment::Kind::Line) {
                cplx ab = seg.b - seg.a;
                double len2 = std::norm(ab);
                double t = len2 > 0 ? std::clamp(((p - seg.a) * std::conj(ab)).real() / len2,
                                                 0.0, 1.0)
                                    : 0.0;
                d = std::min(d, std::abs(seg.a + t * ab - p));
            } else {
                double rho = std::abs(p - seg.center);
                double ang = std::arg(p - seg.center);
                double t0 = std::min(seg.theta0, seg.theta1);
                double t1 = std::max(seg.theta0, seg.theta1);
                bool inside = false;  // does the arc sweep the pole's angle?
                for (double a = ang - 8.0 * M_PI; a <= t1 + 1e-12; a += 2.0 * M_PI)
                    if (a >= t0 - 1e-12 && a <= t1 + 1e-12) inside = true;
                if (inside) {
                    d = std::min(d, std::abs(rho - seg.radius));
                } else {
                    d = std::min(d, std::abs(seg.point(0.0) - p));
                    d = std::min(d, std::abs(seg.point(1.0) - p));
                }
            }
        }
    return d;
}

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                 e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                 e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

struct State {
    std::vector<Mat2> phi;
    std::vector<Mat2> dot;
};

struct StopRecord {
    double frac;
    State state;
    lwr::cplx logz;
};

State axpy(const State& y, double h, const std::initializer_list<std::pair<double, const State*>>& ks) {
    State r = y;
    for (auto& [w, k] : ks) {
        for (size_t i = 0; i < r.phi.size(); ++i) r.phi[i] += (h * w) * k->phi[i];
        for (size_t i = 0; i < r.dot.size(); ++i) r.dot[i] += (h * w) * k->dot[i];
    }
    return r;
}

}  // namespace

static void rhs(const Potential& xi, const LambdaSet& set, cplx z, cplx logz, cplx vel,
                const State& y, State& f) {
    Mat2 A = xi.A.value(z, logz);
    Mat2 B = xi.B.value(z, logz);
    size_t n = set.size();
    f.phi.resize(n);
    f.dot.resize(n);
    for (size_t i = 0; i < n; ++i) {
        Mat2 Xi = set.lambdas[i] * A + B;
        f.phi[i] = vel * (y.phi[i] * Xi);
        if (set.with_derivative[i])
            f.dot[i] = vel * (y.dot[i] * Xi + y.phi[i] * A);
        else
            f.dot[i] = Mat2::zero();
    }
}

static double error_norm(const State& y, const State& ynew, const State& err, double atol,
                         double rtol) {
    double m = 0.0;
    auto upd = [&](const Mat2& e, const Mat2& a, const Mat2& b) {
        const cplx* pe = &e.a;
        const cplx* pa = &a.a;
        const cplx* pb = &b.a;
        for (int k = 0; k < 4; ++k) {
            double sc = atol + rtol * std::max(std::abs(pa[k]), std::abs(pb[k]));
            m = std::max(m, std::abs(pe[k]) / sc);
        }
    };
    for (size_t i = 0; i < y.phi.size(); ++i) upd(err.phi[i], y.phi[i], ynew.phi[i]);
    for (size_t i = 0; i < y.dot.size(); ++i) upd(err.dot[i], y.dot[i], ynew.dot[i]);
    return m;
}

// renormalize det Phi to 1 (principal square root; drift stays near 1) and
// keep the derivative channel consistent: tr(Phi^-1 Phidot) = 0
static void renormalize(const LambdaSet& set, State& y) {
    for (size_t i = 0; i < y.phi.size(); ++i) {
        cplx det = y.phi[i].det();
        if (std::abs(det - 1.0) > 1e-12) {
            cplx s = std::sqrt(det);
            cplx is = 1.0 / s;
            y.phi[i] *= is;
            if (set.with_derivative[i]) y.dot[i] *= is;
        }
        if (set.with_derivative[i]) {
            cplx t = 0.5 * (y.phi[i].adj() * y.dot[i]).tr();  // adj = inv for det 1
            if (std::abs(t) > 1e-13) y.dot[i] -= t * y.phi[i];
        }
    }
}

// Integrate one path segment from t=0 to t=1; logz continued per step.
static void integrate_segment(const Potential& xi, const PathSegment& seg, const LambdaSet& set,
                              const SolverSettings& s, State& y, cplx& logz,
                              const std::vector<double>* stops, size_t& next_stop,
                              std::vector<StopRecord>* stop_out, double seg_t0,
                              double seg_scale) {
    double t = 0.0;
    double h = 0.1;
    double prev_err = 1.0;
    State k1, k2, k3, k4, k5, k6, k7, ytmp;
    cplx zbase = seg.point(0.0);
    auto logz_at = [&](cplx z) { return logz + std::log(z / zbase); };

    int guard = 0;
    while (t < 1.0) {
        if (++guard > 2000000) throw Error("ToleranceFailure", "step count exceeded");
        double target = 1.0;
        bool target_is_stop = false;
        if (stops && next_stop < stops->size()) {
            double local = ((*stops)[next_stop] - seg_t0) / seg_scale;
            if (local > t + 1e-15 && local < 1.0 + 1e-12) {
                target = std::min(1.0, local);
                target_is_stop = true;
            }
        }
        bool hit_stop = false;
        double hs = h;
        if (t + hs >= target) {
            hs = target - t;
            hit_stop = target_is_stop;
        }

        cplx z1 = seg.point(t);
        cplx lz1 = logz_at(z1);
        rhs(xi, set, z1, lz1, seg.velocity(t), y, k1);
        auto stage = [&](double ci, State& yi, State& ki) {
            cplx zz = seg.point(t + ci * hs);
            rhs(xi, set, zz, logz_at(zz), seg.velocity(t + ci * hs), yi, ki);
        };
        ytmp = axpy(y, hs, {{a21, &k1}});
        stage(c2, ytmp, k2);
        ytmp = axpy(y, hs, {{a31, &k1}, {a32, &k2}});
        stage(c3, ytmp, k3);
        ytmp = axpy(y, hs, {{a41, &k1}, {a42, &k2}, {a43, &k3}});
        stage(c4, ytmp, k4);
        ytmp = axpy(y, hs, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}});
        stage(c5, ytmp, k5);
        ytmp = axpy(y, hs, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}});
        stage(1.0, ytmp, k6);
        State ynew = axpy(y, hs, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
        cplx zn = seg.point(t + hs);
        rhs(xi, set, zn, logz_at(zn), seg.velocity(t + hs), ynew, k7);
        State err = axpy(State{std::vector<Mat2>(y.phi.size()), std::vector<Mat2>(y.dot.size())},
                         hs, {{e1, &k1}, {e3, &k3}, {e4, &k4}, {e5, &k5}, {e6, &k6}, {e7, &k7}});
        double en = error_norm(y, ynew, err, s.abs_tol, s.rel_tol);

        if (en <= 1.0) {
            logz = logz_at(zn);
            zbase = zn;
            t += hs;
            y = std::move(ynew);
            renormalize(set, y);
            if (hit_stop && stop_out) {
                stop_out->push_back({seg_t0 + t * seg_scale, y, logz});
                ++next_stop;
            }
            // PI controller
            double fac = 0.9 * std::pow(std::max(en, 1e-10), -0.7 / 5.0) *
                         std::pow(std::max(prev_err, 1e-10), 0.4 / 5.0);
            prev_err = std::max(en, 1e-10);
            h = hs * std::clamp(fac, 0.2, 5.0);
        } else {
            double fac = std::max(0.2, 0.9 * std::pow(en, -1.0 / 5.0));
            h = hs * fac;
        }
        if (h < 1e-13) {
            bool near_pole = false;
            for (cplx p : xi.poles)
                if (std::abs(seg.point(t) - p) < 2 * s.pole_clearance) near_pole = true;
            throw Error(near_pole ? "PoleEncounter" : "ToleranceFailure",
                        "step size collapsed during integration");
        }
    }
}

static FrameBundle run_path(const Potential& xi, const PathSpec& path, const InitialData& init,
                            const SolverSettings& s, const std::vector<double>* stops,
                            std::vector<StopRecord>* stop_out) {
    if (path.segments.empty()) throw Error("BadPath", "empty path");
    if (std::abs(path.start() - init.z0) > 1e-12)
        throw Error("BadPath", "path does not start at the initial point");
    if (!xi.poles.empty() && path.min_pole_distance(xi.poles) < s.pole_clearance)
        throw Error("PoleEncounter", "path violates pole clearance");

    State y{init.C, init.Cdot};
    cplx logz = init.logz0;
    size_t next_stop = 0;
    double total = static_cast<double>(path.segments.size());
    for (size_t i = 0; i < path.segments.size(); ++i)
        integrate_segment(xi, path.segments[i], init.set, s, y, logz, stops, next_stop, stop_out,
                          double(i) / total, 1.0 / total);

    FrameBundle out;
    out.z = path.end();
    out.logz = logz;
    out.set = init.set;
    out.phi = std::move(y.phi);
    out.phidot = std::move(y.dot);
    return out;
}

FrameBundle integrate_frame(const Potential& xi, const PathSpec& path, const InitialData& init,
                            const SolverSettings& s) {
    return run_path(xi, path, init, s, nullptr, nullptr);
}

std::vector<FrameBundle> integrate_frame_stops(const Potential& xi, const PathSpec& path,
                                               const InitialData& init,
                                               const std::vector<double>& stops,
                                               const SolverSettings& s) {
    std::vector<double> sorted = stops;
    std::sort(sorted.begin(), sorted.end());
    std::vector<StopRecord> raw;
    FrameBundle last = run_path(xi, path, init, s, &sorted, &raw);
    std::vector<FrameBundle> out;
    for (auto& rec : raw) {
        FrameBundle b;
        double total = static_cast<double>(path.segments.size());
        double scaled = rec.frac * total;
        int seg = std::min<int>(static_cast<int>(scaled), path.segments.size() - 1);
        b.z = path.segments[seg].point(scaled - seg);
        b.logz = rec.logz;
        b.set = init.set;
        b.phi = rec.state.phi;
        b.phidot = rec.state.dot;
        out.push_back(std::move(b));
    }
    out.push_back(std::move(last));
    return out;
}

MonodromySample monodromy(const Potential& xi, const PathSpec& loop, const InitialData& init,
                          const SolverSettings& s) {
    if (!loop.closed()) throw Error("NotClosed", "monodromy path endpoints differ");
    FrameBundle end = integrate_frame(xi, loop, init, s);
    MonodromySample m;
    m.set = init.set;
    m.M.resize(init.set.size());
    m.Mdot.assign(init.set.size(), Mat2::zero());
    for (size_t i = 0; i < init.set.size(); ++i) {
        Mat2 Cinv = init.C[i].adj();  // det = 1
        m.M[i] = end.phi[i] * Cinv;
        if (init.set.with_derivative[i])
            m.Mdot[i] = (end.phidot[i] - m.M[i] * init.Cdot[i]) * Cinv;
    }
    return m;
}

GridSpec GridSpec::rect(cplx center, double half_x, double half_y, int nx, int ny) {
    GridSpec g;
    g.chart.kind = Chart::Kind::Identity;
    g.nx = nx;
    g.ny = ny;
    g.hx = nx > 1 ? 2 * half_x / (nx - 1) : 0.0;
    g.hy = ny > 1 ? 2 * half_y / (ny - 1) : 0.0;
    g.w00 = center - cplx(half_x, half_y);
    return g;
}

GridSpec GridSpec::annulus(double rmin, double rmax, int nr, int ntheta, double theta0,
                           double theta1) {
    GridSpec g;
    g.chart.kind = Chart::Kind::Exp;
    g.nx = nr;
    g.ny = ntheta;
    g.w00 = cplx(std::log(rmin), theta0);
    g.hx = nr > 1 ? (std::log(rmax) - std::log(rmin)) / (nr - 1) : 0.0;
    g.hy = ntheta > 1 ? (theta1 - theta0) / (ntheta - 1) : 0.0;
    return g;
}

GridSpec GridSpec::polar_around(cplx center, double rmin, double rmax, int nr, int ntheta,
                                double theta0, double theta1) {
    GridSpec g = annulus(rmin, rmax, nr, ntheta, theta0, theta1);
    g.chart.kind = Chart::Kind::ExpAround;
    g.chart.center = center;
    return g;
}

// Integrate a tree edge between two chart nodes. In exponential charts the
// edge is an arc/radial piece; subdivide the chart-straight edge into short
// z-lines so the generic path machinery applies (log continuation handles
// the branch).
static FrameBundle grid_edge(const Potential& xi, const GridSpec& grid, const FrameBundle& from,
                             cplx w_from, cplx w_to, const SolverSettings& s) {
    InitialData init;
    init.z0 = from.z;
    init.logz0 = from.logz;
    init.set = from.set;
    init.C = from.phi;
    init.Cdot = from.phidot;

    cplx z_to = grid.chart.map(w_to);
    PathSpec path;
    if (grid.chart.kind == Chart::Kind::Identity) {
        path = PathSpec::line(from.z, z_to);
    } else {
        std::vector<cplx> pts;
        int pieces = 8;
        for (int k = 0; k <= pieces; ++k)
            pts.push_back(grid.chart.map(w_from + (double(k) / pieces) * (w_to - w_from)));
        path = PathSpec::polyline(pts);
    }
    FrameBundle out = integrate_frame(xi, path, init, s);
    // exp chart: pin the log branch to the chart coordinate exactly
    if (grid.chart.kind == Chart::Kind::Exp) out.logz = w_to;
    out.z = z_to;
    return out;
}

GridFrames propagate_grid(const Potential& xi, const GridSpec& grid, const InitialData& init,
                          const SolverSettings& s, bool parallel) {
    GridFrames out;
    out.grid = grid;
    out.set = init.set;
    out.nodes.resize(size_t(grid.nx) * grid.ny);

    // connector from z0 to the root node (0,0)
    FrameBundle root;
    {
        cplx zr = grid.z_at(0, 0);
        InitialData d = init;
        if (std::abs(zr - init.z0) < 1e-14) {
            root.z = init.z0;
            root.logz = init.logz0;
            root.set = init.set;
            root.phi = init.C;
            root.phidot = init.Cdot;
        } else {
            root = integrate_frame(xi, PathSpec::line(init.z0, zr), d, s);
            if (grid.chart.kind == Chart::Kind::Exp) {
                // align the tracked branch with the chart coordinate sheet
                cplx w = grid.w_at(0, 0);
                if (std::abs(root.logz - w) > 1e-6)
                    throw Error("BadGrid", "connector crosses a branch sheet");
                root.logz = w;
            }
        }
    }
    out.nodes[grid.index(0, 0)] = root;

    // first column, sequential
    for (int j = 1; j < grid.ny; ++j)
        out.nodes[grid.index(0, j)] = grid_edge(xi, grid, out.nodes[grid.index(0, j - 1)],
                                                grid.w_at(0, j - 1), grid.w_at(0, j), s);

    // rows, parallel over j
    auto run_row = [&](int j) {
        for (int i = 1; i < grid.nx; ++i)
            out.nodes[grid.index(i, j)] =
                grid_edge(xi, grid, out.nodes[grid.index(i - 1, j)], grid.w_at(i - 1, j),
                          grid.w_at(i, j), s);
    };
#ifdef _OPENMP
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int j = 0; j < grid.ny; ++j) run_row(j);
    } else {
        for (int j = 0; j < grid.ny; ++j) run_row(j);
    }
#else
    (void)parallel;
    for (int j = 0; j < grid.ny; ++j) run_row(j);
#endif
    return out;
}

}  // namespace lwr
