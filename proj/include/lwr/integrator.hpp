#pragma once

// Adaptive integration of the frame ODE dPhi = Phi xi along paths, jointly at
// a finite set of evaluation lambdas plus lambda-derivative channels, and
// monodromy extraction along loops.

#include <functional>
#include <memory>
#include <vector>

#include "lwr/potential.hpp"

namespace lwr {

struct SolverSettings {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double pole_clearance = 0.05;
};

// Tracked lambda slots; slots with derivative carry a d/dlambda channel.
struct LambdaSet {
    std::vector<cplx> lambdas;
    std::vector<bool> with_derivative;

    int index_of(cplx lambda, double tol = 1e-14) const {
        for (size_t i = 0; i < lambdas.size(); ++i)
            if (std::abs(lambdas[i] - lambda) <= tol) return static_cast<int>(i);
        throw Error("MissingEvaluation", "lambda not tracked by this bundle");
    }
    size_t size() const { return lambdas.size(); }
};

struct InitialData {
    cplx z0;
    cplx logz0;  // branch of log at the base point
    LambdaSet set;
    std::vector<Mat2> C;     // per slot
    std::vector<Mat2> Cdot;  // per slot; used only where with_derivative

    void validate(double tol = 1e-12) const;
    static InitialData constant(cplx z0, const LambdaSet& set, const Mat2& c);
};

struct FrameBundle {
    cplx z;
    cplx logz;
    LambdaSet set;
    std::vector<Mat2> phi;
    std::vector<Mat2> phidot;

    const Mat2& at(cplx lambda) const { return phi[set.index_of(lambda)]; }
    const Mat2& dot_at(cplx lambda) const {
        int i = set.index_of(lambda);
        if (!set.with_derivative[i])
            throw Error("MissingEvaluation", "no derivative channel at this lambda");
        return phidot[i];
    }
};

// Piecewise path in the z plane: straight segments and circular arcs.
struct PathSegment {
    enum class Kind { Line, Arc } kind;
    cplx a, b;               // line endpoints
    cplx center;             // arc data
    double radius = 0, theta0 = 0, theta1 = 0;

    cplx start() const;
    cplx end() const;
    cplx point(double t) const;     // t in [0,1]
    cplx velocity(double t) const;  // dz/dt
};

struct PathSpec {
    std::vector<PathSegment> segments;

    static PathSpec line(cplx a, cplx b);
    static PathSpec polyline(const std::vector<cplx>& pts);
    // full circle around center, counterclockwise for turns > 0, starting at
    // angle theta_start; turns may be fractional or negative
    static PathSpec circle(cplx center, double radius, double turns = 1.0,
                           double theta_start = 0.0);
    PathSpec& append(const PathSpec& other);
    PathSpec reversed() const;
    cplx start() const { return segments.front().start(); }
    cplx end() const { return segments.back().end(); }
    bool closed(double tol = 1e-12) const { return std::abs(start() - end()) <= tol; }
    double min_pole_distance(const std::vector<cplx>& poles, int samples_per_seg = 64) const;
};

// Integrates the bundle along a path; init.z0 must equal the path start.
FrameBundle integrate_frame(const Potential& xi, const PathSpec& path, const InitialData& init,
                            const SolverSettings& s = {});

// Same, but also reports the bundle at interior stops given as cumulative
// parameter fractions in (0,1).
std::vector<FrameBundle> integrate_frame_stops(const Potential& xi, const PathSpec& path,
                                               const InitialData& init,
                                               const std::vector<double>& stops,
                                               const SolverSettings& s = {});

struct MonodromySample {
    int loop_id = 0;
    LambdaSet set;
    std::vector<Mat2> M;
    std::vector<Mat2> Mdot;

    const Mat2& at(cplx lambda) const { return M[set.index_of(lambda)]; }
    const Mat2& dot_at(cplx lambda) const {
        int i = set.index_of(lambda);
        if (!set.with_derivative[i])
            throw Error("MissingEvaluation", "no derivative channel at this lambda");
        return Mdot[i];
    }
};

// Monodromy along a closed loop, left-factor convention: continuation of Phi
// around the loop equals M Phi. M = Phi_end C^-1, Mdot = (Phidot_end - M Cdot) C^-1.
MonodromySample monodromy(const Potential& xi, const PathSpec& loop, const InitialData& init,
                          const SolverSettings& s = {});

// --- grids -----------------------------------------------------------------

// Uniform lattice in a chart coordinate w; node positions z = chart(w).
struct Chart {
    enum class Kind { Identity, Exp, ExpAround } kind = Kind::Identity;
    cplx center{0};  // ExpAround: z = center + exp(w)
    // Identity: z = w. Exp: z = exp(w), so log z = w exactly.
    cplx map(cplx w) const {
        switch (kind) {
            case Kind::Identity: return w;
            case Kind::Exp: return std::exp(w);
            default: return center + std::exp(w);
        }
    }
    cplx dmap(cplx w) const { return kind == Kind::Identity ? cplx(1) : std::exp(w); }
};

struct GridSpec {
    Chart chart;
    cplx w00;          // corner node in chart coordinates
    double hx = 0, hy = 0;
    int nx = 0, ny = 0;

    cplx w_at(int i, int j) const { return w00 + cplx(i * hx, j * hy); }
    cplx z_at(int i, int j) const { return chart.map(w_at(i, j)); }
    int index(int i, int j) const { return j * nx + i; }

    static GridSpec rect(cplx center, double half_x, double half_y, int nx, int ny);
    // annulus rmin..rmax sampled as exp chart; theta spans [0, 2pi] inclusive
    static GridSpec annulus(double rmin, double rmax, int nr, int ntheta,
                            double theta0 = 0.0, double theta1 = 6.283185307179586476925286766559);
    // polar patch rmin..rmax around an arbitrary center (rational potentials
    // only: the log branch is not tracked through this chart)
    static GridSpec polar_around(cplx center, double rmin, double rmax, int nr, int ntheta,
                                 double theta0 = 0.0,
                                 double theta1 = 6.283185307179586476925286766559);
};

struct GridFrames {
    GridSpec grid;
    LambdaSet set;
    std::vector<FrameBundle> nodes;  // size nx*ny, row-major via grid.index
};

// Frames at every grid node, propagated edge-by-edge along a spanning tree
// (root column first, then rows). `parallel` switches on the OpenMP kernel;
// the serial path is the reference implementation and both produce identical
// results.
GridFrames propagate_grid(const Potential& xi, const GridSpec& grid, const InitialData& init,
                          const SolverSettings& s = {}, bool parallel = true);

}  // namespace lwr
