#pragma once

// Null curves, immersions into E3/H3, fundamental forms, Gauss maps,
// finite-difference curvature diagnostics, meshes and their export.

#include <string>
#include <vector>

#include "lwr/integrator.hpp"

namespace lwr {

enum class Target { E3, H3 };

struct NullCurves {
    Mat2 psi;  // (lambda1-lambda0) Phidot Phi^-1 at lambda0, trace-free
    Mat2 Psi;  // Phi_{lambda1} Phi_{lambda0}^-1
};

NullCurves null_curves(const FrameBundle& fb, const EvaluationPair& ev);

// E3: psi + psi^*;  H3: Psi^* Psi
Mat2 immerse(const FrameBundle& fb, const EvaluationPair& ev, Target target);

// ds^2 = |lambda1-lambda0|^2 |y|^4 |dz|^2 with y = Phi_{lambda0} x (E3) or
// Phi_{lambda1} x (H3)
double metric_density(const FrameBundle& fb, const EvaluationPair& ev, Target target,
                      const Spinor2& x);

// Gauss map G = u/v, (u,v) = Phi_{lambda0} x, as a projective pair
Spinor2 gauss_pair(const FrameBundle& fb, const EvaluationPair& ev, const Spinor2& x);

// normal: E3 full normal N; H3 the translated normal n of the identity frame
Mat2 unit_normal(const FrameBundle& fb, const EvaluationPair& ev, Target target,
                 const Spinor2& x);

struct SurfaceSample {
    cplx z;
    Mat2 position;         // E3Point or H3Point matrix
    Mat2 normal;           // N (E3) or n translated to identity (H3)
    Mat2 normal_full;      // ambient normal used by curvature estimates
    Mat2 psi, Psi;         // null curve values, kept for the residual checks
    double metric_density = 0;
    cplx hopf{0};
    Spinor2 gauss;         // projective pair (u, v) = Phi_{lambda0} x
    double h_est = std::numeric_limits<double>::quiet_NaN();
    bool valid = true;     // false on dressing singularities etc.
};

// Evaluate one node of a frame grid.
SurfaceSample evaluate_sample(const Potential& xi, const FrameBundle& fb,
                              const EvaluationPair& ev, Target target);

struct SampledSurface {
    GridSpec grid;
    Target target;
    EvaluationPair ev;
    std::vector<SurfaceSample> samples;  // grid.index layout

    const SurfaceSample& at(int i, int j) const { return samples[grid.index(i, j)]; }
    SurfaceSample& at(int i, int j) { return samples[grid.index(i, j)]; }
};

// Evaluate all nodes; OpenMP kernel with a serial reference path.
SampledSurface evaluate_surface(const Potential& xi, const GridFrames& frames,
                                const EvaluationPair& ev, Target target, bool parallel = true);

// Mean curvature estimate H = <f_ww~, N>/<f_w, f_w~> via 4th-order central
// differences in the chart coordinate plus one Richardson step; fills h_est on
// interior nodes (margin 4).
void estimate_mean_curvature(SampledSurface& surf);

// Single-node estimate; throws BoundaryNode without the interior margin.
double mean_curvature_estimate(const SampledSurface& surf, int i, int j);

struct PdeResiduals {
    double conformality = 0;      // max |<f_w,f_w>| / <f_w,f_w~>
    double metric_consistency = 0;  // max rel. deviation of 2<f_w,f_w~> vs density
    double h_deviation = 0;       // max |H - expected|
    double nullity = 0;           // max |det dpsi| / |dpsi|^2 over both null curves
    double hopf_consistency = 0;  // stored Q vs finite-differenced det(y, y_w)
};
PdeResiduals pde_residuals(const SampledSurface& surf);

struct Mesh {
    std::vector<std::array<double, 3>> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<SurfaceSample> diagnostics;  // parallel to vertices
};

// Vertices are E3 coordinates or H3 ball coordinates; quads split along the
// shorter diagonal; invalid samples are dropped together with their faces.
Mesh build_mesh(const SampledSurface& surf);

// Byte-deterministic writers: OBJ "%.9f", CSV "%.12e", LF endings.
void write_obj(const Mesh& mesh, const std::string& path);
void write_csv(const Mesh& mesh, const std::string& path);

inline void export_mesh(const Mesh& mesh, const std::string& obj_path,
                        const std::string& csv_path) {
    if (!obj_path.empty()) write_obj(mesh, obj_path);
    if (!csv_path.empty()) write_csv(mesh, csv_path);
}

}  // namespace lwr
