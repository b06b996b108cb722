#pragma once

// Named constructions (Enneper, catenoid, revolution, trinoid, dressed
// catenoid), the JSON job runner and file export.

#include <optional>
#include <string>

#include "lwr/transform.hpp"

namespace lwr {

struct EnneperSpec {
    double r = 1;
    int n = 0;
};

struct CatenoidSpec {
    double p = 0.25;
    double q = 1;
    Target target = Target::E3;
};

struct RevolutionSpec {
    double a = 1, b = 1;
    double alpha = 0, beta = 1;
    double nu = 0;
    Target target = Target::E3;
};

struct TrinoidSpec {
    std::array<cplx, 3> weights;
    // delta = q0^2+q1^2+q2^2 - 2 q0 q1 - 2 q0 q2 - 2 q1 q2; zero iff the Hopf
    // numerator has a double zero
    cplx delta() const;
    std::array<cplx, 2> hopf_zeros() const;  // u0, u1
};

struct DressedCatenoidSpec {
    CatenoidSpec base;
    double u = 0.5;          // rotation parameter, u > 0, u != 1
    Spinor2 ell{1, 1};       // real projective line
    cplx alpha() const { return base.p * (u * u - 1.0) / base.q; }
};

// Everything needed to run the LWR pipeline for one construction.
struct GalleryData {
    Potential xi;
    InitialData init;
    EvaluationPair ev{0.0, 1.0};
    Target target = Target::E3;
    std::vector<PathSpec> loops;  // generating loops for closing checks
    std::optional<SimpleFactorSpec> dressing;
    std::vector<cplx> predicted_singularities;  // dressing singularities, closed form
    std::string name;
};

GalleryData make_enneper(const EnneperSpec& spec, Target target);
GalleryData make_catenoid(const CatenoidSpec& spec);
GalleryData make_revolution(const RevolutionSpec& spec);
// Builds the Fuchsian trinoid potential, integrates the puncture monodromies
// and dresses by a unitarizer; refuses degenerate or inadmissible weights
// before integrating.
GalleryData make_trinoid(const TrinoidSpec& spec, Target target,
                         const SolverSettings& s = {});
GalleryData make_dressed_catenoid(const DressedCatenoidSpec& spec);

// Closed-form metric densities and Hopf differentials of the generators, used
// as oracles by checks and tests.
double enneper_metric(const EnneperSpec& s, cplx z);
double catenoid_metric(const CatenoidSpec& s, cplx z);
double revolution_metric(const RevolutionSpec& s, cplx z);
cplx enneper_hopf(const EnneperSpec& s, const EvaluationPair& ev, cplx z);
cplx catenoid_hopf(const CatenoidSpec& s, cplx z);
cplx revolution_hopf(const RevolutionSpec& s, cplx z);

// --- job configs -----------------------------------------------------------------

struct ConfigError : Error {
    std::string pointer;  // JSON pointer to the offending field
    ConfigError(std::string ptr, const std::string& msg)
        : Error("ConfigError", msg + " at " + ptr), pointer(std::move(ptr)) {}
};

struct TransformStep {
    enum class Kind { AssociatedMove, DualSwap, Dress } kind;
    cplx t{1, 0};        // AssociatedMove
    Mat2 dress_u;        // Dress: unitary at the reference evaluation point
    Mat2 dress_x;        // Dress: exponential generator
};

struct JobConfig {
    Target target = Target::E3;
    std::string surface_type;
    EnneperSpec enneper;
    CatenoidSpec catenoid;
    RevolutionSpec revolution;
    TrinoidSpec trinoid;
    DressedCatenoidSpec dressed;
    // custom potential
    std::optional<Potential> custom_xi;
    cplx custom_z0{1, 0};
    Mat2 custom_C = Mat2::identity();
    std::vector<std::pair<cplx, double>> custom_loops;  // center, radius (0 = default)
    std::optional<EvaluationPair> evaluation;
    std::optional<GridSpec> grid;
    SolverSettings solver;
    std::vector<TransformStep> transforms;
    std::string obj_path, csv_path;
    std::vector<std::string> checks;
    bool parallel = true;
};

JobConfig parse_job_config(const std::string& json_text);
JobConfig load_job_config(const std::string& path);

// Parse one meromorphic entry: a sum of c*z^a terms or a poly/poly ratio.
Entry parse_entry(const std::string& text);

struct JobResult {
    int exit_code = 0;                     // 0 ok, 1 check failed, 2 error
    std::vector<std::string> summary;      // key=value lines
    Mesh mesh;
};

// Full pipeline: build data, propagate the grid, apply transforms, write
// OBJ/CSV, collect summary lines; checks per requested suite.
JobResult run_job(const JobConfig& cfg);

// Monodromy report for `lwr monodromy --loop k`.
JobResult run_monodromy(const JobConfig& cfg, int loop_index);

// Evaluate a surface with per-node simple factor dressing; singular nodes are
// flagged invalid and excluded from meshes.
SampledSurface evaluate_dressed_surface(const Potential& xi, const GridFrames& frames,
                                        const SimpleFactorSpec& sf, const EvaluationPair& ev,
                                        Target target, bool parallel = true);

}  // namespace lwr
