// Benchmark: serial reference vs OpenMP kernels for grid propagation and
// per-node surface evaluation on a catenoid job.

#include <chrono>
#include <cstdio>

#include "lwr/gallery.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace lwr;

static double ms_since(std::chrono::steady_clock::time_point t0) {
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

int main() {
    CatenoidSpec spec;
    spec.p = 0.25;
    spec.q = 1.0;
    GalleryData gd = make_catenoid(spec);
    GridSpec grid = GridSpec::annulus(0.5, 2.0, 96, 96);

#ifdef _OPENMP
    std::printf("threads=%d\n", omp_get_max_threads());
#else
    std::printf("threads=1 (built without OpenMP)\n");
#endif

    auto t0 = std::chrono::steady_clock::now();
    GridFrames serial = propagate_grid(gd.xi, grid, gd.init, {}, false);
    double t_prop_serial = ms_since(t0);

    t0 = std::chrono::steady_clock::now();
    GridFrames par = propagate_grid(gd.xi, grid, gd.init, {}, true);
    double t_prop_par = ms_since(t0);

    t0 = std::chrono::steady_clock::now();
    SampledSurface s1 = evaluate_surface(gd.xi, serial, gd.ev, gd.target, false);
    double t_eval_serial = ms_since(t0);

    t0 = std::chrono::steady_clock::now();
    SampledSurface s2 = evaluate_surface(gd.xi, par, gd.ev, gd.target, true);
    double t_eval_par = ms_since(t0);

    double max_diff = 0;
    for (size_t k = 0; k < s1.samples.size(); ++k)
        max_diff = std::max(max_diff, dist(s1.samples[k].position, s2.samples[k].position));

    std::printf("propagate_serial_ms=%.1f\n", t_prop_serial);
    std::printf("propagate_omp_ms=%.1f\n", t_prop_par);
    std::printf("evaluate_serial_ms=%.1f\n", t_eval_serial);
    std::printf("evaluate_omp_ms=%.1f\n", t_eval_par);
    std::printf("speedup_propagate=%.2f\n", t_prop_serial / t_prop_par);
    std::printf("speedup_evaluate=%.2f\n", t_eval_serial / t_eval_par);
    std::printf("serial_vs_parallel_max_diff=%.3e\n", max_diff);
    return max_diff == 0.0 ? 0 : 1;
}
