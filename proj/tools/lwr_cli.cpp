// lwr: generate, check and inspect Loop Weierstrass Representation surfaces.
//
//   lwr generate  -c job.json
//   lwr check     -c job.json [--suite conformality|closing|hopf|all]
//   lwr monodromy -c job.json --loop <index>
//
// Exit codes: 0 ok, 1 a requested check failed, 2 config or numeric error.

#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "lwr/gallery.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

int main(int argc, char** argv) {
    CLI::App app{"Loop Weierstrass Representation surface generator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string suite = "all";
    int loop_index = 0;

    CLI::App* gen = app.add_subcommand("generate", "run a job and write OBJ/CSV outputs");
    gen->add_option("-c,--config", config_path, "job config (JSON)")->required();

    CLI::App* check = app.add_subcommand("check", "run invariant checks for a job");
    check->add_option("-c,--config", config_path, "job config (JSON)")->required();
    check->add_option("--suite", suite, "conformality|closing|hopf|all")
        ->check(CLI::IsMember({"conformality", "closing", "hopf", "all"}));

    CLI::App* mono = app.add_subcommand("monodromy", "print loop monodromy data");
    mono->add_option("-c,--config", config_path, "job config (JSON)")->required();
    mono->add_option("--loop", loop_index, "loop index")->required();

    CLI11_PARSE(app, argc, argv);

    if (const char* t = std::getenv("LWR_THREADS")) {
#ifdef _OPENMP
        int n = std::atoi(t);
        if (n > 0) omp_set_num_threads(n);
#else
        (void)t;
#endif
    }

    lwr::JobResult res;
    try {
        lwr::JobConfig cfg = lwr::load_job_config(config_path);
        if (gen->parsed()) {
            res = lwr::run_job(cfg);
        } else if (check->parsed()) {
            cfg.checks = {suite};
            res = lwr::run_job(cfg);
        } else {
            res = lwr::run_monodromy(cfg, loop_index);
        }
    } catch (const lwr::Error& e) {
        std::fprintf(stderr, "error=%s\n", e.what());
        return 2;
    }
    for (const auto& line : res.summary) std::printf("%s\n", line.c_str());
    return res.exit_code;
}
