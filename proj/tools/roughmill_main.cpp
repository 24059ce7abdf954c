#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "roughmill/averaging.hpp"
#include "roughmill/config.hpp"
#include "roughmill/csv.hpp"
#include "roughmill/experiments.hpp"

int main(int argc, char** argv) {
    using namespace roughmill;

    CLI::App app{"spectral slow-fast rough-path experiments"};
    std::string experiment;
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    int replicas = 0;
    int threads = 0;
    bool emit = false;
    std::string driver_out, replay_path;

    app.add_option("experiment", experiment, "one of: lift-check, convolve-check, increments, ergodicity, averaging")
        ->check(CLI::IsMember(std::vector<std::string>(std::begin(kExperimentNames), std::end(kExperimentNames))));
    app.add_option("--config", config_path, "configuration file (flat dotted key = value)")
        ->envname("ROUGHMILL_CONFIG");
    app.add_option("--seed", seed, "master seed override")->envname("ROUGHMILL_SEED");
    app.add_option("--out", out_dir, "output directory for CSV and summary files")
        ->envname("ROUGHMILL_OUT");
    app.add_option("--replicas", replicas, "Monte Carlo replica count override")
        ->envname("ROUGHMILL_REPLICAS");
    app.add_option("--threads", threads, "worker thread count override")
        ->envname("ROUGHMILL_THREADS");
    app.add_flag("--emit-config", emit, "print the validated configuration and exit");
    app.add_option("--emit-driver", driver_out,
                   "sample the slow driver for the current config/seed and write it to this CSV");
    app.add_option("--replay-driver", replay_path,
                   "integrate the averaged equation along a saved driver CSV and write the trajectory");

    CLI11_PARSE(app, argc, argv);

    try {
        Config cfg = config_path.empty() ? Config{} : parse_config_file(config_path);
        if (app.count("--seed")) cfg.solver.master_seed = seed;
        if (app.count("--replicas")) cfg.experiment.replicas = replicas;
        if (app.count("--threads")) cfg.experiment.threads = threads;
        validate_solver_config(cfg.solver);

        if (emit) {
            std::cout << emit_config(cfg);
            return 0;
        }
        if (!driver_out.empty()) {
            const CoupledDrivers drv = sample_coupled_drivers(cfg.solver, cfg.model.d1, cfg.model.d2);
            save_rough_path_csv(drv.B, driver_out);
            std::cout << "driver written to " << driver_out << "\n";
            if (experiment.empty() && replay_path.empty()) return 0;
        }
        if (!replay_path.empty()) {
            const GridRoughPath B = load_rough_path_csv(replay_path);
            const SpectralOperator op = make_operator(cfg);
            const ModelSpec m = make_model(op, cfg);
            SolverConfig sc = cfg.solver;
            if (B.n_steps() != sc.macro_steps || B.dim != m.d1) {
                std::cerr << "replayed driver has " << B.n_steps() << " steps of dimension "
                          << B.dim << "; config expects " << sc.macro_steps << " steps of dimension "
                          << m.d1 << "\n";
                return 2;
            }
            const auto fbar = make_default_fbar(op, cfg.model);
            const std::vector<ScaleVector> traj =
                solve_averaged(op, m, fbar, sc, B, default_initial(op.n_modes()));
            std::filesystem::create_directories(out_dir);
            const std::string path = (std::filesystem::path(out_dir) / "replay-trajectory.csv").string();
            write_trajectory_csv(path, B.times, traj);
            std::cout << "trajectory written to " << path << "\n";
            if (experiment.empty()) return 0;
        }
        if (experiment.empty()) {
            std::cerr << "no experiment named; see --help\n";
            return 2;
        }

        const ExperimentReport rep = run_experiment(experiment, cfg, out_dir);
        std::cout << format_report(rep);
        return rep.passed ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
