#include "geonav/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "geonav/checkpoint.hpp"
#include "geonav/csv.hpp"
#include "geonav/synthetic_field.hpp"

namespace geonav::cli {

namespace {

namespace fs = std::filesystem;

std::filesystem::path default_coefficients() {
    if (const char* env_path = std::getenv("GEONAV_IGRF_FILE"); env_path && *env_path) {
        return env_path;
    }
    return "data/igrf13coeffs.txt";
}

RunConfig load_config(const std::string& path) {
    RunConfig config = RunConfig::from_json_file(path);
    config.validate_all();
    return config;
}

int runtime_fail(const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
}

void print_summary(const std::vector<TrainEpisodeLog>& log) {
    if (log.empty()) {
        std::cout << "episodes=0\n";
        return;
    }
    const TrainEpisodeLog& last = log.back();
    std::cout << "episodes=" << last.episode << "\n"
              << "final_window_return=" << csv::format_double(last.window_return) << "\n"
              << "final_window_sr=" << csv::format_double(last.window_success) << "\n";
}

}  // namespace

int cmd_field(const FieldArgs& args) {
    GeoPosition pos;
    try {
        pos = GeoPosition::make(args.lat, args.lon);
    } catch (const std::exception& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }
    try {
        fs::path coeff_path =
            args.coefficients.empty() ? default_coefficients() : fs::path(args.coefficients);
        IgrfModel model(CoefficientSet::load(coeff_path));
        GeomagneticElements e = model.elements_at(pos, args.epoch);
        LocalFrame frame(pos);
        ElementGradients g = element_gradients(model, frame, pos, args.epoch);
        std::cout << "lat_deg=" << csv::format_double(pos.latitude_deg) << "\n"
                  << "lon_deg=" << csv::format_double(pos.longitude_deg) << "\n"
                  << "epoch=" << csv::format_double(args.epoch) << "\n"
                  << "D_deg=" << csv::format_fixed(e.d * kRadToDeg, 6) << "\n"
                  << "I_deg=" << csv::format_fixed(e.i * kRadToDeg, 6) << "\n"
                  << "BH_nT=" << csv::format_fixed(e.b_h, 3) << "\n"
                  << "BF_nT=" << csv::format_fixed(e.b_f, 3) << "\n"
                  << "Bx_nT=" << csv::format_fixed(e.bx, 3) << "\n"
                  << "By_nT=" << csv::format_fixed(e.by, 3) << "\n"
                  << "Bz_nT=" << csv::format_fixed(e.bz, 3) << "\n"
                  << "grad_D_east_rad_per_m=" << csv::format_double(g.d.gx) << "\n"
                  << "grad_D_north_rad_per_m=" << csv::format_double(g.d.gy) << "\n"
                  << "grad_I_east_rad_per_m=" << csv::format_double(g.i.gx) << "\n"
                  << "grad_I_north_rad_per_m=" << csv::format_double(g.i.gy) << "\n"
                  << "grad_BH_east_nT_per_m=" << csv::format_double(g.b_h.gx) << "\n"
                  << "grad_BH_north_nT_per_m=" << csv::format_double(g.b_h.gy) << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        return runtime_fail(e);
    }
}

int cmd_grid(const GridArgs& args) {
    if (args.resolution < 2) {
        std::cerr << "usage error: resolution must be >= 2\n";
        return kExitUsage;
    }
    Region region{args.lat_min, args.lat_max, args.lon_min, args.lon_max};
    try {
        region.validate();
    } catch (const std::exception& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }
    try {
        fs::path coeff_path =
            args.coefficients.empty() ? default_coefficients() : fs::path(args.coefficients);
        IgrfModel model(CoefficientSet::load(coeff_path));
        auto grid = sample_grid(model, region, args.resolution, args.resolution, args.epoch);
        std::ofstream out(args.out_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write grid file: " + args.out_path);
        out << "lat,lon,D_deg,I_deg,BH_nT,BF_nT\n";
        for (const GridSample& s : grid) {
            out << csv::format_fixed(s.pos.latitude_deg, 6) << ','
                << csv::format_fixed(s.pos.longitude_deg, 6) << ','
                << csv::format_fixed(s.elements.d * kRadToDeg, 6) << ','
                << csv::format_fixed(s.elements.i * kRadToDeg, 6) << ','
                << csv::format_fixed(s.elements.b_h, 6) << ','
                << csv::format_fixed(s.elements.b_f, 6) << "\n";
        }
        if (!out) throw std::runtime_error("grid write failed: " + args.out_path);
        std::cout << "wrote " << args.out_path << " (" << grid.size() << " rows)\n";
        return kExitOk;
    } catch (const std::exception& e) {
        return runtime_fail(e);
    }
}

int cmd_train(const TrainArgs& args) {
    RunConfig config;
    try {
        config = load_config(args.config_path);
        if (args.seed >= 0) config.seed = static_cast<std::uint64_t>(args.seed);
        if (args.episodes >= 0) config.episodes = static_cast<int>(args.episodes);
        if (!args.output_dir.empty()) config.output_dir = args.output_dir;
        if (args.zeta3 >= 0.0) {
            config.env.reward.zeta3 = args.zeta3;  // 0 = plain-TD3 ablation
            config.env.reward.validate();
        }
    } catch (const std::exception& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }
    try {
        fs::create_directories(config.output_dir);
        auto model = config.make_model(args.coefficients);
        NavEnv env(model, config.make_env_config());
        TD3Agent agent(config.td3, env.bounds(), derive_seed(config.seed, "td3-init"));

        TrainOptions options;
        options.episodes = config.episodes;
        options.checkpoint_dir = config.output_dir;
        options.first_episode = 1;
        if (!args.resume_checkpoint.empty()) {
            Checkpoint ck = Checkpoint::load(args.resume_checkpoint);
            agent.restore(ck);
            if (auto it = ck.counters.find("episodes_done"); it != ck.counters.end()) {
                options.first_episode = static_cast<int>(it->second) + 1;
            }
        }
        std::mt19937_64 rng(derive_seed(config.seed, "train-loop"));
        auto log = train_td3(env, agent, config.make_train_sampler(), options, rng);
        write_training_log(log, config.output_dir / "training_log.csv",
                           /*append=*/options.first_episode > 1);
        print_summary(log);
        return kExitOk;
    } catch (const std::exception& e) {
        return runtime_fail(e);
    }
}

int cmd_benchmark(const BenchmarkArgs& args) {
    RunConfig config;
    BenchmarkSetup setup;
    try {
        config = load_config(args.config_path);
        if (args.seed >= 0) config.seed = static_cast<std::uint64_t>(args.seed);
        if (!args.output_dir.empty()) config.output_dir = args.output_dir;
        if (args.threads > 0) config.benchmark_threads = args.threads;
        setup.methods = config.benchmark_methods;
        if (!args.methods.empty()) {
            setup.methods.clear();
            std::string tok;
            for (char ch : args.methods + ",") {
                if (ch == ',') {
                    if (!tok.empty()) setup.methods.push_back(tok);
                    tok.clear();
                } else {
                    tok += ch;
                }
            }
            for (const std::string& m : setup.methods) {
                if (m != "ggtd3" && m != "td3" && m != "ga" && m != "pso" && m != "afsa") {
                    throw std::invalid_argument("unknown method '" + m + "'");
                }
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }
    try {
        setup.task_config = config.make_task_config();
        setup.env_config = config.make_env_config();
        setup.baselines = config.baselines;
        setup.td3_config = config.td3;
        setup.checkpoints = config.checkpoints;
        setup.master_seed = config.seed;
        setup.threads = config.benchmark_threads;
        auto model = config.make_model(args.coefficients);
        BenchmarkResult result = run_benchmark(model, setup);
        LocalFrame frame(setup.task_config.region.center());
        write_benchmark_outputs(result, frame, config.output_dir);
        for (const MethodRun& run : result.runs) {
            if (run.skipped) {
                std::cout << run.method << ": skipped (" << run.skip_reason << ")\n";
            } else {
                std::cout << run.method << ": SR=" << csv::format_double(run.report.sr)
                          << " SPL=" << csv::format_double(run.report.spl) << "\n";
            }
        }
        std::cout << "outputs in " << config.output_dir.string() << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        return runtime_fail(e);
    }
}

int cmd_replay(const ReplayArgs& args) {
    if (args.dir.empty()) {
        std::cerr << "usage error: --dir is required\n";
        return kExitUsage;
    }
    try {
        std::vector<std::string> methods;
        if (!args.method.empty()) {
            methods.push_back(args.method);
        } else {
            methods = replay_methods(args.dir);
            if (methods.empty()) throw std::runtime_error("no traces found under " + args.dir);
        }
        std::ofstream out(fs::path(args.dir) / "replay_metrics.csv", std::ios::binary);
        out << "method,SR,TL_m,SPL,TNT_steps,NE_m\n";
        for (const std::string& m : methods) {
            MetricsReport r = replay_metrics(args.dir, m);
            std::cout << m << ": SR=" << csv::format_double(r.sr)
                      << " TL=" << csv::format_double(r.tl_m)
                      << " SPL=" << csv::format_double(r.spl)
                      << " TNT=" << csv::format_double(r.tnt_steps)
                      << " NE=" << csv::format_double(r.ne_m) << "\n";
            out << m << ',' << csv::format_double(r.sr) << ',' << csv::format_double(r.tl_m)
                << ',' << csv::format_double(r.spl) << ',' << csv::format_double(r.tnt_steps)
                << ',' << csv::format_double(r.ne_m) << "\n";
        }
        return kExitOk;
    } catch (const std::exception& e) {
        return runtime_fail(e);
    }
}

}  // namespace geonav::cli
