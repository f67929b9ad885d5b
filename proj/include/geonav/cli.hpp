#pragma once

#include <string>

#include "geonav/config.hpp"

namespace geonav::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

struct FieldArgs {
    double lat = 0.0;
    double lon = 0.0;
    double epoch = 2020.0;
    std::string coefficients;  // empty: env var / default path
};
int cmd_field(const FieldArgs& args);

struct GridArgs {
    double lat_min = -10.0, lat_max = 0.0, lon_min = 160.0, lon_max = 170.0;
    int resolution = 11;
    double epoch = 2020.0;
    std::string coefficients;
    std::string out_path = "grid.csv";
};
int cmd_grid(const GridArgs& args);

struct TrainArgs {
    std::string config_path;
    std::string coefficients;
    std::string output_dir;       // overrides config when non-empty
    std::string resume_checkpoint;
    long long seed = -1;          // overrides config when >= 0
    long long episodes = -1;
    double zeta3 = -1.0;          // 0 disables the alignment reward (plain run)
};
int cmd_train(const TrainArgs& args);

struct BenchmarkArgs {
    std::string config_path;
    std::string coefficients;
    std::string output_dir;
    std::string methods;  // comma-separated override, e.g. "ga,pso,afsa"
    long long seed = -1;
    int threads = 0;      // 0: from config
};
int cmd_benchmark(const BenchmarkArgs& args);

struct ReplayArgs {
    std::string dir;      // benchmark output directory
    std::string method;   // empty: all methods found
};
int cmd_replay(const ReplayArgs& args);

}  // namespace geonav::cli
