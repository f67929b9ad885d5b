#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "geonav/baselines.hpp"
#include "geonav/nav_env.hpp"
#include "geonav/td3.hpp"
#include "geonav/trace.hpp"

namespace geonav {

struct TaskGenConfig {
    Region region;
    int count = 100;
    double min_separation_m = 300000.0;
    double max_separation_m = 500000.0;
    double epoch = 2020.0;
};

/// Deterministic task list: origins/destinations uniform over the region,
/// rejection-sampled to the separation band.
std::vector<TaskSpec> generate_tasks(const TaskGenConfig& config, std::uint64_t seed);

struct TaskMetrics {
    int task_id = 0;
    bool success = false;
    int steps = 0;
    double straight_distance_m = 0.0;
    double path_length_m = 0.0;
    double spl = 0.0;                 // success * d / max(p, d)
    double smoothness_deg = 0.0;      // mean interior angle; NaN if < 2 segments
    double mae_heading_rad = 0.0;     // vs bearing to target; NaN if no eligible step
    double rmse_heading_rad = 0.0;
    double mae_alignment_rad = 0.0;   // supplementary: vs per-row theoretical heading
    double final_error_m = 0.0;
};

/// Aggregates over one method's benchmark run. Success-conditioned means (TL,
/// TNT, smoothness, MAE/RMSE) are NaN when no episode succeeded; SR, SPL, and
/// NE are always defined.
struct MetricsReport {
    double sr = 0.0;
    double tl_m = 0.0;        // mean path length, successful episodes
    double tl_all_m = 0.0;    // mean path length, all episodes
    double spl = 0.0;
    double tnt_steps = 0.0;   // mean step count, successful episodes
    double smoothness_deg = 0.0;
    double mae_heading_rad = 0.0;
    double rmse_heading_rad = 0.0;
    double ne_m = 0.0;        // mean final distance, all episodes
    std::vector<TaskMetrics> per_task;
};

/// Pure function of traces and per-task target positions (frame meters).
MetricsReport compute_metrics(const std::vector<EpisodeTrace>& traces,
                              const std::vector<LocalXY>& targets);

struct BenchmarkSetup {
    std::vector<std::string> methods;  // subset of {"ggtd3","td3","ga","pso","afsa"}
    TaskGenConfig task_config;
    EnvConfig env_config;
    BaselineConfigs baselines;
    TD3Config td3_config;
    /// Checkpoint path per DRL method name; methods without one are skipped.
    std::map<std::string, std::filesystem::path> checkpoints;
    std::uint64_t master_seed = 1;
    std::uint64_t task_seed = 0;  // 0: derived from master_seed
    int threads = 1;
    bool keep_traces = true;
};

struct MethodRun {
    std::string method;
    MetricsReport report;
    std::vector<EpisodeTrace> traces;
    bool skipped = false;
    std::string skip_reason;
};

struct BenchmarkResult {
    std::vector<TaskSpec> tasks;
    std::vector<LocalXY> targets;
    std::vector<MethodRun> runs;
};

/// Runs every requested method on every task with per-task derived seeds.
/// Task order and seeds are independent of thread count.
BenchmarkResult run_benchmark(std::shared_ptr<const GeomagneticModel> model,
                              const BenchmarkSetup& setup);

/// Writes comparison.csv, per-metric distribution files, tasks.csv, and (when
/// present) per-task traces under out_dir.
void write_benchmark_outputs(const BenchmarkResult& result, const LocalFrame& frame,
                             const std::filesystem::path& out_dir);

/// Re-reads tasks.csv + traces written by write_benchmark_outputs and
/// recomputes the metrics for one method.
MetricsReport replay_metrics(const std::filesystem::path& out_dir, const std::string& method);

/// Methods found with traces in a benchmark output directory.
std::vector<std::string> replay_methods(const std::filesystem::path& out_dir);

}  // namespace geonav
