#include "geonav/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>
#include <sstream>

#include "geonav/checkpoint.hpp"
#include "geonav/csv.hpp"

namespace geonav {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
}

std::vector<TaskSpec> generate_tasks(const TaskGenConfig& config, std::uint64_t seed) {
    config.region.validate();
    if (config.count < 0) throw std::invalid_argument("task count must be >= 0");
    if (!(config.max_separation_m > config.min_separation_m) || !(config.min_separation_m > 0.0)) {
        throw std::invalid_argument("need max_separation > min_separation > 0");
    }
    LocalFrame frame(config.region.center());
    TaskSampler sampler;
    sampler.region = config.region;
    sampler.min_separation_m = config.min_separation_m;
    sampler.max_separation_m = config.max_separation_m;
    sampler.epoch = config.epoch;
    std::mt19937_64 rng(seed);
    std::vector<TaskSpec> tasks;
    tasks.reserve(config.count);
    for (int k = 0; k < config.count; ++k) tasks.push_back(sampler.sample(frame, rng));
    return tasks;
}

namespace {

TaskMetrics metrics_for_trace(int task_id, const EpisodeTrace& trace, const LocalXY& target) {
    if (trace.rows.empty()) throw std::invalid_argument("trace has no rows");
    TaskMetrics m;
    m.task_id = task_id;
    m.success = trace.success();
    m.steps = trace.steps();
    m.path_length_m = trace.path_length_m();
    const TraceRow& start = trace.rows.front();
    m.straight_distance_m = std::hypot(target.x - start.x_m, target.y - start.y_m);
    LocalXY fin = trace.final_position();
    m.final_error_m = std::hypot(target.x - fin.x, target.y - fin.y);
    m.spl = m.success
                ? m.straight_distance_m / std::max(m.path_length_m, m.straight_distance_m)
                : 0.0;

    // smoothness: mean interior angle over consecutive executed segments
    double angle_sum = 0.0;
    int angle_count = 0;
    for (std::size_t j = 2; j < trace.rows.size(); ++j) {
        double turn = angular_distance(trace.rows[j].theta_rad, trace.rows[j - 1].theta_rad);
        angle_sum += 180.0 - turn * kRadToDeg;
        ++angle_count;
    }
    m.smoothness_deg = angle_count > 0 ? angle_sum / angle_count : kNan;

    // heading deviation vs bearing to target, steps after the first
    double abs_sum = 0.0, sq_sum = 0.0, align_sum = 0.0;
    int dev_count = 0;
    for (std::size_t j = 2; j < trace.rows.size(); ++j) {
        const TraceRow& prev = trace.rows[j - 1];
        double bearing = std::atan2(target.y - prev.y_m, target.x - prev.x_m);
        double dev = angular_distance(trace.rows[j].theta_rad, bearing);
        abs_sum += dev;
        sq_sum += dev * dev;
        align_sum += angular_distance(trace.rows[j].theta_rad, prev.lambda_prime_rad);
        ++dev_count;
    }
    if (dev_count > 0) {
        m.mae_heading_rad = abs_sum / dev_count;
        m.rmse_heading_rad = std::sqrt(sq_sum / dev_count);
        m.mae_alignment_rad = align_sum / dev_count;
    } else {
        m.mae_heading_rad = kNan;
        m.rmse_heading_rad = kNan;
        m.mae_alignment_rad = kNan;
    }
    return m;
}

double mean_over(const std::vector<TaskMetrics>& rows, bool successful_only,
                 double (*get)(const TaskMetrics&)) {
    double sum = 0.0;
    int count = 0;
    for (const TaskMetrics& r : rows) {
        if (successful_only && !r.success) continue;
        double v = get(r);
        if (std::isnan(v)) continue;
        sum += v;
        ++count;
    }
    return count > 0 ? sum / count : kNan;
}

}  // namespace

MetricsReport compute_metrics(const std::vector<EpisodeTrace>& traces,
                              const std::vector<LocalXY>& targets) {
    if (traces.empty()) throw std::invalid_argument("compute_metrics: no traces");
    if (traces.size() != targets.size()) {
        throw std::invalid_argument("compute_metrics: traces/targets misaligned");
    }
    MetricsReport report;
    report.per_task.reserve(traces.size());
    for (std::size_t k = 0; k < traces.size(); ++k) {
        report.per_task.push_back(metrics_for_trace(static_cast<int>(k), traces[k], targets[k]));
    }
    const auto& rows = report.per_task;
    int successes = 0;
    double spl_sum = 0.0, ne_sum = 0.0;
    for (const TaskMetrics& r : rows) {
        successes += r.success ? 1 : 0;
        spl_sum += r.spl;
        ne_sum += r.final_error_m;
    }
    report.sr = static_cast<double>(successes) / rows.size();
    report.spl = spl_sum / rows.size();
    report.ne_m = ne_sum / rows.size();
    report.tl_m = mean_over(rows, true, [](const TaskMetrics& r) { return r.path_length_m; });
    report.tl_all_m = mean_over(rows, false, [](const TaskMetrics& r) { return r.path_length_m; });
    report.tnt_steps =
        mean_over(rows, true, [](const TaskMetrics& r) { return static_cast<double>(r.steps); });
    report.smoothness_deg =
        mean_over(rows, true, [](const TaskMetrics& r) { return r.smoothness_deg; });
    report.mae_heading_rad =
        mean_over(rows, true, [](const TaskMetrics& r) { return r.mae_heading_rad; });
    report.rmse_heading_rad =
        mean_over(rows, true, [](const TaskMetrics& r) { return r.rmse_heading_rad; });
    return report;
}

namespace {

bool is_drl_method(const std::string& m) { return m == "ggtd3" || m == "td3"; }

EpisodeTrace run_one_task(const std::string& method,
                          std::shared_ptr<const GeomagneticModel> model,
                          const BenchmarkSetup& setup, const TD3Agent* agent,
                          const TaskSpec& task, std::uint64_t task_seed) {
    NavEnv env(model, setup.env_config);
    if (is_drl_method(method)) {
        return run_policy_episode(env, *agent, task);
    }
    std::mt19937_64 rng(task_seed);
    return run_baseline_episode(baseline_from_name(method), task, env, setup.baselines, rng);
}

}  // namespace

BenchmarkResult run_benchmark(std::shared_ptr<const GeomagneticModel> model,
                              const BenchmarkSetup& setup) {
    BenchmarkResult result;
    std::uint64_t task_seed = setup.task_seed != 0
                                  ? setup.task_seed
                                  : derive_seed(setup.master_seed, "benchmark-tasks");
    result.tasks = generate_tasks(setup.task_config, task_seed);
    LocalFrame frame(setup.task_config.region.center());
    result.targets.reserve(result.tasks.size());
    for (const TaskSpec& t : result.tasks) result.targets.push_back(frame.to_local(t.destination));

    for (const std::string& method : setup.methods) {
        MethodRun run;
        run.method = method;
        std::unique_ptr<TD3Agent> agent;
        if (is_drl_method(method)) {
            auto it = setup.checkpoints.find(method);
            if (it == setup.checkpoints.end() || !std::filesystem::exists(it->second)) {
                run.skipped = true;
                run.skip_reason = "missing checkpoint";
                std::cerr << "warning: skipping " << method << " (missing checkpoint)\n";
                result.runs.push_back(std::move(run));
                continue;
            }
            NavEnv probe_env(model, setup.env_config);
            agent = std::make_unique<TD3Agent>(setup.td3_config, probe_env.bounds(),
                                               derive_seed(setup.master_seed, method));
            agent->restore(Checkpoint::load(it->second));
        }

        const std::size_t n = result.tasks.size();
        std::vector<EpisodeTrace> traces(n);
        auto run_range = [&](std::size_t lo, std::size_t hi) {
            for (std::size_t k = lo; k < hi; ++k) {
                std::uint64_t seed =
                    derive_seed(setup.master_seed, method + ":" + std::to_string(k));
                traces[k] = run_one_task(method, model, setup, agent.get(), result.tasks[k], seed);
            }
        };
        int threads = std::max(1, setup.threads);
        if (threads == 1 || n < 2) {
            run_range(0, n);
        } else {
            // per-task seeds make the result independent of the partition
            std::size_t chunk = (n + threads - 1) / threads;
            std::vector<std::future<void>> futures;
            for (int t = 0; t < threads; ++t) {
                std::size_t lo = t * chunk;
                std::size_t hi = std::min(n, lo + chunk);
                if (lo >= hi) break;
                futures.push_back(std::async(std::launch::async, run_range, lo, hi));
            }
            for (auto& f : futures) f.get();
        }
        run.report = compute_metrics(traces, result.targets);
        if (setup.keep_traces) run.traces = std::move(traces);
        result.runs.push_back(std::move(run));
    }
    return result;
}

namespace {

void write_distribution(const std::filesystem::path& path,
                        const std::vector<MethodRun>& runs, bool successful_only,
                        double (*get)(const TaskMetrics&)) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "method,task_id,value\n";
    for (const MethodRun& run : runs) {
        if (run.skipped) continue;
        for (const TaskMetrics& r : run.report.per_task) {
            if (successful_only && !r.success) continue;
            double v = get(r);
            if (std::isnan(v)) continue;
            out << run.method << ',' << r.task_id << ',' << csv::format_double(v) << "\n";
        }
    }
}

// quartile by linear interpolation on the sorted sample
double quantile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
    double pos = q * (sorted.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    double frac = pos - lo;
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

void append_boxplot_rows(std::ofstream& out, const MethodRun& run, const char* metric,
                         bool successful_only, double (*get)(const TaskMetrics&)) {
    std::vector<double> values;
    for (const TaskMetrics& r : run.report.per_task) {
        if (successful_only && !r.success) continue;
        double v = get(r);
        if (!std::isnan(v)) values.push_back(v);
    }
    if (values.empty()) return;
    std::sort(values.begin(), values.end());
    double q1 = quantile(values, 0.25);
    double q2 = quantile(values, 0.5);
    double q3 = quantile(values, 0.75);
    double iqr = q3 - q1;
    double lo_fence = q1 - 1.5 * iqr;
    double hi_fence = q3 + 1.5 * iqr;
    double whisker_lo = values.back(), whisker_hi = values.front();
    int outliers = 0;
    for (double v : values) {
        if (v < lo_fence || v > hi_fence) {
            ++outliers;
        } else {
            whisker_lo = std::min(whisker_lo, v);
            whisker_hi = std::max(whisker_hi, v);
        }
    }
    out << run.method << ',' << metric << ',' << values.size() << ','
        << csv::format_double(q1) << ',' << csv::format_double(q2) << ','
        << csv::format_double(q3) << ',' << csv::format_double(whisker_lo) << ','
        << csv::format_double(whisker_hi) << ',' << outliers << "\n";
}

}  // namespace

void write_benchmark_outputs(const BenchmarkResult& result, const LocalFrame& frame,
                             const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    {
        std::ofstream out(out_dir / "tasks.csv", std::ios::binary);
        if (!out) throw std::runtime_error("cannot write tasks.csv");
        out << "id,origin_lat,origin_lon,dest_lat,dest_lon,epoch,seed,"
               "origin_x_m,origin_y_m,dest_x_m,dest_y_m,separation_m\n";
        for (std::size_t k = 0; k < result.tasks.size(); ++k) {
            const TaskSpec& t = result.tasks[k];
            LocalXY o = frame.to_local(t.origin);
            LocalXY d = result.targets[k];
            out << k << ',' << csv::format_double(t.origin.latitude_deg) << ','
                << csv::format_double(t.origin.longitude_deg) << ','
                << csv::format_double(t.destination.latitude_deg) << ','
                << csv::format_double(t.destination.longitude_deg) << ','
                << csv::format_double(t.epoch) << ',' << t.seed << ','
                << csv::format_double(o.x) << ',' << csv::format_double(o.y) << ','
                << csv::format_double(d.x) << ',' << csv::format_double(d.y) << ','
                << csv::format_double(std::hypot(d.x - o.x, d.y - o.y)) << "\n";
        }
    }

    {
        std::ofstream out(out_dir / "comparison.csv", std::ios::binary);
        if (!out) throw std::runtime_error("cannot write comparison.csv");
        out << "method,SR,TL_m,SPL,TNT_steps\n";
        for (const MethodRun& run : result.runs) {
            if (run.skipped) continue;
            out << run.method << ',' << csv::format_double(run.report.sr) << ','
                << csv::format_double(run.report.tl_m) << ','
                << csv::format_double(run.report.spl) << ','
                << csv::format_double(run.report.tnt_steps) << "\n";
        }
    }

    {
        std::ofstream out(out_dir / "detailed_metrics.csv", std::ios::binary);
        if (!out) throw std::runtime_error("cannot write detailed_metrics.csv");
        out << "# TL/TNT/smoothness/MAE/RMSE are means over successful episodes;\n"
               "# NE and SPL are means over all episodes; TL_all_m includes failures.\n";
        out << "method,SR,TL_m,TL_all_m,SPL,TNT_steps,smoothness_deg,"
               "MAE_heading_rad,RMSE_heading_rad,MAE_alignment_rad,NE_m\n";
        for (const MethodRun& run : result.runs) {
            if (run.skipped) continue;
            const MetricsReport& r = run.report;
            double mae_align = mean_over(r.per_task, true, [](const TaskMetrics& t) {
                return t.mae_alignment_rad;
            });
            out << run.method << ',' << csv::format_double(r.sr) << ','
                << csv::format_double(r.tl_m) << ',' << csv::format_double(r.tl_all_m) << ','
                << csv::format_double(r.spl) << ',' << csv::format_double(r.tnt_steps) << ','
                << csv::format_double(r.smoothness_deg) << ','
                << csv::format_double(r.mae_heading_rad) << ','
                << csv::format_double(r.rmse_heading_rad) << ','
                << csv::format_double(mae_align) << ','
                << csv::format_double(r.ne_m) << "\n";
        }
    }

    write_distribution(out_dir / "dist_mae_heading.csv", result.runs, true,
                       [](const TaskMetrics& r) { return r.mae_heading_rad; });
    write_distribution(out_dir / "dist_rmse_heading.csv", result.runs, true,
                       [](const TaskMetrics& r) { return r.rmse_heading_rad; });
    write_distribution(out_dir / "dist_smoothness.csv", result.runs, true,
                       [](const TaskMetrics& r) { return r.smoothness_deg; });
    write_distribution(out_dir / "dist_ne.csv", result.runs, false,
                       [](const TaskMetrics& r) { return r.final_error_m; });
    write_distribution(out_dir / "dist_tl.csv", result.runs, true,
                       [](const TaskMetrics& r) { return r.path_length_m; });
    write_distribution(out_dir / "dist_tnt.csv", result.runs, true,
                       [](const TaskMetrics& r) { return static_cast<double>(r.steps); });
    write_distribution(out_dir / "dist_mae_alignment.csv", result.runs, true,
                       [](const TaskMetrics& r) { return r.mae_alignment_rad; });

    {
        std::ofstream out(out_dir / "boxplot_stats.csv", std::ios::binary);
        if (!out) throw std::runtime_error("cannot write boxplot_stats.csv");
        out << "method,metric,n,q1,median,q3,whisker_lo,whisker_hi,outliers\n";
        for (const MethodRun& run : result.runs) {
            if (run.skipped) continue;
            append_boxplot_rows(out, run, "mae_heading_rad", true,
                                [](const TaskMetrics& r) { return r.mae_heading_rad; });
            append_boxplot_rows(out, run, "rmse_heading_rad", true,
                                [](const TaskMetrics& r) { return r.rmse_heading_rad; });
            append_boxplot_rows(out, run, "smoothness_deg", true,
                                [](const TaskMetrics& r) { return r.smoothness_deg; });
            append_boxplot_rows(out, run, "ne_m", false,
                                [](const TaskMetrics& r) { return r.final_error_m; });
        }
    }

    for (const MethodRun& run : result.runs) {
        if (run.skipped || run.traces.empty()) continue;
        std::filesystem::path dir = out_dir / "traces" / run.method;
        fs::create_directories(dir);
        for (std::size_t k = 0; k < run.traces.size(); ++k) {
            char name[32];
            std::snprintf(name, sizeof(name), "task_%04zu.csv", k);
            run.traces[k].write_csv(dir / name);
        }
    }
}

namespace {

std::vector<LocalXY> read_targets(const std::filesystem::path& tasks_csv) {
    std::ifstream in(tasks_csv, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + tasks_csv.string());
    std::string line;
    std::getline(in, line);  // header
    std::vector<LocalXY> targets;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = csv::split_line(line);
        if (f.size() != 12) throw std::runtime_error("bad tasks.csv row: " + line);
        targets.push_back(LocalXY{csv::parse_double(f[9]), csv::parse_double(f[10])});
    }
    return targets;
}

}  // namespace

std::vector<std::string> replay_methods(const std::filesystem::path& out_dir) {
    std::vector<std::string> methods;
    std::filesystem::path traces = out_dir / "traces";
    if (!std::filesystem::is_directory(traces)) return methods;
    for (const auto& entry : std::filesystem::directory_iterator(traces)) {
        if (entry.is_directory()) methods.push_back(entry.path().filename().string());
    }
    std::sort(methods.begin(), methods.end());
    return methods;
}

MetricsReport replay_metrics(const std::filesystem::path& out_dir, const std::string& method) {
    std::vector<LocalXY> targets = read_targets(out_dir / "tasks.csv");
    std::vector<EpisodeTrace> traces;
    traces.reserve(targets.size());
    for (std::size_t k = 0; k < targets.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof(name), "task_%04zu.csv", k);
        traces.push_back(EpisodeTrace::read_csv(out_dir / "traces" / method / name));
    }
    return compute_metrics(traces, targets);
}

}  // namespace geonav
