#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "geonav/geodesy.hpp"

namespace geonav {

/// One navigation task: where to start, where the target element values are
/// taken from, and the seed that derived it.
struct TaskSpec {
    GeoPosition origin;
    GeoPosition destination;
    double epoch = 2020.0;
    std::uint64_t seed = 0;
};

struct TraceRow {
    int step = 0;
    double lat_deg = 0.0;
    double lon_deg = 0.0;
    double x_m = 0.0;
    double y_m = 0.0;
    double theta_rad = 0.0;
    double distance_m = 0.0;  // executed movement distance L
    double yaw_rad = 0.0;     // executed yaw psi
    double objective = 0.0;   // F after this step
    double reward = 0.0;
    double lambda_prime_rad = 0.0;  // theoretical heading at this row's position
    bool done = false;
    bool success = false;
};

/// Full record of one episode. Row 0 is the initial pose; each later row is
/// one executed step.
struct EpisodeTrace {
    TaskSpec task;
    double success_threshold = 0.0;  // objective threshold used for this task
    bool denominator_floored = false;
    std::vector<TraceRow> rows;
    /// Per executed step, per-iteration best fitness of the search that chose
    /// the action (metaheuristic episodes only).
    std::vector<std::vector<double>> search_histories;

    bool success() const { return !rows.empty() && rows.back().success; }
    int steps() const { return rows.empty() ? 0 : rows.back().step; }
    double path_length_m() const;
    LocalXY final_position() const;

    static constexpr const char* kCsvHeader =
        "step,lat,lon,x_m,y_m,theta_rad,L_m,psi_rad,F,reward,lambda_prime_rad,done,success";
    void write_csv(const std::filesystem::path& path) const;
    /// Reads rows back from the documented CSV (task metadata not recovered).
    static EpisodeTrace read_csv(const std::filesystem::path& path);
};

}  // namespace geonav
