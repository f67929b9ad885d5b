#pragma once

#include <array>
#include <memory>
#include <optional>
#include <random>
#include <utility>

#include "geonav/field_model.hpp"
#include "geonav/geodesy.hpp"
#include "geonav/trace.hpp"

namespace geonav {

struct VehiclePose {
    double x_m = 0.0;      // east of the region anchor
    double y_m = 0.0;      // north of the region anchor
    double theta_rad = 0.0;  // accumulated heading, measured from east
    int step_index = 0;
};

struct NavAction {
    double distance_m = 0.0;  // in [0, l_max]
    double yaw_rad = 0.0;     // in [-pi/2, pi/2]

    static constexpr double kYawBound = kPi / 2.0;
    static NavAction clamped(double distance_m, double yaw_rad, double l_max);
};

/// Heading update then translation: theta' = theta + yaw, position advances by
/// distance along theta'.
VehiclePose motion_update(const VehiclePose& pose, const NavAction& action);

/// The 8-component state the agent observes: current and target navigation
/// elements plus the previously executed action.
struct NavState {
    ElementsTriple current;
    ElementsTriple target;
    double last_distance_m = 0.0;
    double last_yaw_rad = 0.0;

    std::array<double, 8> as_vector() const;
};

/// Min-max normalization bounds for NavState components. Element bounds come
/// from a region scan; action bounds from the environment configuration.
struct StateBounds {
    ElementsTriple lo;
    ElementsTriple hi;
    double l_max_m = 0.0;

    std::array<double, 8> normalize(const NavState& s) const;
    NavState denormalize(const std::array<double, 8>& v) const;
};

struct RewardConfig {
    double zeta1 = 200.0;  // destination reward
    double zeta2 = 10.0;   // proximity weight
    double zeta3 = 3.0;    // alignment weight
    bool decay_enabled = true;
    /// Objective threshold for success. 0 means: derive per task so the
    /// success region is roughly a success_radius_m circle around the target.
    double success_threshold = 0.0;
    double success_radius_m = 10000.0;
    int n_max = 50;

    void validate() const;
};

/// Normalized objective: sum over the three navigation parameters of
/// (target - current)^2 / (target - initial)^2. Denominators smaller than
/// kDenominatorFloor are floored and flagged.
struct ObjectiveResult {
    double value = 0.0;
    bool denominator_floored = false;
};
inline constexpr double kDenominatorFloor = 1e-12;
ObjectiveResult objective(const ElementsTriple& current, const ElementsTriple& target,
                          const ElementsTriple& initial);

/// Theoretical heading from the parallel-approach construction over two
/// elements with known gradients.
enum class HeadingStatus { kOk, kDegenerateTarget, kParallelGradients };
struct HeadingResult {
    double angle_rad = 0.0;
    HeadingStatus status = HeadingStatus::kOk;
};
inline constexpr double kParallelEpsilon = 1e-18;
HeadingResult theoretical_heading(double b1_current, double b1_target, GradientVector g1,
                                  double b2_current, double b2_target, GradientVector g2);

/// Composite per-step reward: destination bonus, proximity shaping on the
/// objective delta (with late-episode regression decay), heading alignment.
double compute_reward(double prev_objective, double cur_objective, double heading_rad,
                      double theoretical_heading_rad, int step_index,
                      const RewardConfig& config, bool reached);

struct EnvConfig {
    Region region;
    double epoch = 2020.0;  // used for the state-bounds scan
    double l_max_m = 50000.0;
    double gradient_step_m = 1000.0;
    std::pair<FieldParam, FieldParam> heading_pair = {FieldParam::kInclination,
                                                      FieldParam::kHorizontalIntensity};
    RewardConfig reward;
    int bounds_scan_points = 16;  // per axis
    double bounds_margin = 0.1;
    /// Gaussian sensor-noise sigmas applied to the observed current elements
    /// (state only; objective and termination use true values). All zero by
    /// default; draws are seeded from the task seed.
    ElementsTriple observation_noise_sigma{0.0, 0.0, 0.0};

    void validate() const;
};

struct StepInfo {
    VehiclePose pose;
    GeoPosition position;
    double objective = 0.0;
    double lambda_prime_rad = 0.0;  // theoretical heading at the new position
    double distance_to_target_m = 0.0;
    bool success = false;
    bool timeout = false;
    bool out_of_region = false;
};

struct StepResult {
    NavState state;
    double reward = 0.0;
    bool done = false;
    StepInfo info;
};

/// The navigation MDP over a geomagnetic model. One instance runs one episode
/// at a time; instances over a shared immutable model may run in parallel.
class NavEnv {
public:
    NavEnv(std::shared_ptr<const GeomagneticModel> model, EnvConfig config);

    NavState reset(const TaskSpec& task);
    StepResult step(const NavAction& action);

    /// Objective value at the hypothetical next position (no state change);
    /// +infinity outside the region. Fitness hook for the search baselines.
    double probe_objective(const NavAction& action) const;

    bool episode_active() const { return active_; }
    const EpisodeTrace& trace() const { return trace_; }
    EpisodeTrace& mutable_trace() { return trace_; }
    const StateBounds& bounds() const { return bounds_; }
    const EnvConfig& config() const { return config_; }
    const LocalFrame& frame() const { return frame_; }
    double success_threshold() const { return success_threshold_; }
    const GeomagneticModel& model() const { return *model_; }

private:
    NavState current_state() const;
    double lambda_prime_at(const GeoPosition& pos, double fallback,
                           HeadingStatus* status = nullptr) const;
    ElementsTriple observe(const ElementsTriple& truth);

    std::shared_ptr<const GeomagneticModel> model_;
    EnvConfig config_;
    LocalFrame frame_;
    StateBounds bounds_;

    bool active_ = false;
    TaskSpec task_;
    VehiclePose pose_;
    ElementsTriple initial_, target_, current_, observed_;
    LocalXY target_xy_;
    std::mt19937_64 noise_rng_;
    double prev_objective_ = 0.0;
    double lambda_prime_ = 0.0;  // at the current position
    double success_threshold_ = 0.0;
    NavAction last_action_;
    EpisodeTrace trace_;
};

}  // namespace geonav
