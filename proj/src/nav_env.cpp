#include "geonav/nav_env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace geonav {

namespace {
std::uint64_t splitmix_for_observation(std::uint64_t x) {
    x ^= 0x6f62736e6f697365ull;
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}
}  // namespace

NavAction NavAction::clamped(double distance_m, double yaw_rad, double l_max) {
    NavAction a;
    a.distance_m = std::clamp(distance_m, 0.0, l_max);
    a.yaw_rad = std::clamp(yaw_rad, -kYawBound, kYawBound);
    return a;
}

VehiclePose motion_update(const VehiclePose& pose, const NavAction& action) {
    VehiclePose next;
    next.theta_rad = pose.theta_rad + action.yaw_rad;
    next.x_m = pose.x_m + action.distance_m * std::cos(next.theta_rad);
    next.y_m = pose.y_m + action.distance_m * std::sin(next.theta_rad);
    next.step_index = pose.step_index + 1;
    return next;
}

std::array<double, 8> NavState::as_vector() const {
    return {current.d, current.i, current.b_h, target.d, target.i, target.b_h,
            last_distance_m, last_yaw_rad};
}

namespace {
double norm_component(double v, double lo, double hi) {
    double span = hi - lo;
    if (!(span > 0.0)) throw std::logic_error("state bounds have empty span");
    return (v - lo) / span;
}
}  // namespace

std::array<double, 8> StateBounds::normalize(const NavState& s) const {
    return {norm_component(s.current.d, lo.d, hi.d),
            norm_component(s.current.i, lo.i, hi.i),
            norm_component(s.current.b_h, lo.b_h, hi.b_h),
            norm_component(s.target.d, lo.d, hi.d),
            norm_component(s.target.i, lo.i, hi.i),
            norm_component(s.target.b_h, lo.b_h, hi.b_h),
            norm_component(s.last_distance_m, 0.0, l_max_m),
            norm_component(s.last_yaw_rad, -NavAction::kYawBound, NavAction::kYawBound)};
}

NavState StateBounds::denormalize(const std::array<double, 8>& v) const {
    NavState s;
    s.current.d = lo.d + v[0] * (hi.d - lo.d);
    s.current.i = lo.i + v[1] * (hi.i - lo.i);
    s.current.b_h = lo.b_h + v[2] * (hi.b_h - lo.b_h);
    s.target.d = lo.d + v[3] * (hi.d - lo.d);
    s.target.i = lo.i + v[4] * (hi.i - lo.i);
    s.target.b_h = lo.b_h + v[5] * (hi.b_h - lo.b_h);
    s.last_distance_m = v[6] * l_max_m;
    s.last_yaw_rad = -NavAction::kYawBound + v[7] * 2.0 * NavAction::kYawBound;
    return s;
}

void RewardConfig::validate() const {
    // zeta3 == 0 is the plain (no alignment reward) ablation
    if (!(zeta1 > zeta2 && zeta2 > zeta3 && zeta3 >= 0.0)) {
        throw std::invalid_argument("reward weights must satisfy zeta1 > zeta2 > zeta3 >= 0");
    }
    if (success_threshold < 0.0) {
        throw std::invalid_argument("success_threshold must be >= 0 (0 = per-task)");
    }
    if (success_threshold == 0.0 && !(success_radius_m > 0.0)) {
        throw std::invalid_argument("success_radius_m must be positive");
    }
    if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
}

void EnvConfig::validate() const {
    region.validate();
    reward.validate();
    if (!(l_max_m > 0.0)) throw std::invalid_argument("l_max_m must be positive");
    if (!(gradient_step_m > 0.0)) throw std::invalid_argument("gradient_step_m must be positive");
    if (heading_pair.first == heading_pair.second) {
        throw std::invalid_argument("heading pair must use two distinct elements");
    }
    if (bounds_scan_points < 2) throw std::invalid_argument("bounds_scan_points must be >= 2");
    if (observation_noise_sigma.d < 0.0 || observation_noise_sigma.i < 0.0 ||
        observation_noise_sigma.b_h < 0.0) {
        throw std::invalid_argument("observation noise sigmas must be >= 0");
    }
}

ObjectiveResult objective(const ElementsTriple& current, const ElementsTriple& target,
                          const ElementsTriple& initial) {
    ObjectiveResult res;
    for (FieldParam p : {FieldParam::kDeclination, FieldParam::kInclination,
                         FieldParam::kHorizontalIntensity}) {
        double num = target.of(p) - current.of(p);
        double den = target.of(p) - initial.of(p);
        double den2 = den * den;
        if (den2 < kDenominatorFloor) {
            den2 = kDenominatorFloor;
            res.denominator_floored = true;
        }
        res.value += num * num / den2;
    }
    if (!std::isfinite(res.value)) throw FieldError("objective is not finite");
    return res;
}

HeadingResult theoretical_heading(double b1_current, double b1_target, GradientVector g1,
                                  double b2_current, double b2_target, GradientVector g2) {
    double e1 = b1_current - b1_target;
    double e2 = b2_current - b2_target;
    double det = g1.gx * g2.gy - g1.gy * g2.gx;
    if (std::abs(det) < kParallelEpsilon) {
        return HeadingResult{0.0, HeadingStatus::kParallelGradients};
    }
    // Solving g1.u = -e1, g2.u = -e2 for the movement direction u gives
    // u = ((e2 g1y - e1 g2y)/det, (e1 g2x - e2 g1x)/det); the determinant's
    // sign matters, otherwise the heading flips by pi for left-handed
    // gradient pairs.
    double sign = det > 0.0 ? 1.0 : -1.0;
    double sin_arg = (e1 * g2.gx - e2 * g1.gx) * sign;
    double cos_arg = (e2 * g1.gy - e1 * g2.gy) * sign;
    if (sin_arg == 0.0 && cos_arg == 0.0) {
        return HeadingResult{0.0, HeadingStatus::kDegenerateTarget};
    }
    return HeadingResult{std::atan2(sin_arg, cos_arg), HeadingStatus::kOk};
}

double compute_reward(double prev_objective, double cur_objective, double heading_rad,
                      double theoretical_heading_rad, int step_index,
                      const RewardConfig& config, bool reached) {
    double r_dest = reached ? config.zeta1 : 0.0;
    double delta = cur_objective - prev_objective;
    double r_prox = -config.zeta2 * delta;
    if (config.decay_enabled && step_index > config.n_max / 2.0 && delta > 0.0) {
        r_prox += -config.zeta2 * delta * (static_cast<double>(step_index) / config.n_max);
    }
    double r_align = config.zeta3 *
                     (kPi / 4.0 - angular_distance(heading_rad, theoretical_heading_rad));
    return r_dest + r_prox + r_align;
}

NavEnv::NavEnv(std::shared_ptr<const GeomagneticModel> model, EnvConfig config)
    : model_(std::move(model)), config_(std::move(config)) {
    if (!model_) throw std::invalid_argument("environment needs a field model");
    config_.validate();
    frame_ = LocalFrame(config_.region.center());

    // State bounds from a coarse region scan, padded by the configured margin.
    auto samples = sample_grid(*model_, config_.region, config_.bounds_scan_points,
                               config_.bounds_scan_points, config_.epoch);
    ElementsTriple lo{std::numeric_limits<double>::infinity(),
                      std::numeric_limits<double>::infinity(),
                      std::numeric_limits<double>::infinity()};
    ElementsTriple hi{-std::numeric_limits<double>::infinity(),
                      -std::numeric_limits<double>::infinity(),
                      -std::numeric_limits<double>::infinity()};
    for (const GridSample& s : samples) {
        ElementsTriple t = triple_from_elements(s.elements);
        lo.d = std::min(lo.d, t.d);
        lo.i = std::min(lo.i, t.i);
        lo.b_h = std::min(lo.b_h, t.b_h);
        hi.d = std::max(hi.d, t.d);
        hi.i = std::max(hi.i, t.i);
        hi.b_h = std::max(hi.b_h, t.b_h);
    }
    auto pad = [&](double& a, double& b) {
        double span = b - a;
        if (span < 1e-12) span = std::max(std::abs(a) * 1e-3, 1.0);
        a -= config_.bounds_margin * span;
        b += config_.bounds_margin * span;
    };
    pad(lo.d, hi.d);
    pad(lo.i, hi.i);
    pad(lo.b_h, hi.b_h);
    bounds_ = StateBounds{lo, hi, config_.l_max_m};
}

double NavEnv::lambda_prime_at(const GeoPosition& pos, double fallback,
                               HeadingStatus* status_out) const {
    ElementGradients grads = element_gradients(*model_, frame_, pos, task_.epoch,
                                               config_.gradient_step_m);
    ElementsTriple here = triple_from_elements(model_->elements_at(pos, task_.epoch));
    FieldParam p1 = config_.heading_pair.first;
    FieldParam p2 = config_.heading_pair.second;
    HeadingResult res = theoretical_heading(here.of(p1), target_.of(p1), grads.of(p1),
                                            here.of(p2), target_.of(p2), grads.of(p2));
    if (status_out) *status_out = res.status;
    if (res.status == HeadingStatus::kParallelGradients) return fallback;
    return res.angle_rad;
}

ElementsTriple NavEnv::observe(const ElementsTriple& truth) {
    const ElementsTriple& s = config_.observation_noise_sigma;
    if (s.d == 0.0 && s.i == 0.0 && s.b_h == 0.0) return truth;
    std::normal_distribution<double> unit(0.0, 1.0);
    ElementsTriple noisy = truth;
    if (s.d > 0.0) noisy.d += s.d * unit(noise_rng_);
    if (s.i > 0.0) noisy.i += s.i * unit(noise_rng_);
    if (s.b_h > 0.0) noisy.b_h += s.b_h * unit(noise_rng_);
    return noisy;
}

NavState NavEnv::reset(const TaskSpec& task) {
    if (!config_.region.contains(task.origin) || !config_.region.contains(task.destination)) {
        throw std::invalid_argument("task origin/destination outside the region");
    }
    if (task.origin.latitude_deg == task.destination.latitude_deg &&
        task.origin.longitude_deg == task.destination.longitude_deg) {
        throw std::invalid_argument("task origin equals destination");
    }
    task_ = task;
    noise_rng_.seed(splitmix_for_observation(task.seed));
    target_ = triple_from_elements(model_->elements_at(task.destination, task.epoch));
    initial_ = triple_from_elements(model_->elements_at(task.origin, task.epoch));
    current_ = initial_;
    observed_ = observe(current_);
    target_xy_ = frame_.to_local(task.destination);

    // Success threshold: fixed when configured, otherwise matched to a
    // success_radius_m circle via the gradient magnitudes at the target.
    if (config_.reward.success_threshold > 0.0) {
        success_threshold_ = config_.reward.success_threshold;
    } else {
        ElementGradients g = element_gradients(*model_, frame_, task.destination, task.epoch,
                                               config_.gradient_step_m);
        double sum = 0.0;
        for (FieldParam p : {FieldParam::kDeclination, FieldParam::kInclination,
                             FieldParam::kHorizontalIntensity}) {
            double den = target_.of(p) - initial_.of(p);
            double den2 = std::max(den * den, kDenominatorFloor);
            const GradientVector& gv = g.of(p);
            sum += (gv.gx * gv.gx + gv.gy * gv.gy) / den2;
        }
        double r = config_.reward.success_radius_m;
        success_threshold_ = r * r * sum;
        if (!(success_threshold_ > 0.0) || !std::isfinite(success_threshold_)) {
            success_threshold_ = 1e-2;
        }
    }

    LocalXY origin_xy = frame_.to_local(task.origin);
    // Initial heading points along the theoretical heading so the first yaw
    // (bounded by +-pi/2) can reach any sensible direction.
    lambda_prime_ = lambda_prime_at(task.origin, 0.0);
    pose_ = VehiclePose{origin_xy.x, origin_xy.y, lambda_prime_, 0};
    last_action_ = NavAction{};

    ObjectiveResult f0 = objective(current_, target_, initial_);
    prev_objective_ = f0.value;

    trace_ = EpisodeTrace{};
    trace_.task = task_;
    trace_.success_threshold = success_threshold_;
    trace_.denominator_floored = f0.denominator_floored;
    TraceRow row;
    row.step = 0;
    row.lat_deg = task.origin.latitude_deg;
    row.lon_deg = task.origin.longitude_deg;
    row.x_m = pose_.x_m;
    row.y_m = pose_.y_m;
    row.theta_rad = pose_.theta_rad;
    row.objective = f0.value;
    row.lambda_prime_rad = lambda_prime_;
    trace_.rows.push_back(row);

    active_ = true;
    return current_state();
}

NavState NavEnv::current_state() const {
    NavState s;
    s.current = observed_;
    s.target = target_;
    s.last_distance_m = last_action_.distance_m;
    s.last_yaw_rad = last_action_.yaw_rad;
    return s;
}

StepResult NavEnv::step(const NavAction& action) {
    if (!active_) throw std::logic_error("step() called on a finished episode");
    NavAction a = NavAction::clamped(action.distance_m, action.yaw_rad, config_.l_max_m);

    VehiclePose next = motion_update(pose_, a);
    GeoPosition geo = frame_.to_geo(next.x_m, next.y_m);
    bool out_of_region = !config_.region.contains(geo);

    ElementsTriple here = triple_from_elements(model_->elements_at(geo, task_.epoch));
    ObjectiveResult obj = objective(here, target_, initial_);
    trace_.denominator_floored = trace_.denominator_floored || obj.denominator_floored;

    bool success = obj.value < success_threshold_ && !out_of_region;
    bool timeout = next.step_index >= config_.reward.n_max;
    bool done = success || timeout || out_of_region;

    // Reward compares the executed heading against the theoretical heading
    // computed where the action was decided (the previous position).
    double reward = compute_reward(prev_objective_, obj.value, next.theta_rad, lambda_prime_,
                                   next.step_index, config_.reward, success);

    double lambda_next = lambda_prime_at(geo, lambda_prime_);

    pose_ = next;
    current_ = here;
    observed_ = observe(here);
    prev_objective_ = obj.value;
    lambda_prime_ = lambda_next;
    last_action_ = a;
    active_ = !done;

    StepInfo info;
    info.pose = next;
    info.position = geo;
    info.objective = obj.value;
    info.lambda_prime_rad = lambda_next;
    info.distance_to_target_m = std::hypot(next.x_m - target_xy_.x, next.y_m - target_xy_.y);
    info.success = success;
    info.timeout = timeout && !success;
    info.out_of_region = out_of_region;

    TraceRow row;
    row.step = next.step_index;
    row.lat_deg = geo.latitude_deg;
    row.lon_deg = geo.longitude_deg;
    row.x_m = next.x_m;
    row.y_m = next.y_m;
    row.theta_rad = next.theta_rad;
    row.distance_m = a.distance_m;
    row.yaw_rad = a.yaw_rad;
    row.objective = obj.value;
    row.reward = reward;
    row.lambda_prime_rad = lambda_next;
    row.done = done;
    row.success = success;
    trace_.rows.push_back(row);

    return StepResult{current_state(), reward, done, info};
}

double NavEnv::probe_objective(const NavAction& action) const {
    if (!active_) throw std::logic_error("probe_objective() on a finished episode");
    NavAction a = NavAction::clamped(action.distance_m, action.yaw_rad, config_.l_max_m);
    VehiclePose next = motion_update(pose_, a);
    GeoPosition geo = frame_.to_geo(next.x_m, next.y_m);
    if (!config_.region.contains(geo)) return std::numeric_limits<double>::infinity();
    ElementsTriple here = triple_from_elements(model_->elements_at(geo, task_.epoch));
    return objective(here, target_, initial_).value;
}

}  // namespace geonav
