#include "geonav/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "geonav/synthetic_field.hpp"

namespace geonav {

namespace {

using nlohmann::json;

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void parse_region(const json& j, Region& r) {
    maybe(j, "lat_min", r.lat_min_deg);
    maybe(j, "lat_max", r.lat_max_deg);
    maybe(j, "lon_min", r.lon_min_deg);
    maybe(j, "lon_max", r.lon_max_deg);
}

FieldParam param_from_token(const std::string& tok) {
    if (tok == "D" || tok == "d") return FieldParam::kDeclination;
    if (tok == "I" || tok == "i") return FieldParam::kInclination;
    if (tok == "BH" || tok == "bh" || tok == "B_H") return FieldParam::kHorizontalIntensity;
    throw std::invalid_argument("unknown element '" + tok + "' (use D, I, or BH)");
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
    json j = json::parse(text);
    RunConfig c;
    maybe(j, "seed", c.seed);
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("coefficients")) c.coefficients = j.at("coefficients").get<std::string>();
    maybe(j, "epoch", c.epoch);
    if (j.contains("region")) parse_region(j.at("region"), c.region);

    if (j.contains("field")) {
        const json& f = j.at("field");
        maybe(f, "type", c.field.type);
        maybe(f, "base_d_deg", c.field.base_d_deg);
        maybe(f, "base_i_deg", c.field.base_i_deg);
        maybe(f, "base_bh_nt", c.field.base_bh_nt);
        maybe(f, "d_slope_deg_per_km_x", c.field.d_slope_deg_per_km_x);
        maybe(f, "d_slope_deg_per_km_y", c.field.d_slope_deg_per_km_y);
        maybe(f, "i_slope_deg_per_km_x", c.field.i_slope_deg_per_km_x);
        maybe(f, "i_slope_deg_per_km_y", c.field.i_slope_deg_per_km_y);
        maybe(f, "bh_slope_nt_per_km_x", c.field.bh_slope_nt_per_km_x);
        maybe(f, "bh_slope_nt_per_km_y", c.field.bh_slope_nt_per_km_y);
        maybe(f, "g10_nt", c.field.g10_nt);
    }

    if (j.contains("env")) {
        const json& e = j.at("env");
        maybe(e, "l_max_m", c.env.l_max_m);
        maybe(e, "gradient_step_m", c.env.gradient_step_m);
        maybe(e, "bounds_scan_points", c.env.bounds_scan_points);
        maybe(e, "bounds_margin", c.env.bounds_margin);
        maybe(e, "observation_noise_d_rad", c.env.observation_noise_sigma.d);
        maybe(e, "observation_noise_i_rad", c.env.observation_noise_sigma.i);
        maybe(e, "observation_noise_bh_nt", c.env.observation_noise_sigma.b_h);
        if (e.contains("heading_pair")) {
            std::string pair = e.at("heading_pair").get<std::string>();
            auto comma = pair.find(',');
            if (comma == std::string::npos) {
                throw std::invalid_argument("heading_pair must be '<elem>,<elem>'");
            }
            c.env.heading_pair = {param_from_token(pair.substr(0, comma)),
                                  param_from_token(pair.substr(comma + 1))};
        }
    }

    if (j.contains("reward")) {
        const json& r = j.at("reward");
        maybe(r, "zeta1", c.env.reward.zeta1);
        maybe(r, "zeta2", c.env.reward.zeta2);
        maybe(r, "zeta3", c.env.reward.zeta3);
        maybe(r, "decay_enabled", c.env.reward.decay_enabled);
        maybe(r, "success_threshold", c.env.reward.success_threshold);
        maybe(r, "success_radius_m", c.env.reward.success_radius_m);
        maybe(r, "n_max", c.env.reward.n_max);
    }

    if (j.contains("td3")) {
        const json& t = j.at("td3");
        maybe(t, "gamma", c.td3.gamma);
        maybe(t, "tau", c.td3.tau);
        maybe(t, "policy_delay", c.td3.policy_delay);
        maybe(t, "batch_size", c.td3.batch_size);
        maybe(t, "exploration_noise", c.td3.exploration_noise);
        maybe(t, "policy_noise", c.td3.policy_noise);
        maybe(t, "noise_clip", c.td3.noise_clip);
        maybe(t, "actor_lr", c.td3.actor_lr);
        maybe(t, "critic_lr", c.td3.critic_lr);
        maybe(t, "hidden", c.td3.hidden_dims);
        maybe(t, "episodes", c.episodes);
        maybe(t, "warmup_steps", c.td3.warmup_steps);
        maybe(t, "buffer_capacity", c.td3.buffer_capacity);
        maybe(t, "checkpoint_interval", c.td3.checkpoint_interval);
        maybe(t, "log_window", c.td3.log_window);
        c.td3.max_episodes = c.episodes;
    }

    if (j.contains("tasks")) {
        const json& t = j.at("tasks");
        maybe(t, "count", c.tasks.count);
        maybe(t, "min_separation_m", c.tasks.min_separation_m);
        maybe(t, "max_separation_m", c.tasks.max_separation_m);
    }

    if (j.contains("baselines")) {
        const json& b = j.at("baselines");
        if (b.contains("ga")) {
            const json& g = b.at("ga");
            maybe(g, "population", c.baselines.ga.population);
            maybe(g, "iterations", c.baselines.ga.iterations);
            maybe(g, "crossover_rate", c.baselines.ga.crossover_rate);
            maybe(g, "mutation_rate", c.baselines.ga.mutation_rate);
            maybe(g, "mutation_sigma", c.baselines.ga.mutation_sigma);
            maybe(g, "tournament", c.baselines.ga.tournament);
        }
        if (b.contains("pso")) {
            const json& p = b.at("pso");
            maybe(p, "population", c.baselines.pso.population);
            maybe(p, "iterations", c.baselines.pso.iterations);
            maybe(p, "inertia", c.baselines.pso.inertia);
            maybe(p, "cognitive", c.baselines.pso.cognitive);
            maybe(p, "social", c.baselines.pso.social);
            maybe(p, "velocity_clamp", c.baselines.pso.velocity_clamp);
        }
        if (b.contains("afsa")) {
            const json& a = b.at("afsa");
            maybe(a, "population", c.baselines.afsa.population);
            maybe(a, "iterations", c.baselines.afsa.iterations);
            maybe(a, "visual", c.baselines.afsa.visual);
            maybe(a, "step", c.baselines.afsa.step);
            maybe(a, "crowding", c.baselines.afsa.crowding);
            maybe(a, "try_number", c.baselines.afsa.try_number);
        }
    }

    if (j.contains("benchmark")) {
        const json& b = j.at("benchmark");
        maybe(b, "methods", c.benchmark_methods);
        maybe(b, "threads", c.benchmark_threads);
        if (b.contains("checkpoints")) {
            for (const auto& [key, value] : b.at("checkpoints").items()) {
                c.checkpoints[key] = value.get<std::string>();
            }
        }
    }

    c.env.region = c.region;
    c.env.epoch = c.epoch;
    c.tasks.region = c.region;
    c.tasks.epoch = c.epoch;
    return c;
}

RunConfig RunConfig::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

void RunConfig::validate_all() const {
    std::vector<std::string> violations;
    auto check = [&](const char* what, auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            violations.push_back(std::string(what) + ": " + e.what());
        }
    };
    check("region", [&] { region.validate(); });
    check("reward", [&] { env.reward.validate(); });
    check("env", [&] { make_env_config().validate(); });
    check("td3", [&] { td3.validate(); });
    check("baselines.ga", [&] { baselines.ga.validate(); });
    check("baselines.pso", [&] { baselines.pso.validate(); });
    check("baselines.afsa", [&] { baselines.afsa.validate(); });
    check("tasks", [&] {
        if (tasks.count < 0) throw std::invalid_argument("count must be >= 0");
        if (!(tasks.max_separation_m > tasks.min_separation_m) ||
            !(tasks.min_separation_m > 0.0)) {
            throw std::invalid_argument("need max_separation_m > min_separation_m > 0");
        }
    });
    check("episodes", [&] {
        if (episodes < 0) throw std::invalid_argument("episodes must be >= 0");
    });
    check("field.type", [&] {
        if (field.type != "igrf" && field.type != "linear" && field.type != "dipole") {
            throw std::invalid_argument("must be one of igrf, linear, dipole");
        }
    });
    check("benchmark.methods", [&] {
        for (const std::string& m : benchmark_methods) {
            if (m != "ggtd3" && m != "td3" && m != "ga" && m != "pso" && m != "afsa") {
                throw std::invalid_argument("unknown method '" + m + "'");
            }
        }
    });
    if (!violations.empty()) {
        std::string msg = "invalid configuration (" + std::to_string(violations.size()) +
                          " violation(s)):";
        for (const std::string& v : violations) msg += "\n  - " + v;
        throw ConfigError(msg, violations);
    }
}

std::filesystem::path RunConfig::resolve_coefficients(const std::string& cli_override) const {
    if (!cli_override.empty()) return cli_override;
    if (const char* env_path = std::getenv("GEONAV_IGRF_FILE"); env_path && *env_path) {
        return env_path;
    }
    return coefficients;
}

std::shared_ptr<const GeomagneticModel> RunConfig::make_model(
    const std::string& coeffs_override) const {
    if (field.type == "igrf") {
        return std::make_shared<IgrfModel>(
            CoefficientSet::load(resolve_coefficients(coeffs_override)));
    }
    if (field.type == "dipole") {
        return std::make_shared<AxialDipoleModel>(field.g10_nt);
    }
    LocalFrame frame(region.center());
    ElementsTriple base{field.base_d_deg * kDegToRad, field.base_i_deg * kDegToRad,
                        field.base_bh_nt};
    const double per_km = 1.0 / 1000.0;
    return std::make_shared<LinearElementField>(
        frame, base,
        GradientVector{field.d_slope_deg_per_km_x * kDegToRad * per_km,
                       field.d_slope_deg_per_km_y * kDegToRad * per_km},
        GradientVector{field.i_slope_deg_per_km_x * kDegToRad * per_km,
                       field.i_slope_deg_per_km_y * kDegToRad * per_km},
        GradientVector{field.bh_slope_nt_per_km_x * per_km,
                       field.bh_slope_nt_per_km_y * per_km});
}

EnvConfig RunConfig::make_env_config() const {
    EnvConfig e = env;
    e.region = region;
    e.epoch = epoch;
    return e;
}

TaskSampler RunConfig::make_train_sampler() const {
    TaskSampler s;
    s.region = region;
    s.min_separation_m = tasks.min_separation_m;
    s.max_separation_m = tasks.max_separation_m;
    s.epoch = epoch;
    return s;
}

TaskGenConfig RunConfig::make_task_config() const {
    TaskGenConfig t = tasks;
    t.region = region;
    t.epoch = epoch;
    return t;
}

}  // namespace geonav
