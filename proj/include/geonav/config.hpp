#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "geonav/baselines.hpp"
#include "geonav/eval.hpp"
#include "geonav/nav_env.hpp"
#include "geonav/td3.hpp"

namespace geonav {

/// Thrown by RunConfig::validate_all with every violated field listed.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string message, std::vector<std::string> violations)
        : std::runtime_error(std::move(message)), violations_(std::move(violations)) {}
    const std::vector<std::string>& violations() const { return violations_; }

private:
    std::vector<std::string> violations_;
};

struct FieldConfig {
    std::string type = "igrf";  // igrf | linear | dipole

    // linear field: base values and slopes in I/O units (degrees, nT, per km)
    double base_d_deg = 8.0;
    double base_i_deg = -16.0;
    double base_bh_nt = 35000.0;
    double d_slope_deg_per_km_x = 0.0;
    double d_slope_deg_per_km_y = 0.0;
    double i_slope_deg_per_km_x = 0.0;
    double i_slope_deg_per_km_y = 0.0;
    double bh_slope_nt_per_km_x = 0.0;
    double bh_slope_nt_per_km_y = 0.0;

    double g10_nt = -29404.8;  // dipole field
};

/// Aggregated run settings: one nested JSON file plus flag overrides.
struct RunConfig {
    std::uint64_t seed = 1;
    std::filesystem::path output_dir = "out";
    std::filesystem::path coefficients = "data/igrf13coeffs.txt";
    double epoch = 2020.0;

    Region region{-10.0, 0.0, 160.0, 170.0};
    FieldConfig field;
    EnvConfig env;          // region/epoch/reward filled from the fields above
    TD3Config td3;
    int episodes = 20000;   // training episodes for cmd_train
    TaskGenConfig tasks;    // benchmark tasks; also the training separation band
    BaselineConfigs baselines;

    std::vector<std::string> benchmark_methods = {"ggtd3", "td3", "ga", "pso", "afsa"};
    std::map<std::string, std::filesystem::path> checkpoints;
    int benchmark_threads = 1;

    static RunConfig from_json_file(const std::filesystem::path& path);
    static RunConfig from_json_text(const std::string& text);

    /// Collects every violated field; throws ConfigError when any.
    void validate_all() const;

    /// Coefficient file resolution: explicit override > GEONAV_IGRF_FILE >
    /// configured path.
    std::filesystem::path resolve_coefficients(const std::string& cli_override = "") const;

    std::shared_ptr<const GeomagneticModel> make_model(
        const std::string& coeffs_override = "") const;
    EnvConfig make_env_config() const;
    TaskSampler make_train_sampler() const;
    TaskGenConfig make_task_config() const;
};

}  // namespace geonav
