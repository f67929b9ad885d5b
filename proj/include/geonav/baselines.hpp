#pragma once

#include <random>
#include <string_view>
#include <vector>

#include "geonav/nav_env.hpp"

namespace geonav {

/// Per-step action search over (yaw, distance), scored by probing the
/// objective at the hypothetical next position. All methods work on genes
/// normalized to [0,1]^2 and track an elite best that never regresses.

struct GaConfig {
    int population = 50;
    int iterations = 30;
    double crossover_rate = 0.8;
    double mutation_rate = 0.1;
    double mutation_sigma = 0.1;  // in normalized gene units
    int tournament = 3;
    /// Optional warm-start candidates; the rest of the population is random.
    std::vector<NavAction> seed_candidates;
    void validate() const;
};

struct PsoConfig {
    int population = 30;
    int iterations = 50;
    double inertia = 0.7;
    double cognitive = 1.5;
    double social = 1.5;
    double velocity_clamp = 0.5;  // max |v| per gene, normalized units
    /// Warm-start particles (zero initial velocity); the rest are random.
    std::vector<NavAction> seed_candidates;
    void validate() const;
};

struct AfsaConfig {
    int population = 30;
    int iterations = 30;
    double visual = 1.0 / 6.0;  // neighborhood radius, normalized units
    double step = 0.3;          // max move per behavior, normalized units
    double crowding = 0.618;    // occupancy limit for swarm/follow moves
    int try_number = 5;
    std::vector<NavAction> seed_candidates;
    void validate() const;
};

struct BaselineConfigs {
    GaConfig ga;
    PsoConfig pso;
    AfsaConfig afsa;
};

enum class BaselineMethod { kGa, kPso, kAfsa };
std::string_view baseline_name(BaselineMethod m);
BaselineMethod baseline_from_name(std::string_view name);

struct SearchResult {
    NavAction action;
    /// Best fitness after initialization and after each iteration
    /// (iterations + 1 entries), non-increasing.
    std::vector<double> best_history;
};

SearchResult propose_action_ga(const NavEnv& env, const GaConfig& config, std::mt19937_64& rng);
SearchResult propose_action_pso(const NavEnv& env, const PsoConfig& config, std::mt19937_64& rng);
SearchResult propose_action_afsa(const NavEnv& env, const AfsaConfig& config, std::mt19937_64& rng);

/// Runs one full episode, repeatedly searching and executing the best action.
/// The returned trace records per-step search histories.
EpisodeTrace run_baseline_episode(BaselineMethod method, const TaskSpec& task, NavEnv& env,
                                  const BaselineConfigs& configs, std::mt19937_64& rng);

}  // namespace geonav
