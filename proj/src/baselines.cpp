#include "geonav/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace geonav {

namespace {

struct Genes {
    double yaw = 0.5;   // normalized [0,1] -> [-pi/2, pi/2]
    double dist = 0.5;  // normalized [0,1] -> [0, l_max]
};

NavAction to_action(const Genes& g, double l_max) {
    return NavAction::clamped(g.dist * l_max,
                              (g.yaw * 2.0 - 1.0) * NavAction::kYawBound, l_max);
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

struct Probe {
    const NavEnv& env;
    double operator()(const Genes& g) const {
        return env.probe_objective(to_action(g, env.config().l_max_m));
    }
};

Genes random_genes(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return Genes{u(rng), u(rng)};
}

Genes genes_from_action(const NavAction& a, double l_max) {
    return Genes{clamp01((a.yaw_rad / NavAction::kYawBound + 1.0) * 0.5),
                 clamp01(a.distance_m / l_max)};
}

// Seeded candidates first, the remainder random.
std::vector<Genes> initial_population(int population, const std::vector<NavAction>& seeds,
                                      double l_max, std::mt19937_64& rng) {
    std::vector<Genes> pop(population);
    std::size_t n_seed = std::min<std::size_t>(seeds.size(), population);
    for (std::size_t k = 0; k < n_seed; ++k) pop[k] = genes_from_action(seeds[k], l_max);
    for (std::size_t k = n_seed; k < pop.size(); ++k) pop[k] = random_genes(rng);
    return pop;
}

struct Best {
    Genes genes;
    double fitness = std::numeric_limits<double>::infinity();
    void offer(const Genes& g, double f) {
        if (f < fitness) {
            fitness = f;
            genes = g;
        }
    }
};

}  // namespace

void GaConfig::validate() const {
    if (population < 1) throw std::invalid_argument("ga population must be >= 1");
    if (iterations < 0) throw std::invalid_argument("ga iterations must be >= 0");
    if (crossover_rate < 0.0 || crossover_rate > 1.0 || mutation_rate < 0.0 ||
        mutation_rate > 1.0) {
        throw std::invalid_argument("ga rates must be in [0,1]");
    }
    if (tournament < 1) throw std::invalid_argument("ga tournament must be >= 1");
}

void PsoConfig::validate() const {
    if (population < 1) throw std::invalid_argument("pso population must be >= 1");
    if (iterations < 0) throw std::invalid_argument("pso iterations must be >= 0");
    if (inertia < 0.0 || inertia > 1.0) throw std::invalid_argument("pso inertia must be in [0,1]");
    if (cognitive < 0.0 || social < 0.0) throw std::invalid_argument("pso weights must be >= 0");
    if (!(velocity_clamp > 0.0)) throw std::invalid_argument("pso velocity clamp must be > 0");
}

void AfsaConfig::validate() const {
    if (population < 1) throw std::invalid_argument("afsa population must be >= 1");
    if (iterations < 0) throw std::invalid_argument("afsa iterations must be >= 0");
    if (!(visual > 0.0) || !(step > 0.0)) throw std::invalid_argument("afsa visual/step must be > 0");
    if (crowding <= 0.0 || crowding > 1.0) throw std::invalid_argument("afsa crowding must be in (0,1]");
    if (try_number < 1) throw std::invalid_argument("afsa try_number must be >= 1");
}

std::string_view baseline_name(BaselineMethod m) {
    switch (m) {
        case BaselineMethod::kGa: return "ga";
        case BaselineMethod::kPso: return "pso";
        case BaselineMethod::kAfsa: return "afsa";
    }
    return "?";
}

BaselineMethod baseline_from_name(std::string_view name) {
    if (name == "ga") return BaselineMethod::kGa;
    if (name == "pso") return BaselineMethod::kPso;
    if (name == "afsa") return BaselineMethod::kAfsa;
    throw std::invalid_argument("unknown baseline method '" + std::string(name) + "'");
}

SearchResult propose_action_ga(const NavEnv& env, const GaConfig& config, std::mt19937_64& rng) {
    config.validate();
    Probe probe{env};
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, config.mutation_sigma);
    std::uniform_int_distribution<int> pick(0, config.population - 1);

    std::vector<Genes> pop = initial_population(config.population, config.seed_candidates,
                                                env.config().l_max_m, rng);
    std::vector<double> fit(config.population);
    for (int k = 0; k < config.population; ++k) fit[k] = probe(pop[k]);
    Best best;
    for (int k = 0; k < config.population; ++k) best.offer(pop[k], fit[k]);

    SearchResult result;
    result.best_history.push_back(best.fitness);

    std::vector<Genes> next(config.population);
    for (int it = 0; it < config.iterations; ++it) {
        auto tournament = [&]() -> const Genes& {
            int winner = pick(rng);
            for (int t = 1; t < config.tournament; ++t) {
                int c = pick(rng);
                if (fit[c] < fit[winner]) winner = c;
            }
            return pop[winner];
        };
        // elitism: slot 0 carries the best seen so far
        next[0] = best.genes;
        for (int k = 1; k < config.population; ++k) {
            Genes a = tournament();
            const Genes& b = tournament();
            if (u(rng) < config.crossover_rate) {
                double alpha = u(rng);
                a.yaw = alpha * a.yaw + (1.0 - alpha) * b.yaw;
                a.dist = alpha * a.dist + (1.0 - alpha) * b.dist;
            }
            if (u(rng) < config.mutation_rate) a.yaw = clamp01(a.yaw + gauss(rng));
            if (u(rng) < config.mutation_rate) a.dist = clamp01(a.dist + gauss(rng));
            next[k] = a;
        }
        pop.swap(next);
        for (int k = 0; k < config.population; ++k) {
            fit[k] = probe(pop[k]);
            best.offer(pop[k], fit[k]);
        }
        result.best_history.push_back(best.fitness);
    }
    result.action = to_action(best.genes, env.config().l_max_m);
    return result;
}

SearchResult propose_action_pso(const NavEnv& env, const PsoConfig& config, std::mt19937_64& rng) {
    config.validate();
    Probe probe{env};
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_real_distribution<double> uv(-config.velocity_clamp, config.velocity_clamp);

    struct Particle {
        Genes pos, vel_as_genes;  // vel stored in Genes fields for brevity
        Genes best_pos;
        double best_fit = std::numeric_limits<double>::infinity();
    };
    std::vector<Particle> swarm(config.population);
    std::vector<Genes> init = initial_population(config.population, config.seed_candidates,
                                                 env.config().l_max_m, rng);
    std::size_t n_seed = std::min<std::size_t>(config.seed_candidates.size(), config.population);
    Best global;
    for (std::size_t k = 0; k < swarm.size(); ++k) {
        Particle& p = swarm[k];
        p.pos = init[k];
        p.vel_as_genes = k < n_seed ? Genes{0.0, 0.0} : Genes{uv(rng), uv(rng)};
        double f = probe(p.pos);
        p.best_pos = p.pos;
        p.best_fit = f;
        global.offer(p.pos, f);
    }

    SearchResult result;
    result.best_history.push_back(global.fitness);

    auto clamp_v = [&](double v) {
        return std::clamp(v, -config.velocity_clamp, config.velocity_clamp);
    };
    for (int it = 0; it < config.iterations; ++it) {
        for (Particle& p : swarm) {
            p.vel_as_genes.yaw = clamp_v(config.inertia * p.vel_as_genes.yaw +
                                         config.cognitive * u(rng) * (p.best_pos.yaw - p.pos.yaw) +
                                         config.social * u(rng) * (global.genes.yaw - p.pos.yaw));
            p.vel_as_genes.dist = clamp_v(config.inertia * p.vel_as_genes.dist +
                                          config.cognitive * u(rng) * (p.best_pos.dist - p.pos.dist) +
                                          config.social * u(rng) * (global.genes.dist - p.pos.dist));
            p.pos.yaw = clamp01(p.pos.yaw + p.vel_as_genes.yaw);
            p.pos.dist = clamp01(p.pos.dist + p.vel_as_genes.dist);
            double f = probe(p.pos);
            if (f < p.best_fit) {
                p.best_fit = f;
                p.best_pos = p.pos;
            }
            global.offer(p.pos, f);
        }
        result.best_history.push_back(global.fitness);
    }
    result.action = to_action(global.genes, env.config().l_max_m);
    return result;
}

SearchResult propose_action_afsa(const NavEnv& env, const AfsaConfig& config,
                                 std::mt19937_64& rng) {
    config.validate();
    Probe probe{env};
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_real_distribution<double> su(-1.0, 1.0);

    std::vector<Genes> fish = initial_population(config.population, config.seed_candidates,
                                                 env.config().l_max_m, rng);
    std::vector<double> fit(config.population);
    Best board;  // bulletin board: best fish ever seen
    for (int k = 0; k < config.population; ++k) {
        fit[k] = probe(fish[k]);
        board.offer(fish[k], fit[k]);
    }

    SearchResult result;
    result.best_history.push_back(board.fitness);

    auto dist = [](const Genes& a, const Genes& b) {
        return std::hypot(a.yaw - b.yaw, a.dist - b.dist);
    };
    auto move_toward = [&](const Genes& from, const Genes& to) {
        double d = dist(from, to);
        Genes out = from;
        if (d > 1e-15) {
            double s = config.step * u(rng) / d;
            out.yaw = clamp01(from.yaw + (to.yaw - from.yaw) * s);
            out.dist = clamp01(from.dist + (to.dist - from.dist) * s);
        }
        return out;
    };
    auto prey = [&](int k) {
        // try random spots within visual range, move toward the first better one
        for (int t = 0; t < config.try_number; ++t) {
            Genes probe_pos{clamp01(fish[k].yaw + config.visual * su(rng)),
                            clamp01(fish[k].dist + config.visual * su(rng))};
            if (probe(probe_pos) < fit[k]) return move_toward(fish[k], probe_pos);
        }
        // random walk fallback
        return Genes{clamp01(fish[k].yaw + config.step * su(rng)),
                     clamp01(fish[k].dist + config.step * su(rng))};
    };

    for (int it = 0; it < config.iterations; ++it) {
        for (int k = 0; k < config.population; ++k) {
            // neighbors within visual range
            int nf = 0;
            Genes center{0.0, 0.0};
            int best_nb = -1;
            for (int j = 0; j < config.population; ++j) {
                if (j == k) continue;
                if (dist(fish[j], fish[k]) <= config.visual) {
                    ++nf;
                    center.yaw += fish[j].yaw;
                    center.dist += fish[j].dist;
                    if (best_nb < 0 || fit[j] < fit[best_nb]) best_nb = j;
                }
            }
            Genes candidate;
            bool moved = false;
            if (nf > 0) {
                center.yaw /= nf;
                center.dist /= nf;
                double center_fit = probe(center);
                bool uncrowded = static_cast<double>(nf) / config.population < config.crowding;
                // swarm toward the neighborhood center when it is better and roomy
                if (uncrowded && center_fit < fit[k]) {
                    candidate = move_toward(fish[k], center);
                    moved = true;
                } else if (best_nb >= 0 && uncrowded && fit[best_nb] < fit[k]) {
                    // follow the best neighbor
                    candidate = move_toward(fish[k], fish[best_nb]);
                    moved = true;
                }
            }
            if (!moved) candidate = prey(k);
            double f = probe(candidate);
            // greedy acceptance keeps each fish monotone
            if (f < fit[k]) {
                fish[k] = candidate;
                fit[k] = f;
            }
            board.offer(fish[k], fit[k]);
        }
        result.best_history.push_back(board.fitness);
    }
    result.action = to_action(board.genes, env.config().l_max_m);
    return result;
}

EpisodeTrace run_baseline_episode(BaselineMethod method, const TaskSpec& task, NavEnv& env,
                                  const BaselineConfigs& configs, std::mt19937_64& rng) {
    env.reset(task);
    std::vector<std::vector<double>> histories;
    bool done = false;
    while (!done) {
        SearchResult search;
        switch (method) {
            case BaselineMethod::kGa: search = propose_action_ga(env, configs.ga, rng); break;
            case BaselineMethod::kPso: search = propose_action_pso(env, configs.pso, rng); break;
            case BaselineMethod::kAfsa: search = propose_action_afsa(env, configs.afsa, rng); break;
        }
        StepResult res = env.step(search.action);
        histories.push_back(std::move(search.best_history));
        done = res.done;
    }
    EpisodeTrace trace = env.trace();
    trace.search_histories = std::move(histories);
    return trace;
}

}  // namespace geonav
