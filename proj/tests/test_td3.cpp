#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "geonav/synthetic_field.hpp"
#include "geonav/td3.hpp"

using namespace geonav;

namespace {

StateBounds simple_bounds() {
    return StateBounds{ElementsTriple{0.0, -0.5, 34000.0}, ElementsTriple{0.3, 0.0, 36000.0},
                       20000.0};
}

TD3Config small_config() {
    TD3Config c;
    c.hidden_dims = {16, 16};
    c.batch_size = 32;
    c.buffer_capacity = 2000;
    c.warmup_steps = 64;
    c.log_window = 10;
    return c;
}

Transition random_transition(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> us(0.0, 1.0), ua(-1.0, 1.0), ur(-5.0, 5.0);
    Transition t;
    for (double& v : t.state) v = us(rng);
    for (double& v : t.next_state) v = us(rng);
    for (double& v : t.action) v = ua(rng);
    t.reward = ur(rng);
    t.done = us(rng) < 0.2;
    return t;
}

Region test_region() { return Region{-6.5, -3.5, 163.5, 166.5}; }

std::shared_ptr<LinearElementField> make_linear_field() {
    LocalFrame frame(test_region().center());
    return std::make_shared<LinearElementField>(
        frame, ElementsTriple{0.14, -0.28, 35400.0}, GradientVector{9e-10, -5e-10},
        GradientVector{4e-10, 1.2e-9}, GradientVector{-1.1e-3, -2.3e-3});
}

NavEnv make_linear_env() {
    EnvConfig config;
    config.region = test_region();
    config.l_max_m = 20000.0;
    return NavEnv(make_linear_field(), config);
}

}  // namespace

TEST_CASE("replay buffer is FIFO at capacity") {
    ReplayBuffer buf(5);
    std::mt19937_64 rng(1);
    for (int k = 0; k < 8; ++k) buf.add(random_transition(rng));
    CHECK(buf.size() == 5);
    CHECK(buf.total_added() == 8);
    std::set<std::uint64_t> ids;
    for (std::size_t k = 0; k < buf.size(); ++k) ids.insert(buf.at(k).id);
    // the oldest three insertions were overwritten
    CHECK(ids == std::set<std::uint64_t>{3, 4, 5, 6, 7});
}

TEST_CASE("sampled mini-batches come only from stored transitions") {
    ReplayBuffer buf(64);
    std::mt19937_64 rng(2);
    for (int k = 0; k < 100; ++k) buf.add(random_transition(rng));
    std::vector<const Transition*> batch;
    for (int trial = 0; trial < 200; ++trial) {
        buf.sample(16, rng, batch);
        for (const Transition* t : batch) {
            CHECK(t->id < buf.total_added());
            CHECK(t->id >= buf.total_added() - buf.size());
        }
    }
    ReplayBuffer empty(4);
    CHECK_THROWS_AS(empty.sample(1, rng, batch), std::logic_error);
}

TEST_CASE("clipped double-Q target identities") {
    SUBCASE("terminal transitions pass the reward through") {
        auto y = clipped_double_q_targets({5.0}, {3.0}, {1.5}, {1}, 0.9);
        CHECK(y[0] == 1.5);
    }
    SUBCASE("direct substitution") {
        auto y = clipped_double_q_targets({5.0}, {3.0}, {1.0}, {0}, 0.5);
        CHECK(y[0] == doctest::Approx(2.5));
    }
    SUBCASE("critic swap leaves targets unchanged") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(-10.0, 10.0);
        std::vector<double> q1(64), q2(64), r(64);
        std::vector<std::uint8_t> d(64);
        for (int k = 0; k < 64; ++k) {
            q1[k] = u(rng);
            q2[k] = u(rng);
            r[k] = u(rng);
            d[k] = k % 3 == 0;
        }
        CHECK(clipped_double_q_targets(q1, q2, r, d, 0.99) ==
              clipped_double_q_targets(q2, q1, r, d, 0.99));
    }
    SUBCASE("identical critics reduce to single-critic targets") {
        std::vector<double> q{1.0, -2.0, 0.5}, r{0.1, 0.2, 0.3};
        std::vector<std::uint8_t> d{0, 0, 1};
        auto y = clipped_double_q_targets(q, q, r, d, 0.9);
        for (int k = 0; k < 3; ++k) {
            CHECK(y[k] == doctest::Approx(r[k] + 0.9 * (d[k] ? 0.0 : q[k])));
        }
    }
    SUBCASE("monotone in reward and in min(q1,q2)") {
        auto base = clipped_double_q_targets({2.0}, {4.0}, {1.0}, {0}, 0.9)[0];
        CHECK(clipped_double_q_targets({2.0}, {4.0}, {1.5}, {0}, 0.9)[0] > base);
        CHECK(clipped_double_q_targets({2.5}, {4.0}, {1.0}, {0}, 0.9)[0] > base);
    }
}

TEST_CASE("config validation rejects out-of-domain fields") {
    TD3Config c = small_config();
    CHECK_NOTHROW(c.validate());
    TD3Config bad = c;
    bad.gamma = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = c;
    bad.policy_delay = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = c;
    bad.batch_size = 5000;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = c;
    bad.hidden_dims = {};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("target networks start equal to the main networks") {
    TD3Agent agent(small_config(), simple_bounds(), 42);
    for (std::size_t l = 0; l < agent.actor().layers().size(); ++l) {
        CHECK(agent.actor().layers()[l].weights == agent.target_actor().layers()[l].weights);
    }
    for (std::size_t l = 0; l < agent.critic1().layers().size(); ++l) {
        CHECK(agent.critic1().layers()[l].weights ==
              agent.target_critic1().layers()[l].weights);
        CHECK(agent.critic2().layers()[l].weights ==
              agent.target_critic2().layers()[l].weights);
    }
}

TEST_CASE("select_action contracts") {
    TD3Agent agent(small_config(), simple_bounds(), 7);
    NavState state;
    state.current = ElementsTriple{0.1, -0.2, 35000.0};
    state.target = ElementsTriple{0.2, -0.3, 35500.0};
    std::mt19937_64 rng(5);

    SUBCASE("greedy policy is deterministic") {
        NavAction a = agent.select_action(state, false, rng);
        NavAction b = agent.select_action(state, false, rng);
        CHECK(a.distance_m == b.distance_m);
        CHECK(a.yaw_rad == b.yaw_rad);
    }
    SUBCASE("exploration stays inside the action bounds") {
        for (int k = 0; k < 2000; ++k) {
            NavAction a = agent.select_action(state, true, rng);
            CHECK(a.distance_m >= 0.0);
            CHECK(a.distance_m <= 20000.0);
            CHECK(std::abs(a.yaw_rad) <= kPi / 2.0 + 1e-12);
        }
    }
    SUBCASE("zero-weight actor gives the midpoint action") {
        TD3Agent zero(small_config(), simple_bounds(), 1);
        for (auto& layer : zero.actor().layers()) {
            std::fill(layer.weights.begin(), layer.weights.end(), 0.0);
            std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
        }
        NavAction a = zero.select_action(state, false, rng);
        CHECK(a.distance_m == doctest::Approx(10000.0));  // l_max / 2
        CHECK(a.yaw_rad == doctest::Approx(0.0));
    }
}

TEST_CASE("target actions respect clipping and noise scale") {
    TD3Config config = small_config();
    StateBounds bounds = simple_bounds();
    std::mt19937_64 rng(11);

    SUBCASE("zero policy noise reproduces the target actor exactly") {
        config.policy_noise = 0.0;
        TD3Agent agent(config, bounds, 3);
        std::vector<Transition> storage(8);
        std::vector<const Transition*> batch;
        std::mt19937_64 trng(13);
        for (auto& t : storage) {
            t = random_transition(trng);
            batch.push_back(&t);
        }
        std::vector<double> out;
        agent.target_actions(batch, rng, out);
        REQUIRE(out.size() == batch.size() * kActionDim);
        for (std::size_t b = 0; b < batch.size(); ++b) {
            auto direct = agent.target_actor().forward(
                std::span(batch[b]->next_state.data(), kStateDim));
            CHECK(out[b * 2] == doctest::Approx(direct[0]).epsilon(1e-15));
            CHECK(out[b * 2 + 1] == doctest::Approx(direct[1]).epsilon(1e-15));
        }
    }
    SUBCASE("actions always clipped to [-1,1]") {
        TD3Agent agent(config, bounds, 3);
        std::vector<Transition> storage(64);
        std::vector<const Transition*> batch;
        std::mt19937_64 trng(17);
        for (auto& t : storage) {
            t = random_transition(trng);
            batch.push_back(&t);
        }
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<double> out;
            agent.target_actions(batch, rng, out);
            for (double v : out) {
                CHECK(v >= -1.0);
                CHECK(v <= 1.0);
            }
        }
    }
    SUBCASE("noise spread matches the censored-normal moment") {
        // zero-weight target actor isolates the noise: a' = clip(eps, -c, c)
        TD3Agent agent(config, bounds, 3);
        for (auto& layer : agent.actor().layers()) {
            std::fill(layer.weights.begin(), layer.weights.end(), 0.0);
            std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
        }
        // targets were copies of the online nets at construction; zero them too
        soft_update(agent.target_actor(), agent.actor(), 1.0);

        Transition t{};
        std::vector<const Transition*> batch(1, &t);
        double sum = 0.0, sum_sq = 0.0;
        const int n_draws = 100000;
        std::vector<double> out;
        for (int k = 0; k < n_draws; ++k) {
            agent.target_actions(batch, rng, out);
            for (double v : out) {
                sum += v;
                sum_sq += v * v;
            }
        }
        double n = 2.0 * n_draws;
        double mean = sum / n;
        double stddev = std::sqrt(sum_sq / n - mean * mean);
        // sigma * sqrt(E[clip(Z,-2,2)^2]) for unit normal Z: 0.0959446
        CHECK(std::abs(mean) < 0.002);
        CHECK(stddev == doctest::Approx(0.0959446).epsilon(0.02));
    }
}

TEST_CASE("critic updates fit fixed targets") {
    TD3Config config = small_config();
    TD3Agent agent(config, simple_bounds(), 19);
    std::mt19937_64 rng(23);
    std::vector<Transition> storage(32);
    std::vector<const Transition*> batch;
    for (auto& t : storage) {
        t = random_transition(rng);
        batch.push_back(&t);
    }

    SUBCASE("loss equals the manual MSE on a 2-sample batch") {
        std::vector<const Transition*> two{batch[0], batch[1]};
        std::vector<double> targets{0.7, -0.3};
        std::vector<double> in(2 * (kStateDim + kActionDim));
        for (int b = 0; b < 2; ++b) {
            for (int k = 0; k < kStateDim; ++k) in[b * 10 + k] = two[b]->state[k];
            for (int k = 0; k < kActionDim; ++k) in[b * 10 + 8 + k] = two[b]->action[k];
        }
        double manual = 0.0;
        for (int b = 0; b < 2; ++b) {
            double q = agent.critic1().forward(std::span(in.data() + b * 10, 10))[0];
            manual += (q - targets[b]) * (q - targets[b]);
        }
        manual /= 2.0;
        auto [loss1, loss2] = agent.critic_update(two, targets);
        CHECK(loss1 == doctest::Approx(manual).epsilon(1e-12));
        (void)loss2;
    }
    SUBCASE("loss decreases over 100 updates on a frozen batch") {
        std::vector<double> targets(batch.size());
        std::mt19937_64 trng(29);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        for (double& v : targets) v = u(trng);
        auto [first1, first2] = agent.critic_update(batch, targets);
        double last1 = first1, last2 = first2;
        for (int k = 0; k < 100; ++k) std::tie(last1, last2) = agent.critic_update(batch, targets);
        CHECK(last1 < first1);
        CHECK(last2 < first2);
    }
}

TEST_CASE("actor update ascends the critic") {
    TD3Config config = small_config();
    config.actor_lr = 3e-3;
    TD3Agent agent(config, simple_bounds(), 31);
    std::mt19937_64 rng(37);
    std::vector<Transition> storage(64);
    std::vector<const Transition*> batch;
    for (auto& t : storage) {
        t = random_transition(rng);
        batch.push_back(&t);
    }

    SUBCASE("with a critic fit to Q = -|a|^2 the actor shrinks its output") {
        // regress critic1 onto -(a1^2 + a2^2) over random state-action pairs
        std::uniform_real_distribution<double> ua(-1.0, 1.0), us(0.0, 1.0);
        std::vector<Transition> fit_storage(256);
        std::vector<const Transition*> fit_batch;
        std::vector<double> fit_targets(256);
        for (int k = 0; k < 256; ++k) {
            for (double& v : fit_storage[k].state) v = us(rng);
            for (double& v : fit_storage[k].action) v = ua(rng);
            fit_targets[k] =
                -(fit_storage[k].action[0] * fit_storage[k].action[0] +
                  fit_storage[k].action[1] * fit_storage[k].action[1]);
            fit_batch.push_back(&fit_storage[k]);
        }
        for (int k = 0; k < 600; ++k) agent.critic_update(fit_batch, fit_targets);

        auto mean_norm = [&]() {
            double total = 0.0;
            for (const Transition* t : batch) {
                auto a = agent.policy_normalized(t->state);
                total += std::hypot(a[0], a[1]);
            }
            return total / batch.size();
        };
        double before = mean_norm();
        for (int k = 0; k < 60; ++k) agent.actor_update(batch);
        double after = mean_norm();
        CHECK(after < before);
    }
    SUBCASE("frozen critic gives non-decreasing batch-mean Q over a window") {
        double first = agent.actor_update(batch);
        double last = first;
        for (int k = 0; k < 40; ++k) last = agent.actor_update(batch);
        CHECK(last >= first - 1e-9);
    }
}

TEST_CASE("policy delay gates actor and target updates exactly") {
    TD3Config config = small_config();
    config.policy_delay = 2;
    config.warmup_steps = 0;
    TD3Agent agent(config, simple_bounds(), 41);
    std::mt19937_64 rng(43);
    for (int k = 0; k < 200; ++k) agent.buffer().add(random_transition(rng));

    Network target_before = agent.target_actor();
    agent.update(rng);  // update 1: critics only
    CHECK(agent.update_count() == 1);
    CHECK(agent.actor_update_count() == 0);
    for (std::size_t l = 0; l < target_before.layers().size(); ++l) {
        CHECK(agent.target_actor().layers()[l].weights == target_before.layers()[l].weights);
    }
    agent.update(rng);  // update 2: critics + actor + targets
    CHECK(agent.update_count() == 2);
    CHECK(agent.actor_update_count() == 1);
    bool target_moved = false;
    for (std::size_t l = 0; l < target_before.layers().size(); ++l) {
        if (agent.target_actor().layers()[l].weights != target_before.layers()[l].weights) {
            target_moved = true;
        }
    }
    CHECK(target_moved);
    for (int k = 0; k < 10; ++k) agent.update(rng);
    CHECK(agent.update_count() == 12);
    CHECK(agent.actor_update_count() == 6);
}

TEST_CASE("train: zero episodes leaves everything untouched") {
    NavEnv env = make_linear_env();
    TD3Agent agent(small_config(), env.bounds(), 47);
    Network actor_before = agent.actor();
    TaskSampler sampler{test_region(), 40000.0, 120000.0, 2020.0};
    std::mt19937_64 rng(53);
    auto log = train_td3(env, agent, sampler, TrainOptions{0, std::nullopt, 1, false}, rng);
    CHECK(log.empty());
    for (std::size_t l = 0; l < actor_before.layers().size(); ++l) {
        CHECK(agent.actor().layers()[l].weights == actor_before.layers()[l].weights);
    }
    CHECK(agent.buffer().size() == 0);
}

TEST_CASE("training runs are bit-identical under a fixed seed") {
    auto run_once = [&](std::uint64_t seed) {
        NavEnv env = make_linear_env();
        TD3Config config = small_config();
        config.warmup_steps = 100;
        TD3Agent agent(config, env.bounds(), derive_seed(seed, "agent"));
        TaskSampler sampler{test_region(), 40000.0, 120000.0, 2020.0};
        std::mt19937_64 rng(derive_seed(seed, "loop"));
        return train_td3(env, agent, sampler, TrainOptions{12, std::nullopt, 1, false}, rng);
    };
    auto log1 = run_once(99);
    auto log2 = run_once(99);
    REQUIRE(log1.size() == log2.size());
    REQUIRE(!log1.empty());
    for (std::size_t k = 0; k < log1.size(); ++k) {
        CHECK(log1[k].episode == log2[k].episode);
        CHECK(log1[k].steps == log2[k].steps);
        CHECK(log1[k].episode_return == log2[k].episode_return);
        CHECK(log1[k].success == log2[k].success);
        CHECK(log1[k].window_return == log2[k].window_return);
        CHECK(log1[k].window_success == log2[k].window_success);
    }
    auto log3 = run_once(100);
    bool differs = log3.size() != log1.size();
    for (std::size_t k = 0; !differs && k < log1.size(); ++k) {
        differs = log1[k].episode_return != log3[k].episode_return;
    }
    CHECK(differs);
}

TEST_CASE("checkpoint restore rejects mismatched configs") {
    NavEnv env = make_linear_env();
    TD3Agent agent(small_config(), env.bounds(), 61);
    Checkpoint ck = agent.make_checkpoint({{"episodes_done", 5}});
    TD3Config other = small_config();
    other.gamma = 0.9;
    TD3Agent different(other, env.bounds(), 61);
    CHECK_THROWS_AS(different.restore(ck), std::runtime_error);
    TD3Agent same(small_config(), env.bounds(), 62);
    CHECK_NOTHROW(same.restore(ck));
    for (std::size_t l = 0; l < agent.actor().layers().size(); ++l) {
        CHECK(same.actor().layers()[l].weights == agent.actor().layers()[l].weights);
    }
}
