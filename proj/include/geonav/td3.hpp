#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "geonav/checkpoint.hpp"
#include "geonav/nav_env.hpp"
#include "geonav/neural.hpp"

namespace geonav {

inline constexpr int kStateDim = 8;
inline constexpr int kActionDim = 2;

/// One stored interaction, in normalized units: states in [0,1], actions in
/// [-1,1]. The id records insertion order.
struct Transition {
    std::array<double, kStateDim> state{};
    std::array<double, kActionDim> action{};
    double reward = 0.0;
    std::array<double, kStateDim> next_state{};
    bool done = false;
    std::uint64_t id = 0;
};

/// FIFO ring buffer with uniform sampling.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void add(Transition t);
    std::size_t size() const { return storage_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::uint64_t total_added() const { return next_id_; }
    const Transition& at(std::size_t k) const { return storage_.at(k); }

    void sample(std::size_t batch, std::mt19937_64& rng,
                std::vector<const Transition*>& out) const;

private:
    std::size_t capacity_;
    std::size_t cursor_ = 0;
    std::uint64_t next_id_ = 0;
    std::vector<Transition> storage_;
};

struct TD3Config {
    double gamma = 0.995;
    double tau = 0.005;
    int policy_delay = 2;
    int batch_size = 256;
    double exploration_noise = 0.2;  // sigma in normalized action units
    double policy_noise = 0.1;
    double noise_clip = 0.2;
    double actor_lr = 1e-3;
    double critic_lr = 1e-3;
    std::vector<int> hidden_dims = {512, 512, 512};
    int max_episodes = 20000;
    int warmup_steps = 1000;
    std::size_t buffer_capacity = 50000;
    int checkpoint_interval = 0;  // episodes between checkpoints; 0 = off
    int log_window = 200;
    /// Stored-reward clamp. The normalized objective is unbounded on tasks
    /// whose origin->target span nearly vanishes for one element; clamping
    /// what enters the buffer keeps the critics finite. Episode returns in
    /// the training log stay unclipped.
    double reward_clip_min = -30.0;
    double reward_clip_max = 250.0;

    void validate() const;
    std::uint64_t hash() const;
};

/// y = r + gamma * (1 - d) * min(q1, q2), element-wise over a batch.
std::vector<double> clipped_double_q_targets(const std::vector<double>& q1,
                                             const std::vector<double>& q2,
                                             const std::vector<double>& rewards,
                                             const std::vector<std::uint8_t>& dones,
                                             double gamma);

/// Twin critics, delayed actor, target networks, replay buffer. Works in
/// normalized spaces; converts to NavAction at the environment boundary.
class TD3Agent {
public:
    TD3Agent(TD3Config config, StateBounds bounds, std::uint64_t seed);

    const TD3Config& config() const { return config_; }
    const StateBounds& bounds() const { return bounds_; }
    ReplayBuffer& buffer() { return buffer_; }
    const ReplayBuffer& buffer() const { return buffer_; }

    /// Deterministic policy action; Gaussian exploration noise in normalized
    /// space when explore is set. Result clipped to bounds, then denormalized.
    NavAction select_action(const NavState& state, bool explore, std::mt19937_64& rng) const;

    /// Uniform random action in normalized space (warmup phase).
    NavAction random_action(std::mt19937_64& rng) const;

    /// Normalized policy output in [-1,1]^2 for a normalized state.
    std::array<double, kActionDim> policy_normalized(
        const std::array<double, kStateDim>& state_norm) const;

    std::array<double, kStateDim> normalize_state(const NavState& s) const;
    NavAction denormalize_action(const std::array<double, kActionDim>& a) const;
    std::array<double, kActionDim> normalize_action(const NavAction& a) const;

    /// Target-policy actions with clipped smoothing noise, batched; rows of
    /// `out` are normalized actions in [-1,1].
    void target_actions(const std::vector<const Transition*>& batch, std::mt19937_64& rng,
                        std::vector<double>& out) const;

    /// One full update iteration: sample batch, critic updates, and on every
    /// policy_delay-th call the actor update plus target soft updates.
    void update(std::mt19937_64& rng);

    /// Critic MSE step against fixed targets; returns the two pre-update losses.
    std::pair<double, double> critic_update(const std::vector<const Transition*>& batch,
                                            const std::vector<double>& targets);

    /// Deterministic policy-gradient ascent step on critic 1; returns the
    /// pre-update batch-mean Q.
    double actor_update(const std::vector<const Transition*>& batch);

    std::uint64_t update_count() const { return update_count_; }
    std::uint64_t actor_update_count() const { return actor_update_count_; }

    const Network& actor() const { return actor_; }
    Network& actor() { return actor_; }
    const Network& critic1() const { return critic1_; }
    Network& critic1() { return critic1_; }
    const Network& critic2() const { return critic2_; }
    Network& critic2() { return critic2_; }
    const Network& target_actor() const { return target_actor_; }
    Network& target_actor() { return target_actor_; }
    const Network& target_critic1() const { return target_critic1_; }
    const Network& target_critic2() const { return target_critic2_; }

    Checkpoint make_checkpoint(const std::map<std::string, std::uint64_t>& counters = {}) const;
    /// Restores networks, optimizer state, and update counters. Throws if the
    /// checkpoint's config hash disagrees with this agent's config.
    void restore(const Checkpoint& ck);

private:
    static void cat_state_action(const std::array<double, kStateDim>& s,
                                 std::span<const double> a, double* out);

    TD3Config config_;
    StateBounds bounds_;
    Network actor_, critic1_, critic2_;
    Network target_actor_, target_critic1_, target_critic2_;
    AdamState actor_adam_, critic1_adam_, critic2_adam_;
    ReplayBuffer buffer_;
    std::uint64_t update_count_ = 0;
    std::uint64_t actor_update_count_ = 0;

    // reusable workspaces
    mutable ForwardCache cache_a_, cache_c1_, cache_c2_, cache_t1_, cache_t2_;
    NetworkGradients grads_;
    std::vector<const Transition*> batch_;
    std::vector<double> ws_inputs_, ws_next_inputs_, ws_targets_, ws_outgrad_, ws_actions_;
};

struct TrainEpisodeLog {
    int episode = 0;  // 1-based
    int steps = 0;
    double episode_return = 0.0;
    bool success = false;
    double window_return = 0.0;
    double window_success = 0.0;
};

/// Uniform random tasks over a region with a separation band, via rejection
/// sampling in frame coordinates.
struct TaskSampler {
    Region region;
    double min_separation_m = 300000.0;
    double max_separation_m = 500000.0;
    double epoch = 2020.0;
    int max_attempts = 100000;

    TaskSpec sample(const LocalFrame& frame, std::mt19937_64& rng) const;
};

struct TrainOptions {
    int episodes = 0;
    std::optional<std::filesystem::path> checkpoint_dir;
    int first_episode = 1;  // resume support: numbering continues
    bool verbose = false;
};

/// Runs the training loop: per-episode task sampling, warmup with random
/// actions, one update iteration per environment step afterwards. Returns one
/// log row per episode with sliding-window statistics.
std::vector<TrainEpisodeLog> train_td3(NavEnv& env, TD3Agent& agent, const TaskSampler& sampler,
                                       const TrainOptions& options, std::mt19937_64& rng);

void write_training_log(const std::vector<TrainEpisodeLog>& log,
                        const std::filesystem::path& path, bool append = false);

/// Greedy rollout of the agent's deterministic policy on one task.
EpisodeTrace run_policy_episode(NavEnv& env, const TD3Agent& agent, const TaskSpec& task);

}  // namespace geonav
