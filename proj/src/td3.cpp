#include "geonav/td3.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "geonav/csv.hpp"

namespace geonav {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ < 1) throw std::invalid_argument("replay buffer capacity must be >= 1");
    storage_.reserve(std::min<std::size_t>(capacity_, 1 << 20));
}

void ReplayBuffer::add(Transition t) {
    t.id = next_id_++;
    if (storage_.size() < capacity_) {
        storage_.push_back(std::move(t));
    } else {
        storage_[cursor_] = std::move(t);
        cursor_ = (cursor_ + 1) % capacity_;
    }
}

void ReplayBuffer::sample(std::size_t batch, std::mt19937_64& rng,
                          std::vector<const Transition*>& out) const {
    if (storage_.empty()) throw std::logic_error("sampling from an empty replay buffer");
    std::uniform_int_distribution<std::size_t> pick(0, storage_.size() - 1);
    out.resize(batch);
    for (std::size_t k = 0; k < batch; ++k) out[k] = &storage_[pick(rng)];
}

void TD3Config::validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must be in (0,1)");
    if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must be in (0,1]");
    if (policy_delay < 1) throw std::invalid_argument("policy_delay must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (static_cast<std::size_t>(batch_size) > buffer_capacity) {
        throw std::invalid_argument("batch_size must not exceed buffer capacity");
    }
    if (exploration_noise < 0.0 || policy_noise < 0.0 || noise_clip < 0.0) {
        throw std::invalid_argument("noise scales must be non-negative");
    }
    if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) {
        throw std::invalid_argument("learning rates must be positive");
    }
    if (hidden_dims.empty()) throw std::invalid_argument("need at least one hidden layer");
    for (int h : hidden_dims) {
        if (h < 1) throw std::invalid_argument("hidden layer sizes must be >= 1");
    }
    if (max_episodes < 0) throw std::invalid_argument("max_episodes must be >= 0");
    if (!(reward_clip_max > reward_clip_min)) {
        throw std::invalid_argument("reward clip range is empty");
    }
    if (warmup_steps < 0) throw std::invalid_argument("warmup_steps must be >= 0");
    if (log_window < 1) throw std::invalid_argument("log_window must be >= 1");
}

std::uint64_t TD3Config::hash() const {
    std::ostringstream s;
    s << gamma << '|' << tau << '|' << policy_delay << '|' << batch_size << '|'
      << exploration_noise << '|' << policy_noise << '|' << noise_clip << '|' << actor_lr << '|'
      << critic_lr << '|' << max_episodes << '|' << warmup_steps << '|' << buffer_capacity;
    for (int h : hidden_dims) s << '|' << h;
    return fnv1a(s.str());
}

std::vector<double> clipped_double_q_targets(const std::vector<double>& q1,
                                             const std::vector<double>& q2,
                                             const std::vector<double>& rewards,
                                             const std::vector<std::uint8_t>& dones,
                                             double gamma) {
    if (q1.size() != q2.size() || q1.size() != rewards.size() || q1.size() != dones.size()) {
        throw std::invalid_argument("target batch size mismatch");
    }
    std::vector<double> y(q1.size());
    for (std::size_t k = 0; k < y.size(); ++k) {
        double not_done = dones[k] ? 0.0 : 1.0;
        y[k] = rewards[k] + gamma * not_done * std::min(q1[k], q2[k]);
    }
    return y;
}

TD3Agent::TD3Agent(TD3Config config, StateBounds bounds, std::uint64_t seed)
    : config_(std::move(config)), bounds_(bounds), buffer_(config_.buffer_capacity) {
    config_.validate();
    std::mt19937_64 rng(seed);
    actor_ = Network(kStateDim, config_.hidden_dims, kActionDim, Activation::kRelu,
                     Activation::kTanh);
    critic1_ = Network(kStateDim + kActionDim, config_.hidden_dims, 1, Activation::kRelu,
                       Activation::kIdentity);
    critic2_ = critic1_;
    actor_.init_uniform(rng);
    critic1_.init_uniform(rng);
    critic2_.init_uniform(rng);
    // target parameters start equal to the main parameters
    target_actor_ = actor_;
    target_critic1_ = critic1_;
    target_critic2_ = critic2_;
    actor_adam_ = AdamState::for_network(actor_, config_.actor_lr);
    critic1_adam_ = AdamState::for_network(critic1_, config_.critic_lr);
    critic2_adam_ = AdamState::for_network(critic2_, config_.critic_lr);
}

std::array<double, kStateDim> TD3Agent::normalize_state(const NavState& s) const {
    std::array<double, kStateDim> v = bounds_.normalize(s);
    for (double& x : v) x = std::clamp(x, 0.0, 1.0);
    return v;
}

NavAction TD3Agent::denormalize_action(const std::array<double, kActionDim>& a) const {
    return NavAction::clamped((a[0] + 1.0) * 0.5 * bounds_.l_max_m,
                              a[1] * NavAction::kYawBound, bounds_.l_max_m);
}

std::array<double, kActionDim> TD3Agent::normalize_action(const NavAction& a) const {
    return {std::clamp(a.distance_m / bounds_.l_max_m * 2.0 - 1.0, -1.0, 1.0),
            std::clamp(a.yaw_rad / NavAction::kYawBound, -1.0, 1.0)};
}

std::array<double, kActionDim> TD3Agent::policy_normalized(
    const std::array<double, kStateDim>& state_norm) const {
    std::vector<double> out = actor_.forward(std::span(state_norm.data(), state_norm.size()));
    return {out[0], out[1]};
}

NavAction TD3Agent::select_action(const NavState& state, bool explore,
                                  std::mt19937_64& rng) const {
    std::array<double, kActionDim> a = policy_normalized(normalize_state(state));
    if (explore && config_.exploration_noise > 0.0) {
        std::normal_distribution<double> noise(0.0, config_.exploration_noise);
        for (double& x : a) x += noise(rng);
    }
    for (double& x : a) x = std::clamp(x, -1.0, 1.0);
    return denormalize_action(a);
}

NavAction TD3Agent::random_action(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::array<double, kActionDim> a{u(rng), u(rng)};
    return denormalize_action(a);
}

void TD3Agent::cat_state_action(const std::array<double, kStateDim>& s,
                                std::span<const double> a, double* out) {
    for (int k = 0; k < kStateDim; ++k) out[k] = s[k];
    for (int k = 0; k < kActionDim; ++k) out[kStateDim + k] = a[k];
}

void TD3Agent::target_actions(const std::vector<const Transition*>& batch,
                              std::mt19937_64& rng, std::vector<double>& out) const {
    const std::size_t n = batch.size();
    std::vector<double> states(n * kStateDim);
    for (std::size_t b = 0; b < n; ++b) {
        std::copy(batch[b]->next_state.begin(), batch[b]->next_state.end(),
                  states.begin() + b * kStateDim);
    }
    ForwardCache cache;
    target_actor_.forward_batch(states, static_cast<int>(n), cache);
    out = cache.activations.back();
    if (config_.policy_noise > 0.0) {
        std::normal_distribution<double> noise(0.0, config_.policy_noise);
        for (double& x : out) {
            double eps = std::clamp(noise(rng), -config_.noise_clip, config_.noise_clip);
            x += eps;
        }
    }
    for (double& x : out) x = std::clamp(x, -1.0, 1.0);
}

std::pair<double, double> TD3Agent::critic_update(const std::vector<const Transition*>& batch,
                                                  const std::vector<double>& targets) {
    const std::size_t n = batch.size();
    if (targets.size() != n) throw std::invalid_argument("critic_update: batch size mismatch");
    ws_inputs_.resize(n * (kStateDim + kActionDim));
    for (std::size_t b = 0; b < n; ++b) {
        cat_state_action(batch[b]->state,
                         std::span(batch[b]->action.data(), kActionDim),
                         ws_inputs_.data() + b * (kStateDim + kActionDim));
    }
    double losses[2] = {0.0, 0.0};
    Network* critics[2] = {&critic1_, &critic2_};
    AdamState* adams[2] = {&critic1_adam_, &critic2_adam_};
    ForwardCache* caches[2] = {&cache_c1_, &cache_c2_};
    for (int c = 0; c < 2; ++c) {
        critics[c]->forward_batch(ws_inputs_, static_cast<int>(n), *caches[c]);
        const std::vector<double>& q = caches[c]->activations.back();
        ws_outgrad_.resize(n);
        double loss = 0.0;
        for (std::size_t b = 0; b < n; ++b) {
            double err = q[b] - targets[b];
            loss += err * err;
            ws_outgrad_[b] = 2.0 * err / static_cast<double>(n);
        }
        losses[c] = loss / static_cast<double>(n);
        if (!std::isfinite(losses[c])) {
            throw std::runtime_error("critic loss is not finite; training halted");
        }
        grads_.match_shape(critics[c]->layers());
        grads_.clear();
        critics[c]->backward_batch(*caches[c], ws_outgrad_, grads_);
        adam_step(*critics[c], grads_, *adams[c]);
    }
    return {losses[0], losses[1]};
}

double TD3Agent::actor_update(const std::vector<const Transition*>& batch) {
    const std::size_t n = batch.size();
    std::vector<double> states(n * kStateDim);
    for (std::size_t b = 0; b < n; ++b) {
        std::copy(batch[b]->state.begin(), batch[b]->state.end(), states.begin() + b * kStateDim);
    }
    actor_.forward_batch(states, static_cast<int>(n), cache_a_);
    const std::vector<double>& actions = cache_a_.activations.back();

    ws_inputs_.resize(n * (kStateDim + kActionDim));
    for (std::size_t b = 0; b < n; ++b) {
        cat_state_action(batch[b]->state,
                         std::span(actions.data() + b * kActionDim, kActionDim),
                         ws_inputs_.data() + b * (kStateDim + kActionDim));
    }
    critic1_.forward_batch(ws_inputs_, static_cast<int>(n), cache_c1_);
    const std::vector<double>& q = cache_c1_.activations.back();
    double mean_q = std::accumulate(q.begin(), q.end(), 0.0) / static_cast<double>(n);
    if (!std::isfinite(mean_q)) {
        throw std::runtime_error("actor objective is not finite; training halted");
    }

    // dJ/dq = 1/n for gradient ascent on mean Q; chain through the critic to
    // get dJ/da, then through the actor. Adam minimizes, so negate.
    ws_outgrad_.assign(n, 1.0 / static_cast<double>(n));
    grads_.match_shape(critic1_.layers());
    grads_.clear();
    std::vector<double> input_grads;
    critic1_.backward_batch(cache_c1_, ws_outgrad_, grads_, &input_grads);

    ws_actions_.resize(n * kActionDim);
    for (std::size_t b = 0; b < n; ++b) {
        for (int k = 0; k < kActionDim; ++k) {
            ws_actions_[b * kActionDim + k] =
                -input_grads[b * (kStateDim + kActionDim) + kStateDim + k];
        }
    }
    grads_.match_shape(actor_.layers());
    grads_.clear();
    actor_.backward_batch(cache_a_, ws_actions_, grads_);
    adam_step(actor_, grads_, actor_adam_);
    return mean_q;
}

void TD3Agent::update(std::mt19937_64& rng) {
    if (buffer_.size() < static_cast<std::size_t>(config_.batch_size)) return;
    buffer_.sample(static_cast<std::size_t>(config_.batch_size), rng, batch_);

    target_actions(batch_, rng, ws_targets_);

    const std::size_t n = batch_.size();
    ws_next_inputs_.resize(n * (kStateDim + kActionDim));
    for (std::size_t b = 0; b < n; ++b) {
        cat_state_action(batch_[b]->next_state,
                         std::span(ws_targets_.data() + b * kActionDim, kActionDim),
                         ws_next_inputs_.data() + b * (kStateDim + kActionDim));
    }
    ForwardCache& tc1 = cache_t1_;
    ForwardCache& tc2 = cache_t2_;
    target_critic1_.forward_batch(ws_next_inputs_, static_cast<int>(n), tc1);
    target_critic2_.forward_batch(ws_next_inputs_, static_cast<int>(n), tc2);

    std::vector<double> rewards(n);
    std::vector<std::uint8_t> dones(n);
    for (std::size_t b = 0; b < n; ++b) {
        rewards[b] = batch_[b]->reward;
        dones[b] = batch_[b]->done ? 1 : 0;
    }
    std::vector<double> y = clipped_double_q_targets(tc1.activations.back(),
                                                     tc2.activations.back(), rewards, dones,
                                                     config_.gamma);
    critic_update(batch_, y);
    update_count_ += 1;

    if (update_count_ % static_cast<std::uint64_t>(config_.policy_delay) == 0) {
        actor_update(batch_);
        actor_update_count_ += 1;
        soft_update(target_actor_, actor_, config_.tau);
        soft_update(target_critic1_, critic1_, config_.tau);
        soft_update(target_critic2_, critic2_, config_.tau);
    }
}

Checkpoint TD3Agent::make_checkpoint(const std::map<std::string, std::uint64_t>& counters) const {
    Checkpoint ck;
    ck.config_hash = config_.hash();
    ck.networks["actor"] = actor_;
    ck.networks["critic1"] = critic1_;
    ck.networks["critic2"] = critic2_;
    ck.networks["target_actor"] = target_actor_;
    ck.networks["target_critic1"] = target_critic1_;
    ck.networks["target_critic2"] = target_critic2_;
    ck.adam_states["actor"] = actor_adam_;
    ck.adam_states["critic1"] = critic1_adam_;
    ck.adam_states["critic2"] = critic2_adam_;
    ck.counters = counters;
    ck.counters["update_count"] = update_count_;
    ck.counters["actor_update_count"] = actor_update_count_;
    return ck;
}

void TD3Agent::restore(const Checkpoint& ck) {
    if (ck.config_hash != config_.hash()) {
        throw std::runtime_error("checkpoint config hash mismatch");
    }
    auto need_net = [&](const char* name) -> const Network& {
        auto it = ck.networks.find(name);
        if (it == ck.networks.end()) {
            throw std::runtime_error(std::string("checkpoint missing network ") + name);
        }
        return it->second;
    };
    auto need_adam = [&](const char* name) -> const AdamState& {
        auto it = ck.adam_states.find(name);
        if (it == ck.adam_states.end()) {
            throw std::runtime_error(std::string("checkpoint missing adam state ") + name);
        }
        return it->second;
    };
    actor_ = need_net("actor");
    critic1_ = need_net("critic1");
    critic2_ = need_net("critic2");
    target_actor_ = need_net("target_actor");
    target_critic1_ = need_net("target_critic1");
    target_critic2_ = need_net("target_critic2");
    actor_adam_ = need_adam("actor");
    critic1_adam_ = need_adam("critic1");
    critic2_adam_ = need_adam("critic2");
    if (auto it = ck.counters.find("update_count"); it != ck.counters.end()) {
        update_count_ = it->second;
    }
    if (auto it = ck.counters.find("actor_update_count"); it != ck.counters.end()) {
        actor_update_count_ = it->second;
    }
}

TaskSpec TaskSampler::sample(const LocalFrame& frame, std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> ulat(region.lat_min_deg, region.lat_max_deg);
    std::uniform_real_distribution<double> ulon(region.lon_min_deg, region.lon_max_deg);
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        GeoPosition origin = GeoPosition::make(ulat(rng), ulon(rng));
        GeoPosition dest = GeoPosition::make(ulat(rng), ulon(rng));
        double d = frame.distance_m(origin, dest);
        if (d >= min_separation_m && d <= max_separation_m) {
            TaskSpec task;
            task.origin = origin;
            task.destination = dest;
            task.epoch = epoch;
            task.seed = rng();
            return task;
        }
    }
    throw std::runtime_error("task sampling failed: region too small for the separation band");
}

std::vector<TrainEpisodeLog> train_td3(NavEnv& env, TD3Agent& agent, const TaskSampler& sampler,
                                       const TrainOptions& options, std::mt19937_64& rng) {
    std::vector<TrainEpisodeLog> log;
    if (options.episodes <= 0) return log;

    const TD3Config& cfg = agent.config();
    std::uint64_t total_steps = 0;
    int window = cfg.log_window;

    for (int ep = 0; ep < options.episodes; ++ep) {
        TaskSpec task = sampler.sample(env.frame(), rng);
        NavState state;
        try {
            state = env.reset(task);
        } catch (const std::invalid_argument& e) {
            std::cerr << "warning: skipping unusable task (" << e.what() << ")\n";
            continue;
        }
        double ep_return = 0.0;
        int steps = 0;
        bool success = false;
        bool done = false;
        while (!done) {
            NavAction action = total_steps < static_cast<std::uint64_t>(cfg.warmup_steps)
                                   ? agent.random_action(rng)
                                   : agent.select_action(state, /*explore=*/true, rng);
            StepResult res = env.step(action);
            Transition t;
            t.state = agent.normalize_state(state);
            t.action = agent.normalize_action(action);
            t.reward = std::clamp(res.reward, cfg.reward_clip_min, cfg.reward_clip_max);
            t.next_state = agent.normalize_state(res.state);
            // time-limit truncations are not true terminals; keep bootstrapping
            // through them (reference-TD3 convention)
            t.done = res.done && !res.info.timeout;
            agent.buffer().add(t);
            total_steps += 1;
            steps += 1;
            ep_return += res.reward;
            state = res.state;
            done = res.done;
            success = res.info.success;
            if (total_steps > static_cast<std::uint64_t>(cfg.warmup_steps)) {
                agent.update(rng);
            }
        }
        TrainEpisodeLog row;
        row.episode = options.first_episode + ep;
        row.steps = steps;
        row.episode_return = ep_return;
        row.success = success;
        int lo = std::max(0, static_cast<int>(log.size()) + 1 - window);
        double sum_r = row.episode_return;
        double sum_s = row.success ? 1.0 : 0.0;
        for (int k = lo; k < static_cast<int>(log.size()); ++k) {
            sum_r += log[k].episode_return;
            sum_s += log[k].success ? 1.0 : 0.0;
        }
        int count = static_cast<int>(log.size()) - lo + 1;
        row.window_return = sum_r / count;
        row.window_success = sum_s / count;
        log.push_back(row);

        if (options.checkpoint_dir && cfg.checkpoint_interval > 0 &&
            row.episode % cfg.checkpoint_interval == 0) {
            char name[64];
            std::snprintf(name, sizeof(name), "checkpoint_ep%06d.bin", row.episode);
            agent.make_checkpoint({{"episodes_done", static_cast<std::uint64_t>(row.episode)}})
                .save(*options.checkpoint_dir / name);
        }
    }
    if (options.checkpoint_dir) {
        std::uint64_t done_eps = static_cast<std::uint64_t>(options.first_episode - 1 +
                                                            options.episodes);
        agent.make_checkpoint({{"episodes_done", done_eps}})
            .save(*options.checkpoint_dir / "checkpoint_final.bin");
    }
    return log;
}

void write_training_log(const std::vector<TrainEpisodeLog>& log,
                        const std::filesystem::path& path, bool append) {
    std::ofstream out(path, append ? (std::ios::binary | std::ios::app) : std::ios::binary);
    if (!out) throw std::runtime_error("cannot write training log: " + path.string());
    if (!append) out << "episode,steps,return,success,window_return,window_sr\n";
    for (const TrainEpisodeLog& r : log) {
        out << r.episode << ',' << r.steps << ',' << csv::format_double(r.episode_return) << ','
            << (r.success ? 1 : 0) << ',' << csv::format_double(r.window_return) << ','
            << csv::format_double(r.window_success) << "\n";
    }
}

EpisodeTrace run_policy_episode(NavEnv& env, const TD3Agent& agent, const TaskSpec& task) {
    std::mt19937_64 unused(0);
    NavState state = env.reset(task);
    bool done = false;
    while (!done) {
        NavAction action = agent.select_action(state, /*explore=*/false, unused);
        StepResult res = env.step(action);
        state = res.state;
        done = res.done;
    }
    return env.trace();
}

}  // namespace geonav
