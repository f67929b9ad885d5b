#include "geonav/neural.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace geonav {

namespace {

inline double activate(double z, Activation a) {
    switch (a) {
        case Activation::kIdentity: return z;
        case Activation::kRelu: return z > 0.0 ? z : 0.0;
        case Activation::kTanh: return std::tanh(z);
    }
    return z;
}

// Derivative given pre-activation z and the already-computed output y.
inline double activate_grad(double z, double y, Activation a) {
    switch (a) {
        case Activation::kIdentity: return 1.0;
        case Activation::kRelu: return z > 0.0 ? 1.0 : 0.0;
        case Activation::kTanh: return 1.0 - y * y;
    }
    return 1.0;
}

}  // namespace

void NetworkGradients::match_shape(const std::vector<DenseLayer>& layers) {
    weights.resize(layers.size());
    bias.resize(layers.size());
    for (std::size_t l = 0; l < layers.size(); ++l) {
        weights[l].assign(layers[l].weights.size(), 0.0);
        bias[l].assign(layers[l].bias.size(), 0.0);
    }
}

void NetworkGradients::clear() {
    for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
    for (auto& b : bias) std::fill(b.begin(), b.end(), 0.0);
}

bool NetworkGradients::all_finite() const {
    for (const auto& w : weights)
        for (double v : w)
            if (!std::isfinite(v)) return false;
    for (const auto& b : bias)
        for (double v : b)
            if (!std::isfinite(v)) return false;
    return true;
}

Network::Network(int input_dim, const std::vector<int>& hidden_dims, int output_dim,
                 Activation hidden_activation, Activation output_activation) {
    if (input_dim < 1 || output_dim < 1) throw std::invalid_argument("bad network dims");
    int prev = input_dim;
    for (int h : hidden_dims) {
        if (h < 1) throw std::invalid_argument("bad hidden dim");
        layers_.push_back(DenseLayer{prev, h, std::vector<double>(static_cast<std::size_t>(h) * prev, 0.0),
                                     std::vector<double>(h, 0.0), hidden_activation});
        prev = h;
    }
    layers_.push_back(DenseLayer{prev, output_dim,
                                 std::vector<double>(static_cast<std::size_t>(output_dim) * prev, 0.0),
                                 std::vector<double>(output_dim, 0.0), output_activation});
}

void Network::init_uniform(std::mt19937_64& rng) {
    for (DenseLayer& layer : layers_) {
        double bound = 1.0 / std::sqrt(static_cast<double>(layer.in_dim));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (double& w : layer.weights) w = dist(rng);
        for (double& b : layer.bias) b = dist(rng);
    }
}

int Network::input_dim() const {
    if (layers_.empty()) throw std::logic_error("empty network");
    return layers_.front().in_dim;
}

int Network::output_dim() const {
    if (layers_.empty()) throw std::logic_error("empty network");
    return layers_.back().out_dim;
}

std::size_t Network::parameter_count() const {
    std::size_t n = 0;
    for (const DenseLayer& l : layers_) n += l.weights.size() + l.bias.size();
    return n;
}

bool Network::same_shape(const Network& other) const {
    if (layers_.size() != other.layers_.size()) return false;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        if (layers_[l].in_dim != other.layers_[l].in_dim ||
            layers_[l].out_dim != other.layers_[l].out_dim)
            return false;
    }
    return true;
}

bool Network::all_finite() const {
    for (const DenseLayer& l : layers_) {
        for (double v : l.weights)
            if (!std::isfinite(v)) return false;
        for (double v : l.bias)
            if (!std::isfinite(v)) return false;
    }
    return true;
}

std::vector<double> Network::forward(std::span<const double> input) const {
    if (static_cast<int>(input.size()) != input_dim()) {
        throw std::invalid_argument("forward: input size mismatch");
    }
    std::vector<double> cur(input.begin(), input.end());
    std::vector<double> next;
    for (const DenseLayer& layer : layers_) {
        next.assign(layer.out_dim, 0.0);
        for (int o = 0; o < layer.out_dim; ++o) {
            const double* w = layer.weights.data() + static_cast<std::size_t>(o) * layer.in_dim;
            double z = layer.bias[o];
            for (int i = 0; i < layer.in_dim; ++i) z += w[i] * cur[i];
            next[o] = activate(z, layer.activation);
        }
        cur.swap(next);
    }
    return cur;
}

void Network::forward_batch(std::span<const double> inputs, int batch, ForwardCache& cache) const {
    const int in_dim = input_dim();
    if (batch < 1 || static_cast<int>(inputs.size()) != batch * in_dim) {
        throw std::invalid_argument("forward_batch: input size mismatch");
    }
    cache.batch = batch;
    cache.activations.resize(layers_.size() + 1);
    cache.pre.resize(layers_.size());
    cache.activations[0].assign(inputs.begin(), inputs.end());

    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const DenseLayer& layer = layers_[l];
        const std::vector<double>& a_in = cache.activations[l];
        std::vector<double>& z = cache.pre[l];
        std::vector<double>& a_out = cache.activations[l + 1];
        z.assign(static_cast<std::size_t>(batch) * layer.out_dim, 0.0);
        a_out.resize(z.size());
        for (int b = 0; b < batch; ++b) {
            const double* x = a_in.data() + static_cast<std::size_t>(b) * layer.in_dim;
            double* zb = z.data() + static_cast<std::size_t>(b) * layer.out_dim;
            for (int o = 0; o < layer.out_dim; ++o) {
                const double* w = layer.weights.data() + static_cast<std::size_t>(o) * layer.in_dim;
                double acc = layer.bias[o];
                for (int i = 0; i < layer.in_dim; ++i) acc += w[i] * x[i];
                zb[o] = acc;
            }
        }
        for (std::size_t k = 0; k < z.size(); ++k) a_out[k] = activate(z[k], layer.activation);
    }
}

void Network::backward_batch(const ForwardCache& cache, std::span<const double> output_grads,
                             NetworkGradients& grads, std::vector<double>* input_grads) const {
    const int batch = cache.batch;
    if (cache.activations.size() != layers_.size() + 1) {
        throw std::invalid_argument("backward_batch: cache does not match network");
    }
    if (static_cast<int>(output_grads.size()) != batch * output_dim()) {
        throw std::invalid_argument("backward_batch: output gradient size mismatch");
    }
    if (grads.weights.size() != layers_.size()) grads.match_shape(layers_);

    std::vector<double> delta(output_grads.begin(), output_grads.end());
    std::vector<double> delta_prev;

    for (std::size_t li = layers_.size(); li-- > 0;) {
        const DenseLayer& layer = layers_[li];
        const std::vector<double>& z = cache.pre[li];
        const std::vector<double>& a_out = cache.activations[li + 1];
        const std::vector<double>& a_in = cache.activations[li];

        // delta <- dL/dz for this layer
        for (int b = 0; b < batch; ++b) {
            double* db = delta.data() + static_cast<std::size_t>(b) * layer.out_dim;
            const double* zb = z.data() + static_cast<std::size_t>(b) * layer.out_dim;
            const double* yb = a_out.data() + static_cast<std::size_t>(b) * layer.out_dim;
            for (int o = 0; o < layer.out_dim; ++o) {
                db[o] *= activate_grad(zb[o], yb[o], layer.activation);
            }
        }

        std::vector<double>& gw = grads.weights[li];
        std::vector<double>& gb = grads.bias[li];
        for (int b = 0; b < batch; ++b) {
            const double* db = delta.data() + static_cast<std::size_t>(b) * layer.out_dim;
            const double* xb = a_in.data() + static_cast<std::size_t>(b) * layer.in_dim;
            for (int o = 0; o < layer.out_dim; ++o) {
                double d = db[o];
                if (d == 0.0) continue;
                double* gw_row = gw.data() + static_cast<std::size_t>(o) * layer.in_dim;
                for (int i = 0; i < layer.in_dim; ++i) gw_row[i] += d * xb[i];
                gb[o] += d;
            }
        }

        const bool need_input = li > 0 || input_grads != nullptr;
        if (need_input) {
            delta_prev.assign(static_cast<std::size_t>(batch) * layer.in_dim, 0.0);
            for (int b = 0; b < batch; ++b) {
                const double* db = delta.data() + static_cast<std::size_t>(b) * layer.out_dim;
                double* dp = delta_prev.data() + static_cast<std::size_t>(b) * layer.in_dim;
                for (int o = 0; o < layer.out_dim; ++o) {
                    double d = db[o];
                    if (d == 0.0) continue;
                    const double* w = layer.weights.data() + static_cast<std::size_t>(o) * layer.in_dim;
                    for (int i = 0; i < layer.in_dim; ++i) dp[i] += d * w[i];
                }
            }
            delta.swap(delta_prev);
        }
    }
    if (input_grads) *input_grads = delta;
}

AdamState AdamState::for_network(const Network& net, double learning_rate) {
    AdamState s;
    s.learning_rate = learning_rate;
    const auto& layers = net.layers();
    s.m_w.resize(layers.size());
    s.v_w.resize(layers.size());
    s.m_b.resize(layers.size());
    s.v_b.resize(layers.size());
    for (std::size_t l = 0; l < layers.size(); ++l) {
        s.m_w[l].assign(layers[l].weights.size(), 0.0);
        s.v_w[l].assign(layers[l].weights.size(), 0.0);
        s.m_b[l].assign(layers[l].bias.size(), 0.0);
        s.v_b[l].assign(layers[l].bias.size(), 0.0);
    }
    return s;
}

void adam_step(Network& net, const NetworkGradients& grads, AdamState& state) {
    auto& layers = net.layers();
    if (grads.weights.size() != layers.size() || state.m_w.size() != layers.size()) {
        throw std::invalid_argument("adam_step: shape mismatch");
    }
    if (!grads.all_finite()) {
        throw std::runtime_error("adam_step: non-finite gradient, update rejected");
    }
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

    auto update = [&](std::vector<double>& param, const std::vector<double>& g,
                      std::vector<double>& m, std::vector<double>& v) {
        if (param.size() != g.size()) throw std::invalid_argument("adam_step: shape mismatch");
        for (std::size_t k = 0; k < param.size(); ++k) {
            m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * g[k];
            v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * g[k] * g[k];
            double m_hat = m[k] / bc1;
            double v_hat = v[k] / bc2;
            param[k] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
        }
    };
    for (std::size_t l = 0; l < layers.size(); ++l) {
        update(layers[l].weights, grads.weights[l], state.m_w[l], state.v_w[l]);
        update(layers[l].bias, grads.bias[l], state.m_b[l], state.v_b[l]);
    }
}

void soft_update(Network& target, const Network& online, double tau) {
    if (!target.same_shape(online)) throw std::invalid_argument("soft_update: shape mismatch");
    auto& tl = target.layers();
    const auto& ol = online.layers();
    for (std::size_t l = 0; l < tl.size(); ++l) {
        for (std::size_t k = 0; k < tl[l].weights.size(); ++k) {
            tl[l].weights[k] = tau * ol[l].weights[k] + (1.0 - tau) * tl[l].weights[k];
        }
        for (std::size_t k = 0; k < tl[l].bias.size(); ++k) {
            tl[l].bias[k] = tau * ol[l].bias[k] + (1.0 - tau) * tl[l].bias[k];
        }
    }
}

}  // namespace geonav
