#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace geonav {

enum class Activation : std::uint8_t { kIdentity = 0, kRelu = 1, kTanh = 2 };

struct DenseLayer {
    int in_dim = 0;
    int out_dim = 0;
    std::vector<double> weights;  // row-major, out_dim x in_dim
    std::vector<double> bias;     // out_dim
    Activation activation = Activation::kIdentity;
};

/// Per-layer parameter gradients, summed over the batch that produced them.
struct NetworkGradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> bias;
    void match_shape(const std::vector<DenseLayer>& layers);
    void clear();
    bool all_finite() const;
};

/// Workspace for one batched forward pass, reused across calls.
struct ForwardCache {
    int batch = 0;
    std::vector<std::vector<double>> activations;  // [L+1], batch x dim, [0] = input
    std::vector<std::vector<double>> pre;          // [L], pre-activation values
};

/// Fixed stack of dense layers in 64-bit floats. Forward/backward are exact
/// and deterministic; shapes are validated on every call.
class Network {
public:
    Network() = default;
    Network(int input_dim, const std::vector<int>& hidden_dims, int output_dim,
            Activation hidden_activation, Activation output_activation);

    /// Uniform init in +-1/sqrt(fan_in) for weights and biases.
    void init_uniform(std::mt19937_64& rng);

    int input_dim() const;
    int output_dim() const;
    const std::vector<DenseLayer>& layers() const { return layers_; }
    std::vector<DenseLayer>& layers() { return layers_; }
    std::size_t parameter_count() const;
    bool same_shape(const Network& other) const;
    bool all_finite() const;

    /// Single-sample forward pass.
    std::vector<double> forward(std::span<const double> input) const;

    /// Batched forward over row-major inputs (batch x input_dim); fills the
    /// cache needed for backward and returns outputs (batch x output_dim)
    /// in cache.activations.back().
    void forward_batch(std::span<const double> inputs, int batch, ForwardCache& cache) const;

    /// Reverse pass from d(loss)/d(outputs); accumulates parameter gradients
    /// (summed over the batch) into grads and writes d(loss)/d(inputs) into
    /// input_grads (batch x input_dim) when non-null.
    void backward_batch(const ForwardCache& cache, std::span<const double> output_grads,
                        NetworkGradients& grads, std::vector<double>* input_grads = nullptr) const;

private:
    std::vector<DenseLayer> layers_;
};

/// Bias-corrected Adam accumulator for one network.
struct AdamState {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::int64_t step = 0;
    std::vector<std::vector<double>> m_w, v_w, m_b, v_b;

    static AdamState for_network(const Network& net, double learning_rate);
};

/// One Adam step. Throws std::runtime_error on non-finite gradients, leaving
/// parameters untouched.
void adam_step(Network& net, const NetworkGradients& grads, AdamState& state);

/// target <- tau * online + (1 - tau) * target, element-wise.
void soft_update(Network& target, const Network& online, double tau);

}  // namespace geonav
