#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "geonav/checkpoint.hpp"
#include "geonav/neural.hpp"

using namespace geonav;

namespace {

// scalar quadratic loss over a batch; the oracle side recomputes it from
// scratch for finite differences
double batch_loss(const Network& net, const std::vector<double>& inputs, int batch,
                  const std::vector<double>& targets) {
    ForwardCache cache;
    net.forward_batch(inputs, batch, cache);
    const std::vector<double>& y = cache.activations.back();
    double loss = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        double e = y[k] - targets[k];
        loss += e * e;
    }
    return loss;
}

}  // namespace

TEST_CASE("identity layer passes input through") {
    Network net(3, {}, 3, Activation::kRelu, Activation::kIdentity);
    auto& layer = net.layers()[0];
    for (int o = 0; o < 3; ++o) layer.weights[o * 3 + o] = 1.0;
    std::vector<double> in{0.5, -1.25, 2.0};
    auto out = net.forward(in);
    CHECK(out == in);
}

TEST_CASE("relu zeroes all-negative pre-activations") {
    Network net(2, {}, 4, Activation::kRelu, Activation::kRelu);
    auto& layer = net.layers()[0];
    for (double& w : layer.weights) w = -1.0;
    for (double& b : layer.bias) b = -0.1;
    auto out = net.forward(std::vector<double>{1.0, 2.0});
    for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("paper-sized network produces a finite 2-vector") {
    std::mt19937_64 rng(1);
    Network net(8, {512, 512, 512}, 2, Activation::kRelu, Activation::kTanh);
    net.init_uniform(rng);
    std::vector<double> in(8, 0.3);
    auto out = net.forward(in);
    REQUIRE(out.size() == 2);
    for (double v : out) {
        CHECK(std::isfinite(v));
        CHECK(std::abs(v) <= 1.0);
    }
    CHECK(net.parameter_count() == 8 * 512 + 512 + 512 * 512 + 512 + 512 * 512 + 512 +
                                       512 * 2 + 2);
}

TEST_CASE("forward is deterministic and validates shapes") {
    std::mt19937_64 rng(2);
    Network net(4, {16}, 3, Activation::kRelu, Activation::kIdentity);
    net.init_uniform(rng);
    std::vector<double> in{0.1, -0.2, 0.3, 0.7};
    auto a = net.forward(in);
    auto b = net.forward(in);
    CHECK(a == b);
    CHECK_THROWS_AS(net.forward(std::vector<double>{1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("single linear layer gradient equals the analytic form") {
    Network net(3, {}, 1, Activation::kRelu, Activation::kIdentity);
    auto& layer = net.layers()[0];
    layer.weights = {0.2, -0.4, 0.6};
    layer.bias = {0.1};
    std::vector<double> x{1.0, 2.0, -0.5};
    double target = 0.7;
    ForwardCache cache;
    net.forward_batch(x, 1, cache);
    double y = cache.activations.back()[0];
    std::vector<double> outgrad{2.0 * (y - target)};
    NetworkGradients grads;
    net.backward_batch(cache, outgrad, grads);
    for (int i = 0; i < 3; ++i) {
        CHECK(grads.weights[0][i] == doctest::Approx(2.0 * (y - target) * x[i]).epsilon(1e-12));
    }
    CHECK(grads.bias[0][0] == doctest::Approx(2.0 * (y - target)).epsilon(1e-12));
}

TEST_CASE("zero output gradient gives zero parameter gradients") {
    std::mt19937_64 rng(3);
    Network net(4, {8, 8}, 2, Activation::kRelu, Activation::kTanh);
    net.init_uniform(rng);
    std::vector<double> in(4 * 3, 0.25);
    ForwardCache cache;
    net.forward_batch(in, 3, cache);
    NetworkGradients grads;
    net.backward_batch(cache, std::vector<double>(2 * 3, 0.0), grads);
    for (const auto& w : grads.weights)
        for (double v : w) CHECK(v == 0.0);
    for (const auto& b : grads.bias)
        for (double v : b) CHECK(v == 0.0);
}

TEST_CASE("analytic gradients match central finite differences") {
    std::mt19937_64 rng(4);
    struct Spec {
        std::vector<int> hidden;
        Activation hid, out;
        int in_dim, out_dim;
    };
    const Spec specs[] = {
        {{8}, Activation::kTanh, Activation::kIdentity, 5, 2},
        {{8, 6}, Activation::kRelu, Activation::kTanh, 4, 3},
        {{16, 16, 8}, Activation::kRelu, Activation::kIdentity, 6, 1},
        {{64}, Activation::kTanh, Activation::kTanh, 10, 2},
    };
    const double fd_step = 1e-6;
    const int batch = 3;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (const Spec& spec : specs) {
        Network net(spec.in_dim, spec.hidden, spec.out_dim, spec.hid, spec.out);
        net.init_uniform(rng);
        std::vector<double> inputs(spec.in_dim * batch), targets(spec.out_dim * batch);
        for (double& v : inputs) v = u(rng);
        for (double& v : targets) v = u(rng);

        ForwardCache cache;
        net.forward_batch(inputs, batch, cache);
        const std::vector<double>& y = cache.activations.back();
        std::vector<double> outgrad(y.size());
        for (std::size_t k = 0; k < y.size(); ++k) outgrad[k] = 2.0 * (y[k] - targets[k]);
        NetworkGradients grads;
        std::vector<double> input_grads;
        net.backward_batch(cache, outgrad, grads, &input_grads);

        auto check_close = [&](double analytic, double fd) {
            CHECK(std::abs(analytic - fd) < 1e-5 * std::max({1.0, std::abs(analytic),
                                                             std::abs(fd)}));
        };
        for (std::size_t l = 0; l < net.layers().size(); ++l) {
            auto& layer = net.layers()[l];
            for (std::size_t k = 0; k < layer.weights.size(); ++k) {
                double save = layer.weights[k];
                layer.weights[k] = save + fd_step;
                double lp = batch_loss(net, inputs, batch, targets);
                layer.weights[k] = save - fd_step;
                double lm = batch_loss(net, inputs, batch, targets);
                layer.weights[k] = save;
                check_close(grads.weights[l][k], (lp - lm) / (2.0 * fd_step));
            }
            for (std::size_t k = 0; k < layer.bias.size(); ++k) {
                double save = layer.bias[k];
                layer.bias[k] = save + fd_step;
                double lp = batch_loss(net, inputs, batch, targets);
                layer.bias[k] = save - fd_step;
                double lm = batch_loss(net, inputs, batch, targets);
                layer.bias[k] = save;
                check_close(grads.bias[l][k], (lp - lm) / (2.0 * fd_step));
            }
        }
        // the input gradient supports chaining dQ/da through the actor
        for (std::size_t k = 0; k < inputs.size(); ++k) {
            double save = inputs[k];
            inputs[k] = save + fd_step;
            double lp = batch_loss(net, inputs, batch, targets);
            inputs[k] = save - fd_step;
            double lm = batch_loss(net, inputs, batch, targets);
            inputs[k] = save;
            check_close(input_grads[k], (lp - lm) / (2.0 * fd_step));
        }
    }
}

TEST_CASE("adam first step moves by at most the learning rate") {
    Network net(2, {}, 1, Activation::kRelu, Activation::kIdentity);
    net.layers()[0].weights = {0.0, 0.0};
    net.layers()[0].bias = {0.0};
    AdamState state = AdamState::for_network(net, 1e-3);
    NetworkGradients grads;
    grads.match_shape(net.layers());
    grads.weights[0] = {0.5, -2.0};
    grads.bias[0] = {1.0};
    adam_step(net, grads, state);
    CHECK(net.layers()[0].weights[0] == doctest::Approx(-1e-3).epsilon(1e-4));
    CHECK(net.layers()[0].weights[1] == doctest::Approx(1e-3).epsilon(1e-4));
    CHECK(net.layers()[0].bias[0] == doctest::Approx(-1e-3).epsilon(1e-4));
    CHECK(state.step == 1);
}

TEST_CASE("adam ignores nothing and rejects non-finite gradients") {
    std::mt19937_64 rng(6);
    Network net(3, {4}, 2, Activation::kRelu, Activation::kTanh);
    net.init_uniform(rng);
    AdamState state = AdamState::for_network(net, 1e-3);
    NetworkGradients grads;
    grads.match_shape(net.layers());

    SUBCASE("zero gradients leave parameters unchanged") {
        Network before = net;
        adam_step(net, grads, state);
        for (std::size_t l = 0; l < net.layers().size(); ++l) {
            CHECK(net.layers()[l].weights == before.layers()[l].weights);
            CHECK(net.layers()[l].bias == before.layers()[l].bias);
        }
    }
    SUBCASE("identical calls from identical states match bit-for-bit") {
        grads.weights[0][0] = 0.3;
        grads.bias[1][1] = -0.7;
        Network net2 = net;
        AdamState state2 = state;
        adam_step(net, grads, state);
        adam_step(net2, grads, state2);
        for (std::size_t l = 0; l < net.layers().size(); ++l) {
            CHECK(net.layers()[l].weights == net2.layers()[l].weights);
            CHECK(net.layers()[l].bias == net2.layers()[l].bias);
        }
        CHECK(state.step == state2.step);
    }
    SUBCASE("non-finite gradient rejected, parameters untouched") {
        grads.weights[0][1] = std::numeric_limits<double>::quiet_NaN();
        Network before = net;
        CHECK_THROWS_AS(adam_step(net, grads, state), std::runtime_error);
        CHECK(net.layers()[0].weights == before.layers()[0].weights);
        CHECK(state.step == 0);
    }
}

TEST_CASE("soft_update blends element-wise") {
    std::mt19937_64 rng(8);
    Network online(3, {5}, 2, Activation::kRelu, Activation::kTanh);
    online.init_uniform(rng);
    Network target(3, {5}, 2, Activation::kRelu, Activation::kTanh);
    target.init_uniform(rng);

    SUBCASE("tau=1 copies, tau=0 is a no-op") {
        Network t1 = target;
        soft_update(t1, online, 1.0);
        for (std::size_t l = 0; l < t1.layers().size(); ++l) {
            CHECK(t1.layers()[l].weights == online.layers()[l].weights);
        }
        Network t0 = target;
        soft_update(t0, online, 0.0);
        for (std::size_t l = 0; l < t0.layers().size(); ++l) {
            CHECK(t0.layers()[l].weights == target.layers()[l].weights);
        }
    }
    SUBCASE("tau=0.5 on scalars") {
        Network a(1, {}, 1, Activation::kIdentity, Activation::kIdentity);
        Network b = a;
        a.layers()[0].weights = {0.0};
        a.layers()[0].bias = {0.0};
        b.layers()[0].weights = {2.0};
        b.layers()[0].bias = {2.0};
        soft_update(a, b, 0.5);
        CHECK(a.layers()[0].weights[0] == 1.0);
        CHECK(a.layers()[0].bias[0] == 1.0);
    }
    SUBCASE("soft_update is a contraction toward the online parameters") {
        double before = 0.0, after = 0.0;
        Network t = target;
        for (std::size_t l = 0; l < t.layers().size(); ++l)
            for (std::size_t k = 0; k < t.layers()[l].weights.size(); ++k)
                before += std::pow(t.layers()[l].weights[k] - online.layers()[l].weights[k], 2);
        soft_update(t, online, 0.005);
        for (std::size_t l = 0; l < t.layers().size(); ++l)
            for (std::size_t k = 0; k < t.layers()[l].weights.size(); ++k)
                after += std::pow(t.layers()[l].weights[k] - online.layers()[l].weights[k], 2);
        CHECK(after < before);
        CHECK(std::sqrt(after) == doctest::Approx(0.995 * std::sqrt(before)).epsilon(1e-9));
    }
    SUBCASE("shape mismatch throws") {
        Network other(3, {6}, 2, Activation::kRelu, Activation::kTanh);
        CHECK_THROWS_AS(soft_update(other, online, 0.5), std::invalid_argument);
    }
}

TEST_CASE("checkpoint container round-trips bit-exactly") {
    std::mt19937_64 rng(10);
    Checkpoint ck;
    ck.config_hash = 0xdeadbeefcafe1234ull;
    Network a(8, {32, 32}, 2, Activation::kRelu, Activation::kTanh);
    a.init_uniform(rng);
    Network c(10, {32, 32}, 1, Activation::kRelu, Activation::kIdentity);
    c.init_uniform(rng);
    ck.networks["actor"] = a;
    ck.networks["critic1"] = c;
    AdamState st = AdamState::for_network(a, 1e-3);
    st.step = 777;
    st.m_w[0][3] = 0.125;
    st.v_b[1][5] = 1e-9;
    ck.adam_states["actor"] = st;
    ck.counters["episodes_done"] = 4242;

    auto path = std::filesystem::temp_directory_path() / "geonav_ckpt_test.bin";
    ck.save(path);
    Checkpoint back = Checkpoint::load(path);
    CHECK(back.config_hash == ck.config_hash);
    REQUIRE(back.networks.count("actor") == 1);
    REQUIRE(back.networks.count("critic1") == 1);
    for (const auto& [name, net] : ck.networks) {
        const Network& b = back.networks.at(name);
        REQUIRE(b.layers().size() == net.layers().size());
        for (std::size_t l = 0; l < net.layers().size(); ++l) {
            CHECK(b.layers()[l].weights == net.layers()[l].weights);
            CHECK(b.layers()[l].bias == net.layers()[l].bias);
            CHECK(b.layers()[l].activation == net.layers()[l].activation);
        }
    }
    const AdamState& bst = back.adam_states.at("actor");
    CHECK(bst.step == 777);
    CHECK(bst.m_w[0][3] == 0.125);
    CHECK(bst.v_b[1][5] == 1e-9);
    CHECK(bst.learning_rate == st.learning_rate);
    CHECK(back.counters.at("episodes_done") == 4242);

    SUBCASE("wrong magic is rejected") {
        auto bad = std::filesystem::temp_directory_path() / "geonav_ckpt_bad.bin";
        std::ofstream(bad, std::ios::binary) << "NOPE and some junk";
        CHECK_THROWS_AS(Checkpoint::load(bad), std::runtime_error);
        std::filesystem::remove(bad);
    }
    std::filesystem::remove(path);
}

TEST_CASE("seed derivation is stable and tag-sensitive") {
    CHECK(derive_seed(1, "a") == derive_seed(1, "a"));
    CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
    CHECK(derive_seed(1, "a") != derive_seed(2, "a"));
}
