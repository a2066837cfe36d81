#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rescuesim/nnet.hpp"

using namespace rescuesim;

namespace {

DenseNet random_net(Rng& rng) {
    int n_layers = 1 + rng.uniform_int(3);
    std::vector<int> dims{1 + rng.uniform_int(16)};
    std::vector<Activation> acts;
    const Activation pool[] = {Activation::Identity, Activation::ReLU,
                               Activation::ELU, Activation::Abs};
    for (int i = 0; i < n_layers; ++i) {
        dims.push_back(1 + rng.uniform_int(16));
        acts.push_back(pool[rng.uniform_int(4)]);
    }
    return DenseNet::make(dims, acts, rng);
}

// Scalar loss L = sum(y) for gradient checking.
double sum_loss(const DenseNet& net, const std::vector<double>& x) {
    double s = 0;
    for (double v : forward(net, x)) s += v;
    return s;
}

}  // namespace

TEST_CASE("identity layer passes input through") {
    DenseNet net;
    Layer l;
    l.in = 3;
    l.out = 3;
    l.act = Activation::Identity;
    l.weights = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    l.bias = {0, 0, 0};
    net.layers.push_back(l);
    std::vector<double> x{0.5, -2.0, 3.5};
    CHECK(forward(net, x) == x);
}

TEST_CASE("relu clips negatives") {
    DenseNet net;
    net.layers.push_back(Layer{1, 1, Activation::ReLU, {-1.0}, {0.0}});
    std::vector<double> x{2.0};
    CHECK(forward(net, x)[0] == 0.0);
}

TEST_CASE("two-layer hand computation") {
    // y = W2 * relu(W1 x + b1) + b2 with x = [1, 2]
    DenseNet net;
    net.layers.push_back(Layer{2, 2, Activation::ReLU, {1, -1, 2, 0.5}, {0.5, -1}});
    net.layers.push_back(Layer{2, 1, Activation::Identity, {1, 3}, {0.25}});
    // z1 = [1*1 - 1*2 + 0.5, 2*1 + 0.5*2 - 1] = [-0.5, 2]; relu -> [0, 2]
    // y = 1*0 + 3*2 + 0.25 = 6.25
    std::vector<double> x{1, 2};
    CHECK(forward(net, x)[0] == doctest::Approx(6.25).epsilon(1e-12));
}

TEST_CASE("forward validates dimensions and is pure") {
    Rng rng(3);
    DenseNet net = DenseNet::make({4, 8, 2},
                                  {Activation::ReLU, Activation::Identity}, rng);
    std::vector<double> x{1, 2, 3};
    CHECK_THROWS_AS(forward(net, x), ValidationError);
    std::vector<double> ok{1, 2, 3, 4};
    CHECK(forward(net, ok) == forward(net, ok));
}

TEST_CASE("backward: zero upstream gradient yields zero gradients") {
    Rng rng(4);
    DenseNet net = DenseNet::make({3, 5, 2},
                                  {Activation::ELU, Activation::Identity}, rng);
    std::vector<double> x{0.1, -0.2, 0.3};
    auto cache = forward_cached(net, x);
    Gradients g = Gradients::zeros_like(net);
    backward(net, cache, std::vector<double>{0.0, 0.0}, g);
    CHECK(g.squared_norm() == 0.0);
}

TEST_CASE("backward: single linear layer analytic derivative") {
    DenseNet net;
    net.layers.push_back(Layer{1, 1, Activation::Identity, {2.0}, {0.0}});
    std::vector<double> x{3.0};
    auto cache = forward_cached(net, x);
    Gradients g = Gradients::zeros_like(net);
    auto dx = backward(net, cache, std::vector<double>{1.0}, g);
    CHECK(g.dw[0][0] == doctest::Approx(3.0));
    CHECK(g.db[0][0] == doctest::Approx(1.0));
    CHECK(dx[0] == doctest::Approx(2.0));
}

TEST_CASE("backward rejects stale caches") {
    Rng rng(5);
    DenseNet a = DenseNet::make({2, 3, 1}, {Activation::ReLU, Activation::Identity}, rng);
    DenseNet b = DenseNet::make({2, 4, 1}, {Activation::ReLU, Activation::Identity}, rng);
    std::vector<double> x{1, 1};
    auto cache = forward_cached(a, x);
    Gradients g = Gradients::zeros_like(b);
    CHECK_THROWS_AS(backward(b, cache, std::vector<double>{1.0}, g), ValidationError);
}

TEST_CASE("gradients match central finite differences on 50 random nets") {
    Rng rng(2025);
    for (int trial = 0; trial < 50; ++trial) {
        DenseNet net = random_net(rng);
        std::vector<double> x(net.input_dim());
        for (double& v : x) v = rng.uniform_range(-1.5, 1.5);

        auto cache = forward_cached(net, x);
        Gradients g = Gradients::zeros_like(net);
        std::vector<double> ones(net.output_dim(), 1.0);
        auto dx = backward(net, cache, ones, g);

        const double h = 1e-5;
        // Check every parameter gradient.
        for (size_t li = 0; li < net.layers.size(); ++li) {
            for (size_t j = 0; j < net.layers[li].weights.size(); ++j) {
                double saved = net.layers[li].weights[j];
                net.layers[li].weights[j] = saved + h;
                double up = sum_loss(net, x);
                net.layers[li].weights[j] = saved - h;
                double down = sum_loss(net, x);
                net.layers[li].weights[j] = saved;
                double fd = (up - down) / (2 * h);
                CHECK(oracle::grad_close(g.dw[li][j], fd, 1e-4, 1e-7));
            }
            for (size_t j = 0; j < net.layers[li].bias.size(); ++j) {
                double saved = net.layers[li].bias[j];
                net.layers[li].bias[j] = saved + h;
                double up = sum_loss(net, x);
                net.layers[li].bias[j] = saved - h;
                double down = sum_loss(net, x);
                net.layers[li].bias[j] = saved;
                double fd = (up - down) / (2 * h);
                CHECK(oracle::grad_close(g.db[li][j], fd, 1e-4, 1e-7));
            }
        }
        // Input gradients too.
        for (size_t i = 0; i < x.size(); ++i) {
            double saved = x[i];
            x[i] = saved + h;
            double up = sum_loss(net, x);
            x[i] = saved - h;
            double down = sum_loss(net, x);
            x[i] = saved;
            CHECK(oracle::grad_close(dx[i], (up - down) / (2 * h), 1e-4, 1e-7));
        }
    }
}

TEST_CASE("abs activation output is non-negative") {
    Rng rng(6);
    DenseNet net = DenseNet::make({4, 6}, {Activation::Abs}, rng);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> x(4);
        for (double& v : x) v = rng.uniform_range(-5, 5);
        for (double y : forward(net, x)) CHECK(y >= 0.0);
    }
}

TEST_CASE("optimizer: zero gradients leave parameters unchanged") {
    Rng rng(7);
    DenseNet net = DenseNet::make({2, 3}, {Activation::Identity}, rng);
    DenseNet before = net;
    RmsProp opt(0.1);
    opt.step(net, Gradients::zeros_like(net));
    for (size_t i = 0; i < net.layers[0].weights.size(); ++i)
        CHECK(net.layers[0].weights[i] == before.layers[0].weights[i]);
}

TEST_CASE("optimizer: single weight decreases under positive gradient") {
    DenseNet net;
    net.layers.push_back(Layer{1, 1, Activation::Identity, {1.0}, {0.0}});
    RmsProp opt(0.1);
    Gradients g = Gradients::zeros_like(net);
    g.dw[0][0] = 1.0;
    opt.step(net, g);
    // s = 0.01, step = 0.1 * 1 / (0.1 + 1e-5)
    double expect = 1.0 - 0.1 * 1.0 / (std::sqrt(0.01) + 1e-5);
    CHECK(net.layers[0].weights[0] == doctest::Approx(expect).epsilon(1e-12));
    CHECK(net.layers[0].weights[0] < 1.0);
}

TEST_CASE("optimizer: second identical step differs via accumulator") {
    DenseNet net;
    net.layers.push_back(Layer{1, 1, Activation::Identity, {1.0}, {0.0}});
    RmsProp opt(0.1);
    Gradients g = Gradients::zeros_like(net);
    g.dw[0][0] = 1.0;
    opt.step(net, g);
    double first_delta = 1.0 - net.layers[0].weights[0];
    double w1 = net.layers[0].weights[0];
    opt.step(net, g);
    double second_delta = w1 - net.layers[0].weights[0];
    // s2 = 0.99*0.01 + 0.01 = 0.0199 -> step = 0.1/(sqrt(0.0199)+1e-5)
    double expect2 = 0.1 / (std::sqrt(0.0199) + 1e-5);
    CHECK(second_delta == doctest::Approx(expect2).epsilon(1e-9));
    CHECK(second_delta != doctest::Approx(first_delta).epsilon(1e-9));
}

TEST_CASE("optimizer rejects non-finite gradients") {
    DenseNet net;
    net.layers.push_back(Layer{1, 1, Activation::Identity, {1.0}, {0.0}});
    RmsProp opt(0.1);
    Gradients g = Gradients::zeros_like(net);
    g.dw[0][0] = std::nan("");
    CHECK_THROWS_AS(opt.step(net, g), DivergenceError);
}

TEST_CASE("checkpoint round-trip is bit-exact") {
    Rng rng(8);
    DenseNet net = DenseNet::make({5, 9, 3},
                                  {Activation::ELU, Activation::Identity}, rng);
    // Push some odd values through an update to avoid round numbers.
    std::vector<double> x{0.1, 0.2, 0.3, 0.4, 0.5};
    auto cache = forward_cached(net, x);
    Gradients g = Gradients::zeros_like(net);
    backward(net, cache, std::vector<double>{1.0, -0.3, 0.7}, g);
    RmsProp opt(3e-3);
    opt.step(net, g);

    std::string text = net_to_json(net).dump();
    DenseNet loaded = net_from_json(nlohmann::json::parse(text));
    REQUIRE(loaded.layers.size() == net.layers.size());
    for (size_t li = 0; li < net.layers.size(); ++li) {
        for (size_t j = 0; j < net.layers[li].weights.size(); ++j)
            CHECK(loaded.layers[li].weights[j] == net.layers[li].weights[j]);
        for (size_t j = 0; j < net.layers[li].bias.size(); ++j)
            CHECK(loaded.layers[li].bias[j] == net.layers[li].bias[j]);
    }
}
