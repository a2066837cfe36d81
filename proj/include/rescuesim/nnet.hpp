#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rescuesim/errors.hpp"
#include "rescuesim/rng.hpp"

#include <json.hpp>

namespace rescuesim {

enum class Activation { Identity, ReLU, ELU, Abs };

struct Layer {
    int in = 0;
    int out = 0;
    Activation act = Activation::Identity;
    std::vector<double> weights;  // out x in, row-major
    std::vector<double> bias;     // out
};

// Small dense feedforward network with value semantics.
struct DenseNet {
    std::vector<Layer> layers;

    int input_dim() const { return layers.empty() ? 0 : layers.front().in; }
    int output_dim() const { return layers.empty() ? 0 : layers.back().out; }
    size_t param_count() const;
    bool finite() const;

    // dims = {in, h1, ..., out}; one activation per layer. Weights start
    // uniform in +-1/sqrt(fan_in), biases at zero.
    static DenseNet make(const std::vector<int>& dims,
                         const std::vector<Activation>& acts, Rng& rng);
};

struct ForwardCache {
    std::vector<std::vector<double>> inputs;  // input of each layer
    std::vector<std::vector<double>> pre;     // pre-activation of each layer
    std::vector<double> output;
};

struct Gradients {
    std::vector<std::vector<double>> dw;
    std::vector<std::vector<double>> db;

    static Gradients zeros_like(const DenseNet& net);
    void add_scaled(const Gradients& other, double s);
    void scale(double s);
    double squared_norm() const;
    bool finite() const;
};

std::vector<double> forward(const DenseNet& net, std::span<const double> x);
ForwardCache forward_cached(const DenseNet& net, std::span<const double> x);

// Exact reverse-mode gradients; accumulates into `grads`, returns dL/dx.
std::vector<double> backward(const DenseNet& net, const ForwardCache& cache,
                             std::span<const double> dLdy, Gradients& grads);

// RMSProp-style optimizer state for one network.
struct RmsProp {
    double lr = 5e-4;
    double decay = 0.99;
    double epsilon = 1e-5;
    std::vector<std::vector<double>> sw, sb;  // squared-gradient accumulators

    explicit RmsProp(double lr_ = 5e-4) : lr(lr_) {}
    void step(DenseNet& net, const Gradients& grads);
};

double activate(Activation a, double z);
double activate_grad(Activation a, double z);

// Bit-exact serialization (parameters as hex floats).
nlohmann::json net_to_json(const DenseNet& net);
DenseNet net_from_json(const nlohmann::json& j);

}  // namespace rescuesim
