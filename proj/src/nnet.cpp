#include "rescuesim/nnet.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace rescuesim {

namespace {

const char* act_name(Activation a) {
    switch (a) {
        case Activation::Identity: return "identity";
        case Activation::ReLU: return "relu";
        case Activation::ELU: return "elu";
        case Activation::Abs: return "abs";
    }
    return "identity";
}

Activation act_from_name(const std::string& s) {
    if (s == "identity") return Activation::Identity;
    if (s == "relu") return Activation::ReLU;
    if (s == "elu") return Activation::ELU;
    if (s == "abs") return Activation::Abs;
    throw ValidationError("unknown activation '" + s + "'");
}

std::string double_to_hex(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

double hex_to_double(const std::string& s) {
    return std::strtod(s.c_str(), nullptr);
}

}  // namespace

double activate(Activation a, double z) {
    switch (a) {
        case Activation::Identity: return z;
        case Activation::ReLU: return z > 0 ? z : 0.0;
        case Activation::ELU: return z > 0 ? z : std::expm1(z);
        case Activation::Abs: return std::fabs(z);
    }
    return z;
}

double activate_grad(Activation a, double z) {
    switch (a) {
        case Activation::Identity: return 1.0;
        case Activation::ReLU: return z > 0 ? 1.0 : 0.0;
        case Activation::ELU: return z > 0 ? 1.0 : std::exp(z);
        case Activation::Abs: return z > 0 ? 1.0 : (z < 0 ? -1.0 : 0.0);
    }
    return 1.0;
}

size_t DenseNet::param_count() const {
    size_t n = 0;
    for (const Layer& l : layers) n += l.weights.size() + l.bias.size();
    return n;
}

bool DenseNet::finite() const {
    for (const Layer& l : layers) {
        for (double w : l.weights)
            if (!std::isfinite(w)) return false;
        for (double b : l.bias)
            if (!std::isfinite(b)) return false;
    }
    return true;
}

DenseNet DenseNet::make(const std::vector<int>& dims,
                        const std::vector<Activation>& acts, Rng& rng) {
    if (dims.size() < 2) throw ValidationError("net needs at least one layer");
    if (acts.size() != dims.size() - 1)
        throw ValidationError("need one activation per layer");
    DenseNet net;
    for (size_t i = 0; i + 1 < dims.size(); ++i) {
        Layer l;
        l.in = dims[i];
        l.out = dims[i + 1];
        l.act = acts[i];
        if (l.in < 1 || l.out < 1) throw ValidationError("layer dims must be >= 1");
        double bound = 1.0 / std::sqrt(static_cast<double>(l.in));
        l.weights.resize(static_cast<size_t>(l.out) * l.in);
        for (double& w : l.weights) w = rng.uniform_range(-bound, bound);
        // Biases drawn from the same range; exact zeros would park dead units
        // right on the ReLU kink.
        l.bias.resize(l.out);
        for (double& b : l.bias) b = rng.uniform_range(-bound, bound);
        net.layers.push_back(std::move(l));
    }
    for (size_t i = 1; i < net.layers.size(); ++i)
        if (net.layers[i].in != net.layers[i - 1].out)
            throw ValidationError("layer dimensions do not chain");
    return net;
}

Gradients Gradients::zeros_like(const DenseNet& net) {
    Gradients g;
    for (const Layer& l : net.layers) {
        g.dw.emplace_back(l.weights.size(), 0.0);
        g.db.emplace_back(l.bias.size(), 0.0);
    }
    return g;
}

void Gradients::add_scaled(const Gradients& other, double s) {
    for (size_t i = 0; i < dw.size(); ++i) {
        for (size_t j = 0; j < dw[i].size(); ++j) dw[i][j] += s * other.dw[i][j];
        for (size_t j = 0; j < db[i].size(); ++j) db[i][j] += s * other.db[i][j];
    }
}

void Gradients::scale(double s) {
    for (auto& v : dw)
        for (double& x : v) x *= s;
    for (auto& v : db)
        for (double& x : v) x *= s;
}

double Gradients::squared_norm() const {
    double n = 0;
    for (const auto& v : dw)
        for (double x : v) n += x * x;
    for (const auto& v : db)
        for (double x : v) n += x * x;
    return n;
}

bool Gradients::finite() const {
    for (const auto& v : dw)
        for (double x : v)
            if (!std::isfinite(x)) return false;
    for (const auto& v : db)
        for (double x : v)
            if (!std::isfinite(x)) return false;
    return true;
}

ForwardCache forward_cached(const DenseNet& net, std::span<const double> x) {
    if (static_cast<int>(x.size()) != net.input_dim())
        throw ValidationError("forward: expected input dim " +
                              std::to_string(net.input_dim()) + ", got " +
                              std::to_string(x.size()));
    ForwardCache cache;
    std::vector<double> cur(x.begin(), x.end());
    for (const Layer& l : net.layers) {
        cache.inputs.push_back(cur);
        std::vector<double> z(l.out, 0.0);
        for (int o = 0; o < l.out; ++o) {
            double acc = l.bias[o];
            const double* wrow = &l.weights[static_cast<size_t>(o) * l.in];
            for (int i = 0; i < l.in; ++i) acc += wrow[i] * cur[i];
            z[o] = acc;
        }
        cache.pre.push_back(z);
        cur.resize(l.out);
        for (int o = 0; o < l.out; ++o) cur[o] = activate(l.act, z[o]);
    }
    cache.output = cur;
    return cache;
}

std::vector<double> forward(const DenseNet& net, std::span<const double> x) {
    return forward_cached(net, x).output;
}

std::vector<double> backward(const DenseNet& net, const ForwardCache& cache,
                             std::span<const double> dLdy, Gradients& grads) {
    if (cache.inputs.size() != net.layers.size() ||
        cache.pre.size() != net.layers.size())
        throw ValidationError("backward: cache does not match network");
    if (static_cast<int>(dLdy.size()) != net.output_dim())
        throw ValidationError("backward: upstream gradient dim mismatch");
    if (grads.dw.size() != net.layers.size())
        throw ValidationError("backward: gradient shapes do not match network");

    std::vector<double> delta(dLdy.begin(), dLdy.end());
    for (int li = static_cast<int>(net.layers.size()) - 1; li >= 0; --li) {
        const Layer& l = net.layers[li];
        if (static_cast<int>(cache.pre[li].size()) != l.out ||
            static_cast<int>(cache.inputs[li].size()) != l.in)
            throw ValidationError("backward: stale cache for layer " + std::to_string(li));
        std::vector<double> dz(l.out);
        for (int o = 0; o < l.out; ++o)
            dz[o] = delta[o] * activate_grad(l.act, cache.pre[li][o]);
        auto& dw = grads.dw[li];
        auto& db = grads.db[li];
        const auto& in = cache.inputs[li];
        for (int o = 0; o < l.out; ++o) {
            double* drow = &dw[static_cast<size_t>(o) * l.in];
            for (int i = 0; i < l.in; ++i) drow[i] += dz[o] * in[i];
            db[o] += dz[o];
        }
        std::vector<double> dx(l.in, 0.0);
        for (int o = 0; o < l.out; ++o) {
            const double* wrow = &l.weights[static_cast<size_t>(o) * l.in];
            for (int i = 0; i < l.in; ++i) dx[i] += wrow[i] * dz[o];
        }
        delta = std::move(dx);
    }
    return delta;
}

void RmsProp::step(DenseNet& net, const Gradients& grads) {
    if (!grads.finite())
        throw DivergenceError("optimizer received non-finite gradients");
    if (sw.empty()) {
        for (const Layer& l : net.layers) {
            sw.emplace_back(l.weights.size(), 0.0);
            sb.emplace_back(l.bias.size(), 0.0);
        }
    }
    for (size_t li = 0; li < net.layers.size(); ++li) {
        Layer& l = net.layers[li];
        for (size_t j = 0; j < l.weights.size(); ++j) {
            double g = grads.dw[li][j];
            sw[li][j] = decay * sw[li][j] + (1 - decay) * g * g;
            l.weights[j] -= lr * g / (std::sqrt(sw[li][j]) + epsilon);
        }
        for (size_t j = 0; j < l.bias.size(); ++j) {
            double g = grads.db[li][j];
            sb[li][j] = decay * sb[li][j] + (1 - decay) * g * g;
            l.bias[j] -= lr * g / (std::sqrt(sb[li][j]) + epsilon);
        }
    }
    if (!net.finite())
        throw DivergenceError("parameters became non-finite after update");
}

nlohmann::json net_to_json(const DenseNet& net) {
    nlohmann::json layers = nlohmann::json::array();
    for (const Layer& l : net.layers) {
        nlohmann::json w = nlohmann::json::array();
        for (double v : l.weights) w.push_back(double_to_hex(v));
        nlohmann::json b = nlohmann::json::array();
        for (double v : l.bias) b.push_back(double_to_hex(v));
        layers.push_back({{"in", l.in},
                          {"out", l.out},
                          {"act", act_name(l.act)},
                          {"w", std::move(w)},
                          {"b", std::move(b)}});
    }
    return {{"layers", std::move(layers)}};
}

DenseNet net_from_json(const nlohmann::json& j) {
    DenseNet net;
    if (!j.contains("layers") || !j["layers"].is_array())
        throw ValidationError("checkpoint net is missing layers");
    for (const auto& lj : j["layers"]) {
        Layer l;
        l.in = lj.at("in").get<int>();
        l.out = lj.at("out").get<int>();
        l.act = act_from_name(lj.at("act").get<std::string>());
        if (l.in < 1 || l.out < 1) throw ValidationError("bad layer dims in checkpoint");
        for (const auto& v : lj.at("w")) l.weights.push_back(hex_to_double(v.get<std::string>()));
        for (const auto& v : lj.at("b")) l.bias.push_back(hex_to_double(v.get<std::string>()));
        if (l.weights.size() != static_cast<size_t>(l.in) * l.out ||
            l.bias.size() != static_cast<size_t>(l.out))
            throw ValidationError("checkpoint layer shape mismatch");
        net.layers.push_back(std::move(l));
    }
    for (size_t i = 1; i < net.layers.size(); ++i)
        if (net.layers[i].in != net.layers[i - 1].out)
            throw ValidationError("checkpoint layer dimensions do not chain");
    return net;
}

}  // namespace rescuesim
