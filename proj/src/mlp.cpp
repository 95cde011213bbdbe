#include "sto/mlp.hpp"
#include "sto/errors.hpp"
#include "sto/rng.hpp"

#include <cmath>

namespace sto {

Activation activation_from_string(const std::string& name) {
    if (name == "relu") return Activation::relu;
    if (name == "tanh") return Activation::tanh;
    if (name == "linear") return Activation::linear;
    throw ParseError("unknown activation '" + name + "'");
}

const char* to_string(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
        case Activation::linear: return "linear";
    }
    return "?";
}

Mlp::Mlp(std::vector<LayerSpec> specs) : specs_(std::move(specs)) {
    if (specs_.empty()) throw ValidationError("network needs at least one layer");
    for (std::size_t i = 0; i < specs_.size(); ++i) {
        if (specs_[i].input_dim < 1 || specs_[i].output_dim < 1)
            throw ValidationError("layer dimensions must be >= 1");
        if (i > 0 && specs_[i].input_dim != specs_[i - 1].output_dim)
            throw ValidationError("layer " + std::to_string(i) + " input dim does not chain");
        weights_.emplace_back(specs_[i].output_dim * specs_[i].input_dim, 0.0);
        biases_.emplace_back(specs_[i].output_dim, 0.0);
    }
}

std::vector<double> Mlp::forward(const std::vector<double>& input) const {
    Cache cache;
    return forward(input, cache);
}

std::vector<double> Mlp::forward(const std::vector<double>& input, Cache& cache) const {
    if (static_cast<int>(input.size()) != input_dim())
        throw ValidationError("input size " + std::to_string(input.size()) + " != " +
                              std::to_string(input_dim()));
    cache.inputs.assign(specs_.size(), {});
    cache.pre_activations.assign(specs_.size(), {});

    std::vector<double> x = input;
    for (std::size_t l = 0; l < specs_.size(); ++l) {
        const int in = specs_[l].input_dim, out = specs_[l].output_dim;
        cache.inputs[l] = x;
        std::vector<double> z(out);
        const double* w = weights_[l].data();
        for (int o = 0; o < out; ++o) {
            double acc = biases_[l][o];
            const double* row = w + o * in;
            for (int i = 0; i < in; ++i) acc += row[i] * x[i];
            z[o] = acc;
        }
        cache.pre_activations[l] = z;
        switch (specs_[l].activation) {
            case Activation::relu:
                for (double& v : z) v = v > 0 ? v : 0.0;
                break;
            case Activation::tanh:
                for (double& v : z) v = std::tanh(v);
                break;
            case Activation::linear:
                break;
        }
        x = std::move(z);
    }
    cache.output = x;
    return x;
}

void Mlp::Gradients::init_like(const Mlp& net) {
    weight_grads.assign(net.layer_count(), {});
    bias_grads.assign(net.layer_count(), {});
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        weight_grads[l].assign(net.weights(l).size(), 0.0);
        bias_grads[l].assign(net.biases(l).size(), 0.0);
    }
    input_grad.assign(net.input_dim(), 0.0);
}

void Mlp::Gradients::accumulate(const Gradients& other) {
    for (std::size_t l = 0; l < weight_grads.size(); ++l) {
        for (std::size_t i = 0; i < weight_grads[l].size(); ++i)
            weight_grads[l][i] += other.weight_grads[l][i];
        for (std::size_t i = 0; i < bias_grads[l].size(); ++i)
            bias_grads[l][i] += other.bias_grads[l][i];
    }
    for (std::size_t i = 0; i < input_grad.size(); ++i) input_grad[i] += other.input_grad[i];
}

void Mlp::Gradients::scale(double factor) {
    for (auto& layer : weight_grads)
        for (double& g : layer) g *= factor;
    for (auto& layer : bias_grads)
        for (double& g : layer) g *= factor;
    for (double& g : input_grad) g *= factor;
}

double Mlp::Gradients::squared_norm() const {
    double total = 0;
    for (const auto& layer : weight_grads)
        for (double g : layer) total += g * g;
    for (const auto& layer : bias_grads)
        for (double g : layer) total += g * g;
    return total;
}

void Mlp::backward(const Cache& cache, const std::vector<double>& output_grad,
                   Gradients& grads) const {
    if (output_grad.size() != static_cast<std::size_t>(output_dim()))
        throw ValidationError("output gradient size mismatch");
    if (grads.weight_grads.size() != specs_.size()) grads.init_like(*this);

    std::vector<double> delta = output_grad;
    for (std::size_t li = specs_.size(); li-- > 0;) {
        const int in = specs_[li].input_dim, out = specs_[li].output_dim;
        const std::vector<double>& z = cache.pre_activations[li];
        switch (specs_[li].activation) {
            case Activation::relu:
                for (int o = 0; o < out; ++o)
                    if (z[o] <= 0) delta[o] = 0.0;
                break;
            case Activation::tanh:
                for (int o = 0; o < out; ++o) {
                    const double th = std::tanh(z[o]);
                    delta[o] *= 1.0 - th * th;
                }
                break;
            case Activation::linear:
                break;
        }
        const std::vector<double>& x = cache.inputs[li];
        double* wg = grads.weight_grads[li].data();
        for (int o = 0; o < out; ++o) {
            grads.bias_grads[li][o] += delta[o];
            double* row = wg + o * in;
            for (int i = 0; i < in; ++i) row[i] += delta[o] * x[i];
        }
        std::vector<double> prev(in, 0.0);
        const double* w = weights_[li].data();
        for (int o = 0; o < out; ++o) {
            const double* row = w + o * in;
            for (int i = 0; i < in; ++i) prev[i] += row[i] * delta[o];
        }
        delta = std::move(prev);
    }
    for (std::size_t i = 0; i < grads.input_grad.size(); ++i) grads.input_grad[i] += delta[i];
}

bool Mlp::same_architecture(const Mlp& other) const {
    if (specs_.size() != other.specs_.size()) return false;
    for (std::size_t i = 0; i < specs_.size(); ++i) {
        if (specs_[i].input_dim != other.specs_[i].input_dim ||
            specs_[i].output_dim != other.specs_[i].output_dim ||
            specs_[i].activation != other.specs_[i].activation)
            return false;
    }
    return true;
}

bool Mlp::all_finite() const {
    for (const auto& layer : weights_)
        for (double w : layer)
            if (!std::isfinite(w)) return false;
    for (const auto& layer : biases_)
        for (double b : layer)
            if (!std::isfinite(b)) return false;
    return true;
}

void soft_update(Mlp& target, const Mlp& source, double tau) {
    if (!target.same_architecture(source))
        throw ValidationError("soft_update across different architectures");
    for (std::size_t l = 0; l < target.layer_count(); ++l) {
        auto& tw = target.weights(l);
        const auto& sw = source.weights(l);
        for (std::size_t i = 0; i < tw.size(); ++i) tw[i] = tau * sw[i] + (1.0 - tau) * tw[i];
        auto& tb = target.biases(l);
        const auto& sb = source.biases(l);
        for (std::size_t i = 0; i < tb.size(); ++i) tb[i] = tau * sb[i] + (1.0 - tau) * tb[i];
    }
}

Mlp init_weights(const std::vector<LayerSpec>& specs, std::uint64_t seed) {
    Mlp net(specs);
    Rng rng(seed);
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(specs[l].input_dim));
        for (double& w : net.weights(l)) w = rng.uniform(-bound, bound);
        for (double& b : net.biases(l)) b = rng.uniform(-bound, bound);
    }
    return net;
}

AdamState::AdamState(const Mlp& net, AdamConfig config) : config_(config) {
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        m_w_.emplace_back(net.weights(l).size(), 0.0);
        v_w_.emplace_back(net.weights(l).size(), 0.0);
        m_b_.emplace_back(net.biases(l).size(), 0.0);
        v_b_.emplace_back(net.biases(l).size(), 0.0);
    }
}

void AdamState::update(Mlp& net, const Mlp::Gradients& grads) {
    if (m_w_.size() != net.layer_count()) throw ValidationError("Adam state shape mismatch");
    double clip_scale = 1.0;
    if (config_.grad_clip_norm > 0) {
        const double norm = std::sqrt(grads.squared_norm());
        if (norm > config_.grad_clip_norm) clip_scale = config_.grad_clip_norm / norm;
    }
    ++step_;
    const double corr1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
    const double corr2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
    auto apply = [&](std::vector<double>& param, const std::vector<double>& grad,
                     std::vector<double>& m, std::vector<double>& v) {
        for (std::size_t i = 0; i < param.size(); ++i) {
            const double g = grad[i] * clip_scale;
            m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
            v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
            const double m_hat = m[i] / corr1;
            const double v_hat = v[i] / corr2;
            param[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
        }
    };
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        apply(net.weights(l), grads.weight_grads[l], m_w_[l], v_w_[l]);
        apply(net.biases(l), grads.bias_grads[l], m_b_[l], v_b_[l]);
    }
}

} // namespace sto
