#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sto {

enum class Activation { relu, tanh, linear };

Activation activation_from_string(const std::string& name);
const char* to_string(Activation a);

struct LayerSpec {
    int input_dim = 0;
    int output_dim = 0;
    Activation activation = Activation::linear;
};

// Dense network with 64-bit weights. Weights are stored row-major, W[layer] is
// (output_dim x input_dim); math is deliberately plain loops, the networks here
// are small enough that determinism matters more than throughput.
class Mlp {
public:
    Mlp() = default;
    explicit Mlp(std::vector<LayerSpec> specs);

    const std::vector<LayerSpec>& specs() const { return specs_; }
    int input_dim() const { return specs_.front().input_dim; }
    int output_dim() const { return specs_.back().output_dim; }
    std::size_t layer_count() const { return specs_.size(); }

    std::vector<double>& weights(std::size_t layer) { return weights_[layer]; }
    std::vector<double>& biases(std::size_t layer) { return biases_[layer]; }
    const std::vector<double>& weights(std::size_t layer) const { return weights_[layer]; }
    const std::vector<double>& biases(std::size_t layer) const { return biases_[layer]; }

    struct Cache {
        std::vector<std::vector<double>> inputs;          // per layer
        std::vector<std::vector<double>> pre_activations; // per layer
        std::vector<double> output;
    };

    std::vector<double> forward(const std::vector<double>& input) const;
    std::vector<double> forward(const std::vector<double>& input, Cache& cache) const;

    struct Gradients {
        std::vector<std::vector<double>> weight_grads;
        std::vector<std::vector<double>> bias_grads;
        std::vector<double> input_grad;

        void init_like(const Mlp& net);
        void accumulate(const Gradients& other);
        void scale(double factor);
        double squared_norm() const;
    };

    // Exact reverse-mode gradients of sum(output_grad . output) w.r.t. all
    // weights and the input, given the cache of the matching forward pass.
    void backward(const Cache& cache, const std::vector<double>& output_grad,
                  Gradients& grads) const;

    bool same_architecture(const Mlp& other) const;
    bool all_finite() const;

private:
    std::vector<LayerSpec> specs_;
    std::vector<std::vector<double>> weights_;
    std::vector<std::vector<double>> biases_;
};

// theta' <- tau * theta + (1 - tau) * theta', weight-wise.
void soft_update(Mlp& target, const Mlp& source, double tau);

// Fan-in scaled uniform init in (-1/sqrt(fan_in), 1/sqrt(fan_in)), deterministic per seed.
Mlp init_weights(const std::vector<LayerSpec>& specs, std::uint64_t seed);

struct AdamConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double grad_clip_norm = 0;  // 0 = no clipping
};

class AdamState {
public:
    AdamState() = default;
    AdamState(const Mlp& net, AdamConfig config);

    // One bias-corrected step along -grads.
    void update(Mlp& net, const Mlp::Gradients& grads);

    long step_count() const { return step_; }
    const AdamConfig& config() const { return config_; }

private:
    AdamConfig config_;
    std::vector<std::vector<double>> m_w_, v_w_, m_b_, v_b_;
    long step_ = 0;
};

} // namespace sto
