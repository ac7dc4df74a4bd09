#pragma once

#include <span>
#include <vector>

#include "bfssl/rng.hpp"

namespace bfssl {

enum class Act { identity, relu, tanh_act };

// Small dense feed-forward network with hand-written backpropagation.
// Weights are row-major (out x in). Architecture is fixed at construction.
class MlpNet {
public:
    struct Workspace {
        std::vector<std::vector<double>> pre;   // pre-activations per layer
        std::vector<std::vector<double>> post;  // post[0] is the input copy
    };

    struct Grads {
        std::vector<std::vector<double>> w;
        std::vector<std::vector<double>> b;

        void zero();
        void scale(double factor);
    };

    MlpNet() = default;
    MlpNet(std::vector<int> dims, std::vector<Act> acts);

    // He-style initialization, biases zero.
    void init_random(Rng& rng);

    int input_dim() const { return dims_.empty() ? 0 : dims_.front(); }
    int output_dim() const { return dims_.empty() ? 0 : dims_.back(); }
    std::size_t param_count() const;
    const std::vector<int>& dims() const { return dims_; }
    const std::vector<Act>& activations() const { return acts_; }

    Grads make_grads() const;

    // Forward pass; returns a view of the output held inside ws.
    std::span<const double> forward(std::span<const double> x, Workspace& ws) const;

    // Backward pass for the forward recorded in ws. Accumulates parameter
    // gradients into g; when dx is non-null also produces the input gradient.
    void backward(const Workspace& ws, std::span<const double> dout, Grads& g,
                  std::vector<double>* dx) const;

    // Flat parameter access, layer-major: weights then bias per layer.
    void get_params(std::span<double> out) const;
    void set_params(std::span<const double> in);
    std::vector<double> params() const;

    // Gradient-descent step: params -= lr * g.
    void apply_gradient(const Grads& g, double lr);

    // In-place momentum step: vel = momentum*vel - lr*g; params += vel.
    void apply_momentum(const Grads& g, double lr, double momentum, Grads& velocity);

    struct AdamState {
        Grads m, v;
        long t = 0;
    };
    AdamState make_adam_state() const;
    void apply_adam(const Grads& g, double lr, AdamState& state, double beta1 = 0.9,
                    double beta2 = 0.999, double eps = 1e-8);

private:
    std::vector<int> dims_;
    std::vector<Act> acts_;
    std::vector<std::vector<double>> w_;
    std::vector<std::vector<double>> b_;
};

// target <- delta*source + (1-delta)*target. Throws on architecture mismatch.
void soft_update(MlpNet& target, const MlpNet& source, double delta);

// Max-norm parameter distance between two same-shaped networks.
double param_distance(const MlpNet& a, const MlpNet& b);

}  // namespace bfssl
