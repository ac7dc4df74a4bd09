#include "bfssl/mlp.hpp"

#include <cmath>
#include <cstddef>

#include "bfssl/errors.hpp"

namespace bfssl {

namespace {

double activate(Act a, double z) {
    switch (a) {
        case Act::identity: return z;
        case Act::relu: return z > 0.0 ? z : 0.0;
        case Act::tanh_act: return std::tanh(z);
    }
    return z;
}

double activate_grad(Act a, double z, double post) {
    switch (a) {
        case Act::identity: return 1.0;
        case Act::relu: return z > 0.0 ? 1.0 : 0.0;
        case Act::tanh_act: return 1.0 - post * post;
    }
    return 1.0;
}

}  // namespace

void MlpNet::Grads::zero() {
    for (auto& layer : w)
        for (double& x : layer) x = 0.0;
    for (auto& layer : b)
        for (double& x : layer) x = 0.0;
}

void MlpNet::Grads::scale(double factor) {
    for (auto& layer : w)
        for (double& x : layer) x *= factor;
    for (auto& layer : b)
        for (double& x : layer) x *= factor;
}

MlpNet::MlpNet(std::vector<int> dims, std::vector<Act> acts)
    : dims_(std::move(dims)), acts_(std::move(acts)) {
    if (dims_.size() < 2 || acts_.size() != dims_.size() - 1)
        throw internal_error("mlp: need L+1 dims and L activations");
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
        w_.emplace_back(static_cast<std::size_t>(dims_[l + 1]) * dims_[l], 0.0);
        b_.emplace_back(dims_[l + 1], 0.0);
    }
}

void MlpNet::init_random(Rng& rng) {
    for (std::size_t l = 0; l < w_.size(); ++l) {
        double scale = std::sqrt(2.0 / dims_[l]);
        for (double& x : w_[l]) x = rng.normal(0.0, scale);
        for (double& x : b_[l]) x = 0.0;
    }
}

std::size_t MlpNet::param_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < w_.size(); ++l) n += w_[l].size() + b_[l].size();
    return n;
}

MlpNet::Grads MlpNet::make_grads() const {
    Grads g;
    for (std::size_t l = 0; l < w_.size(); ++l) {
        g.w.emplace_back(w_[l].size(), 0.0);
        g.b.emplace_back(b_[l].size(), 0.0);
    }
    return g;
}

std::span<const double> MlpNet::forward(std::span<const double> x, Workspace& ws) const {
    if (static_cast<int>(x.size()) != input_dim())
        throw internal_error("mlp: input dimension mismatch");
    std::size_t layers = w_.size();
    ws.pre.resize(layers);
    ws.post.resize(layers + 1);
    ws.post[0].assign(x.begin(), x.end());

    for (std::size_t l = 0; l < layers; ++l) {
        int in = dims_[l], out = dims_[l + 1];
        ws.pre[l].assign(out, 0.0);
        ws.post[l + 1].assign(out, 0.0);
        const double* wl = w_[l].data();
        const double* prev = ws.post[l].data();
        for (int o = 0; o < out; ++o) {
            double z = b_[l][o];
            const double* row = wl + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) z += row[i] * prev[i];
            ws.pre[l][o] = z;
            ws.post[l + 1][o] = activate(acts_[l], z);
        }
    }
    return ws.post[layers];
}

void MlpNet::backward(const Workspace& ws, std::span<const double> dout, Grads& g,
                      std::vector<double>* dx) const {
    std::size_t layers = w_.size();
    if (static_cast<int>(dout.size()) != output_dim())
        throw internal_error("mlp: upstream gradient dimension mismatch");

    std::vector<double> delta(dout.begin(), dout.end());
    std::vector<double> delta_prev;
    for (std::size_t li = layers; li-- > 0;) {
        int in = dims_[li], out = dims_[li + 1];
        // through the activation
        for (int o = 0; o < out; ++o)
            delta[o] *= activate_grad(acts_[li], ws.pre[li][o], ws.post[li + 1][o]);

        const double* prev = ws.post[li].data();
        double* gw = g.w[li].data();
        for (int o = 0; o < out; ++o) {
            double d = delta[o];
            g.b[li][o] += d;
            double* row = gw + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) row[i] += d * prev[i];
        }

        if (li > 0 || dx != nullptr) {
            delta_prev.assign(in, 0.0);
            const double* wl = w_[li].data();
            for (int o = 0; o < out; ++o) {
                double d = delta[o];
                const double* row = wl + static_cast<std::size_t>(o) * in;
                for (int i = 0; i < in; ++i) delta_prev[i] += d * row[i];
            }
            delta.swap(delta_prev);
        }
    }
    if (dx != nullptr) *dx = delta;
}

void MlpNet::get_params(std::span<double> out) const {
    std::size_t k = 0;
    for (std::size_t l = 0; l < w_.size(); ++l) {
        for (double x : w_[l]) out[k++] = x;
        for (double x : b_[l]) out[k++] = x;
    }
}

void MlpNet::set_params(std::span<const double> in) {
    if (in.size() != param_count()) throw internal_error("mlp: parameter count mismatch");
    std::size_t k = 0;
    for (std::size_t l = 0; l < w_.size(); ++l) {
        for (double& x : w_[l]) x = in[k++];
        for (double& x : b_[l]) x = in[k++];
    }
}

std::vector<double> MlpNet::params() const {
    std::vector<double> out(param_count());
    get_params(out);
    return out;
}

void MlpNet::apply_gradient(const Grads& g, double lr) {
    for (std::size_t l = 0; l < w_.size(); ++l) {
        for (std::size_t i = 0; i < w_[l].size(); ++i) w_[l][i] -= lr * g.w[l][i];
        for (std::size_t i = 0; i < b_[l].size(); ++i) b_[l][i] -= lr * g.b[l][i];
    }
}

void MlpNet::apply_momentum(const Grads& g, double lr, double momentum, Grads& velocity) {
    for (std::size_t l = 0; l < w_.size(); ++l) {
        for (std::size_t i = 0; i < w_[l].size(); ++i) {
            velocity.w[l][i] = momentum * velocity.w[l][i] - lr * g.w[l][i];
            w_[l][i] += velocity.w[l][i];
        }
        for (std::size_t i = 0; i < b_[l].size(); ++i) {
            velocity.b[l][i] = momentum * velocity.b[l][i] - lr * g.b[l][i];
            b_[l][i] += velocity.b[l][i];
        }
    }
}

MlpNet::AdamState MlpNet::make_adam_state() const {
    return AdamState{make_grads(), make_grads(), 0};
}

void MlpNet::apply_adam(const Grads& g, double lr, AdamState& state, double beta1, double beta2,
                        double eps) {
    ++state.t;
    double bc1 = 1.0 - std::pow(beta1, state.t);
    double bc2 = 1.0 - std::pow(beta2, state.t);
    for (std::size_t l = 0; l < w_.size(); ++l) {
        for (std::size_t i = 0; i < w_[l].size(); ++i) {
            double& m = state.m.w[l][i];
            double& v = state.v.w[l][i];
            m = beta1 * m + (1.0 - beta1) * g.w[l][i];
            v = beta2 * v + (1.0 - beta2) * g.w[l][i] * g.w[l][i];
            w_[l][i] -= lr * (m / bc1) / (std::sqrt(v / bc2) + eps);
        }
        for (std::size_t i = 0; i < b_[l].size(); ++i) {
            double& m = state.m.b[l][i];
            double& v = state.v.b[l][i];
            m = beta1 * m + (1.0 - beta1) * g.b[l][i];
            v = beta2 * v + (1.0 - beta2) * g.b[l][i] * g.b[l][i];
            b_[l][i] -= lr * (m / bc1) / (std::sqrt(v / bc2) + eps);
        }
    }
}

void soft_update(MlpNet& target, const MlpNet& source, double delta) {
    if (target.dims() != source.dims())
        throw internal_error("soft_update: architecture mismatch");
    std::vector<double> pt = target.params();
    std::vector<double> ps = source.params();
    for (std::size_t i = 0; i < pt.size(); ++i) pt[i] = delta * ps[i] + (1.0 - delta) * pt[i];
    target.set_params(pt);
}

double param_distance(const MlpNet& a, const MlpNet& b) {
    if (a.dims() != b.dims()) throw internal_error("param_distance: architecture mismatch");
    std::vector<double> pa = a.params();
    std::vector<double> pb = b.params();
    double d = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i) d = std::max(d, std::abs(pa[i] - pb[i]));
    return d;
}

}  // namespace bfssl
