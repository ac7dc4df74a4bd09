#include "bfssl/simco.hpp"

#include <algorithm>
#include <cmath>

#include "bfssl/errors.hpp"
#include "bfssl/mathutil.hpp"

namespace bfssl {

void SimcoConfig::validate() const {
    if (!(tau_alpha > 0.0 && tau_beta > 0.0))
        throw config_error("simco: temperatures must be > 0");
    if (samples_per_round < 2)
        throw config_error("simco: need at least 2 samples for one negative");
    if (input_dim < 1 || encoder_hidden < 1 || encoder_out < 1 || head_hidden < 1 ||
        embed_dim < 1)
        throw config_error("simco: network dimensions must be >= 1");
    if (!(lr_initial > 0.0) || !(lr_min >= 0.0) || lr_horizon_rounds < 1)
        throw config_error("simco: bad learning rate schedule");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw config_error("simco: momentum in [0,1)");
    if (clusters < 1) throw config_error("simco: need at least one cluster");
}

namespace {

MlpNet make_net(const SimcoConfig& cfg) {
    return MlpNet({cfg.input_dim, cfg.encoder_hidden, cfg.encoder_out, cfg.head_hidden,
                   cfg.embed_dim},
                  {Act::relu, Act::relu, Act::relu, Act::identity});
}

constexpr double kNormFloor = 1e-12;

}  // namespace

ToyEncoder ToyEncoder::make(const SimcoConfig& cfg) {
    return ToyEncoder{make_net(cfg)};
}

ToyEncoder ToyEncoder::from_params(const SimcoConfig& cfg, const ModelParams& params) {
    ToyEncoder e{make_net(cfg)};
    e.net.set_params(params.values);
    return e;
}

std::size_t ToyEncoder::param_count(const SimcoConfig& cfg) {
    return make_net(cfg).param_count();
}

ModelParams ToyEncoder::to_params() const {
    return ModelParams{net.params()};
}

std::vector<double> ToyEncoder::embed(std::span<const double> x, MlpNet::Workspace& ws) const {
    auto raw = net.forward(x, ws);
    std::vector<double> out(raw.begin(), raw.end());
    double norm = 0.0;
    for (double v : out) norm += v * v;
    norm = std::max(std::sqrt(norm), kNormFloor);
    for (double& v : out) v /= norm;
    return out;
}

std::vector<double> apply_augmentation(std::span<const double> x, Aug aug,
                                       const SimcoConfig& cfg, Rng& rng) {
    std::vector<double> out(x.begin(), x.end());
    switch (aug) {
        case Aug::none:
            break;
        case Aug::noise:
            for (double& v : out) v += rng.normal(0.0, cfg.aug_noise_std);
            break;
        case Aug::mask:
            for (double& v : out)
                if (rng.uniform01() < cfg.aug_mask_prob) v = 0.0;
            break;
    }
    return out;
}

std::vector<double> encode(std::span<const double> x, const ToyEncoder& encoder, Aug aug,
                           const SimcoConfig& cfg, Rng& rng) {
    std::vector<double> view = apply_augmentation(x, aug, cfg, rng);
    MlpNet::Workspace ws;
    return encoder.embed(view, ws);
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Softmax probability of the positive among {positive, negatives} at the
// given temperature; also fills per-negative probabilities when requested.
double positive_probability(const SimcoBatch& batch, double tau,
                            std::vector<double>* neg_probs) {
    std::vector<double> logits(batch.negatives.size() + 1);
    logits[0] = dot(batch.anchor, batch.positive) / tau;
    for (std::size_t j = 0; j < batch.negatives.size(); ++j)
        logits[j + 1] = dot(batch.anchor, batch.negatives[j]) / tau;
    double lse = log_sum_exp(logits);
    if (neg_probs) {
        neg_probs->resize(batch.negatives.size());
        for (std::size_t j = 0; j < batch.negatives.size(); ++j)
            (*neg_probs)[j] = std::exp(logits[j + 1] - lse);
    }
    return std::exp(logits[0] - lse);
}

// W_x = 1 - p_positive, accumulated over the negatives to avoid cancellation.
double weight_at_temp(const SimcoBatch& batch, double tau) {
    std::vector<double> neg_probs;
    positive_probability(batch, tau, &neg_probs);
    double w = 0.0;
    for (double p : neg_probs) w += p;
    return w;
}

}  // namespace

DtLossResult dual_temperature_loss(const SimcoBatch& batch, const SimcoConfig& cfg) {
    if (batch.negatives.empty()) throw internal_error("simco: batch has no negatives");
    double w_alpha = weight_at_temp(batch, cfg.tau_alpha);
    double w_beta = weight_at_temp(batch, cfg.tau_beta);

    DtLossResult r;
    r.coefficient = w_beta / w_alpha;
    double p0 = positive_probability(batch, cfg.tau_alpha, nullptr);
    r.loss = -r.coefficient * std::log(p0);
    return r;
}

DtGradResult dual_temperature_grad(const SimcoBatch& batch, const SimcoConfig& cfg) {
    DtLossResult base = dual_temperature_loss(batch, cfg);

    std::vector<double> neg_probs;
    double p0 = positive_probability(batch, cfg.tau_alpha, &neg_probs);

    DtGradResult g;
    g.loss = base.loss;
    g.coefficient = base.coefficient;
    double scale = base.coefficient / cfg.tau_alpha;

    std::size_t dim = batch.anchor.size();
    g.d_anchor.assign(dim, 0.0);
    g.d_positive.assign(dim, 0.0);
    g.d_negatives.assign(batch.negatives.size(), std::vector<double>(dim, 0.0));

    for (std::size_t i = 0; i < dim; ++i) {
        double acc = (1.0 - p0) * batch.positive[i];
        for (std::size_t j = 0; j < batch.negatives.size(); ++j)
            acc -= neg_probs[j] * batch.negatives[j][i];
        g.d_anchor[i] = -scale * acc;
        g.d_positive[i] = -scale * (1.0 - p0) * batch.anchor[i];
        for (std::size_t j = 0; j < batch.negatives.size(); ++j)
            g.d_negatives[j][i] = scale * neg_probs[j] * batch.anchor[i];
    }
    return g;
}

double lr_for_round(const SimcoConfig& cfg, long round) {
    double t = std::min(static_cast<double>(round), static_cast<double>(cfg.lr_horizon_rounds)) /
               static_cast<double>(cfg.lr_horizon_rounds);
    return cfg.lr_min + (cfg.lr_initial - cfg.lr_min) * 0.5 * (1.0 + std::cos(M_PI * t));
}

namespace simco_detail {

RoundViews make_views(const DataBatch& dataset, const SimcoConfig& cfg, Rng& rng) {
    RoundViews v;
    v.anchor_in.reserve(dataset.size());
    v.positive_in.reserve(dataset.size());
    v.plain_in.reserve(dataset.size());
    for (const auto& x : dataset.samples) {
        v.anchor_in.push_back(apply_augmentation(x, cfg.anchor_aug, cfg, rng));
        v.positive_in.push_back(apply_augmentation(x, cfg.positive_aug, cfg, rng));
        v.plain_in.push_back(x);
    }
    return v;
}

namespace {

struct EmbedRecord {
    MlpNet::Workspace ws;
    std::vector<double> unit;  // normalized embedding
    double norm = 1.0;
};

EmbedRecord embed_with_record(const MlpNet& net, std::span<const double> x) {
    EmbedRecord r;
    auto raw = net.forward(x, r.ws);
    double norm = 0.0;
    for (double v : raw) norm += v * v;
    r.norm = std::max(std::sqrt(norm), kNormFloor);
    r.unit.assign(raw.begin(), raw.end());
    for (double& v : r.unit) v /= r.norm;
    return r;
}

// Pull dL/d(unit embedding) back through the normalization into the raw
// network output: dz = (du - u * (u . du)) / norm.
void backward_normalized(const MlpNet& net, const EmbedRecord& rec,
                         std::span<const double> d_unit, MlpNet::Grads& g) {
    double proj = dot(rec.unit, d_unit);
    std::vector<double> dz(d_unit.size());
    for (std::size_t i = 0; i < dz.size(); ++i)
        dz[i] = (d_unit[i] - rec.unit[i] * proj) / rec.norm;
    net.backward(rec.ws, dz, g, nullptr);
}

}  // namespace

double batch_loss_and_grad(const MlpNet& net, const RoundViews& views, const SimcoConfig& cfg,
                           MlpNet::Grads* g) {
    std::size_t z = views.plain_in.size();
    if (z < 2) throw internal_error("simco: batch too small for negatives");

    std::vector<EmbedRecord> anchors(z), positives(z), plains(z);
    for (std::size_t i = 0; i < z; ++i) {
        anchors[i] = embed_with_record(net, views.anchor_in[i]);
        positives[i] = embed_with_record(net, views.positive_in[i]);
        plains[i] = embed_with_record(net, views.plain_in[i]);
    }

    std::size_t dim = anchors[0].unit.size();
    std::vector<std::vector<double>> d_anchor(z, std::vector<double>(dim, 0.0));
    std::vector<std::vector<double>> d_positive(z, std::vector<double>(dim, 0.0));
    std::vector<std::vector<double>> d_plain(z, std::vector<double>(dim, 0.0));

    double total_loss = 0.0;
    SimcoBatch batch;
    batch.negatives.resize(z - 1);
    for (std::size_t i = 0; i < z; ++i) {
        batch.anchor = anchors[i].unit;
        batch.positive = positives[i].unit;
        std::size_t jj = 0;
        for (std::size_t j = 0; j < z; ++j) {
            if (j == i) continue;
            batch.negatives[jj++] = plains[j].unit;
        }
        if (g == nullptr) {
            total_loss += dual_temperature_loss(batch, cfg).loss;
            continue;
        }
        DtGradResult dg = dual_temperature_grad(batch, cfg);
        total_loss += dg.loss;
        for (std::size_t d = 0; d < dim; ++d) {
            d_anchor[i][d] += dg.d_anchor[d];
            d_positive[i][d] += dg.d_positive[d];
        }
        jj = 0;
        for (std::size_t j = 0; j < z; ++j) {
            if (j == i) continue;
            for (std::size_t d = 0; d < dim; ++d) d_plain[j][d] += dg.d_negatives[jj][d];
            ++jj;
        }
    }

    if (g != nullptr) {
        for (std::size_t i = 0; i < z; ++i) {
            backward_normalized(net, anchors[i], d_anchor[i], *g);
            backward_normalized(net, positives[i], d_positive[i], *g);
            backward_normalized(net, plains[i], d_plain[i], *g);
        }
        g->scale(1.0 / static_cast<double>(z));
    }
    return total_loss / static_cast<double>(z);
}

}  // namespace simco_detail

LocalTrainResult local_train(const ModelParams& model, const DataBatch& dataset, int iterations,
                             const SimcoConfig& cfg, long round, Rng& rng) {
    LocalTrainResult result;
    if (iterations <= 0) {
        result.params = model;
        return result;
    }
    MlpNet net = ToyEncoder::from_params(cfg, model).net;
    MlpNet::Grads velocity = net.make_grads();
    double lr = lr_for_round(cfg, round);
    for (int iter = 0; iter < iterations; ++iter) {
        simco_detail::RoundViews views = simco_detail::make_views(dataset, cfg, rng);
        MlpNet::Grads g = net.make_grads();
        double loss = simco_detail::batch_loss_and_grad(net, views, cfg, &g);
        net.apply_momentum(g, lr, cfg.momentum, velocity);
        result.losses.push_back(loss);
    }
    result.params = ModelParams{net.params()};
    return result;
}

double evaluate_loss(const ModelParams& model, const DataBatch& dataset, const SimcoConfig& cfg,
                     Rng& rng) {
    MlpNet net = ToyEncoder::from_params(cfg, model).net;
    simco_detail::RoundViews views = simco_detail::make_views(dataset, cfg, rng);
    return simco_detail::batch_loss_and_grad(net, views, cfg, nullptr);
}

std::vector<std::vector<double>> generate_centers(const SimcoConfig& cfg, Rng& rng) {
    std::vector<std::vector<double>> centers(cfg.clusters, std::vector<double>(cfg.input_dim));
    for (auto& c : centers) {
        double norm = 0.0;
        for (double& v : c) {
            v = rng.normal();
            norm += v * v;
        }
        norm = std::max(std::sqrt(norm), kNormFloor);
        for (double& v : c) v /= norm;
    }
    return centers;
}

DataBatch sample_batch(const SimcoConfig& cfg, std::span<const std::vector<double>> centers,
                       int count, Rng& rng) {
    DataBatch batch;
    batch.samples.reserve(count);
    for (int i = 0; i < count; ++i) {
        const auto& c = centers[i % centers.size()];
        std::vector<double> x(c.size());
        for (std::size_t d = 0; d < x.size(); ++d)
            x[d] = c[d] + rng.normal(0.0, cfg.cluster_spread);
        batch.samples.push_back(std::move(x));
    }
    return batch;
}

}  // namespace bfssl
