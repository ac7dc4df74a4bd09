#pragma once

#include <span>
#include <vector>

#include "bfssl/aggregate.hpp"
#include "bfssl/mlp.hpp"
#include "bfssl/rng.hpp"

namespace bfssl {

enum class Aug { none, noise, mask };

// Toy-scale contrastive learner: a small encoder+projection producing unit
// embeddings, a dual-temperature loss whose stop-gradient weight ratio
// replaces a negative-sample dictionary, and a momentum-SGD training loop.
struct SimcoConfig {
    double tau_alpha = 0.1;
    double tau_beta = 1.0;
    int input_dim = 8;
    int encoder_hidden = 32;
    int encoder_out = 32;
    int head_hidden = 32;
    int embed_dim = 32;           // p_j
    int samples_per_round = 16;   // Z; the batch mates provide Z-1 negatives
    double lr_initial = 0.06;
    double lr_min = 0.006;
    long lr_horizon_rounds = 200; // cosine decay horizon
    double momentum = 0.9;
    Aug anchor_aug = Aug::noise;
    Aug positive_aug = Aug::noise;
    double aug_noise_std = 0.05;
    double aug_mask_prob = 0.2;
    int clusters = 2;             // synthetic dataset shape
    double cluster_spread = 0.15;

    void validate() const;
};

struct SimcoBatch {
    std::vector<double> anchor;                  // q
    std::vector<double> positive;                // k+
    std::vector<std::vector<double>> negatives;  // k-_j
};

// Encoder + projection head; embeddings are L2-normalized on output.
struct ToyEncoder {
    MlpNet net;

    static ToyEncoder make(const SimcoConfig& cfg);
    static ToyEncoder from_params(const SimcoConfig& cfg, const ModelParams& params);
    static std::size_t param_count(const SimcoConfig& cfg);

    ModelParams to_params() const;
    std::vector<double> embed(std::span<const double> x, MlpNet::Workspace& ws) const;
};

// Tagged toy augmentation followed by encode+normalize.
std::vector<double> encode(std::span<const double> x, const ToyEncoder& encoder, Aug aug,
                           const SimcoConfig& cfg, Rng& rng);

std::vector<double> apply_augmentation(std::span<const double> x, Aug aug,
                                       const SimcoConfig& cfg, Rng& rng);

struct DtLossResult {
    double loss = 0.0;
    double coefficient = 0.0;  // sg[W_beta / W_alpha]
};

DtLossResult dual_temperature_loss(const SimcoBatch& batch, const SimcoConfig& cfg);

struct DtGradResult {
    double loss = 0.0;
    double coefficient = 0.0;
    std::vector<double> d_anchor;
    std::vector<double> d_positive;
    std::vector<std::vector<double>> d_negatives;
};

// Analytic gradient with the coefficient held constant (stop-gradient).
DtGradResult dual_temperature_grad(const SimcoBatch& batch, const SimcoConfig& cfg);

// Stepped cosine decay from lr_initial to lr_min over lr_horizon_rounds.
double lr_for_round(const SimcoConfig& cfg, long round);

struct LocalTrainResult {
    ModelParams params;
    std::vector<double> losses;  // one entry per iteration
};

// Runs `iterations` epochs of full-batch momentum SGD from the given model.
// iterations == 0 returns the input parameters unchanged.
LocalTrainResult local_train(const ModelParams& model, const DataBatch& dataset, int iterations,
                             const SimcoConfig& cfg, long round, Rng& rng);

// Mean dual-temperature loss of a model over a dataset (fresh augmentations
// from rng, no parameter update).
double evaluate_loss(const ModelParams& model, const DataBatch& dataset, const SimcoConfig& cfg,
                     Rng& rng);

// Synthetic Gaussian-cluster data.
std::vector<std::vector<double>> generate_centers(const SimcoConfig& cfg, Rng& rng);
DataBatch sample_batch(const SimcoConfig& cfg, std::span<const std::vector<double>> centers,
                       int count, Rng& rng);

namespace simco_detail {

// Pre-augmented views of one round's batch, so the loss below is a
// deterministic function of the network parameters.
struct RoundViews {
    std::vector<std::vector<double>> anchor_in, positive_in, plain_in;
};

RoundViews make_views(const DataBatch& dataset, const SimcoConfig& cfg, Rng& rng);

// Batch-average loss; accumulates parameter gradients when g is non-null.
double batch_loss_and_grad(const MlpNet& net, const RoundViews& views, const SimcoConfig& cfg,
                           MlpNet::Grads* g);

}  // namespace simco_detail

}  // namespace bfssl
