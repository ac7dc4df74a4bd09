#pragma once

#include <span>
#include <vector>

#include "bfssl/rng.hpp"

namespace bfssl {

// Flat parameter vector of one local or global model.
struct ModelParams {
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
};

struct BlurRecord {
    int vehicle_id = 0;
    double blur = 0.0;          // motion blur level, >= 0
    int success = 0;            // upload survived the error channel
    double velocity_kmh = 0.0;  // source velocity behind the blur value
};

// Batch of raw input vectors for one vehicle's local training round.
struct DataBatch {
    std::vector<std::vector<double>> samples;

    std::size_t size() const { return samples.size(); }
};

// Blur level (s*H/Q) * v; the coefficient folds focal length, exposure time
// and pixel pitch into one configured scalar.
double blur_level(double velocity_kmh, double blur_coeff);

// Blur-weighted, success-masked aggregation: raw weight
// (sum_m blur_m - blur_n) * success_n, renormalized over successful uploads.
ModelParams aggregate_bfssl(std::span<const ModelParams> models,
                            std::span<const BlurRecord> blurs);

// Unweighted mean of successful models.
ModelParams aggregate_uniform(std::span<const ModelParams> models,
                              std::span<const int> successes);

// Uniform mean over successful models whose source velocity is at or below
// the blur threshold.
ModelParams aggregate_drop_blurred(std::span<const ModelParams> models,
                                   std::span<const BlurRecord> blurs, double threshold_kmh);

struct CorruptResult {
    DataBatch batch;
    std::vector<int> corrupted;  // indices that were blurred
};

// Toy blur operator: blends ceil(fraction*count) samples toward the batch
// mean and adds Gaussian noise.
CorruptResult corrupt_fraction(const DataBatch& dataset, double fraction, Rng& rng,
                               double blend = 0.5, double noise_std = 0.1);

}  // namespace bfssl
