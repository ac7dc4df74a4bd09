#include "bfssl/aggregate.hpp"

#include <algorithm>
#include <cmath>

#include "bfssl/errors.hpp"

namespace bfssl {

double blur_level(double velocity_kmh, double blur_coeff) {
    return blur_coeff * velocity_kmh;
}

namespace {

void check_models(std::span<const ModelParams> models, std::size_t expected_records) {
    if (models.empty() || models.size() != expected_records)
        throw internal_error("aggregate: model/record count mismatch");
    for (const ModelParams& m : models)
        if (m.dim() != models[0].dim())
            throw internal_error("aggregate: model dimensions differ within a round");
}

ModelParams weighted_sum(std::span<const ModelParams> models, std::span<const double> weights) {
    ModelParams out;
    out.values.assign(models[0].dim(), 0.0);
    for (std::size_t n = 0; n < models.size(); ++n) {
        if (weights[n] == 0.0) continue;
        for (std::size_t i = 0; i < out.values.size(); ++i)
            out.values[i] += weights[n] * models[n].values[i];
    }
    return out;
}

}  // namespace

ModelParams aggregate_bfssl(std::span<const ModelParams> models,
                            std::span<const BlurRecord> blurs) {
    check_models(models, blurs.size());

    double blur_sum = 0.0;
    for (const BlurRecord& b : blurs) blur_sum += b.blur;

    std::vector<double> weights(models.size(), 0.0);
    double total = 0.0;
    int successes = 0;
    for (std::size_t n = 0; n < blurs.size(); ++n) {
        if (!blurs[n].success) continue;
        ++successes;
        weights[n] = blur_sum - blurs[n].blur;
        total += weights[n];
    }
    if (successes == 0) throw empty_round_error("aggregate: no upload survived this round");

    if (total <= 0.0) {
        // All successful raw weights vanished (single vehicle, or every other
        // blur zero); fall back to the uniform limit.
        for (std::size_t n = 0; n < blurs.size(); ++n)
            weights[n] = blurs[n].success ? 1.0 / successes : 0.0;
    } else {
        for (double& w : weights) w /= total;
    }
    return weighted_sum(models, weights);
}

ModelParams aggregate_uniform(std::span<const ModelParams> models,
                              std::span<const int> successes) {
    check_models(models, successes.size());
    int count = 0;
    for (int s : successes) count += s ? 1 : 0;
    if (count == 0) throw empty_round_error("aggregate: no upload survived this round");

    std::vector<double> weights(models.size(), 0.0);
    for (std::size_t n = 0; n < models.size(); ++n)
        weights[n] = successes[n] ? 1.0 / count : 0.0;
    return weighted_sum(models, weights);
}

ModelParams aggregate_drop_blurred(std::span<const ModelParams> models,
                                   std::span<const BlurRecord> blurs, double threshold_kmh) {
    check_models(models, blurs.size());
    std::vector<int> keep(models.size(), 0);
    int count = 0;
    for (std::size_t n = 0; n < blurs.size(); ++n) {
        keep[n] = blurs[n].success && blurs[n].velocity_kmh <= threshold_kmh;
        count += keep[n];
    }
    if (count == 0) throw empty_round_error("aggregate: every model dropped as blurred or lost");
    return aggregate_uniform(models, keep);
}

CorruptResult corrupt_fraction(const DataBatch& dataset, double fraction, Rng& rng, double blend,
                               double noise_std) {
    if (fraction < 0.0 || fraction > 1.0)
        throw internal_error("corrupt_fraction: fraction outside [0,1]");
    CorruptResult result;
    result.batch = dataset;
    if (dataset.size() == 0 || fraction == 0.0) return result;

    std::size_t dim = dataset.samples[0].size();
    std::vector<double> mean(dim, 0.0);
    for (const auto& x : dataset.samples)
        for (std::size_t i = 0; i < dim; ++i) mean[i] += x[i];
    for (double& m : mean) m /= static_cast<double>(dataset.size());

    std::size_t k = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(dataset.size()) - 1e-12));
    k = std::min(k, dataset.size());

    // Choose k victims by a partial shuffle.
    std::vector<std::size_t> idx(dataset.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + rng.next_u64() % (idx.size() - i);
        std::swap(idx[i], idx[j]);
    }
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t v = idx[i];
        for (std::size_t d = 0; d < dim; ++d) {
            result.batch.samples[v][d] = (1.0 - blend) * dataset.samples[v][d] +
                                         blend * mean[d] + rng.normal(0.0, noise_std);
        }
        result.corrupted.push_back(static_cast<int>(v));
    }
    std::sort(result.corrupted.begin(), result.corrupted.end());
    return result;
}

}  // namespace bfssl
