#include "bfssl/pso.hpp"

#include <algorithm>
#include <limits>

#include "bfssl/errors.hpp"

namespace bfssl {

void PsoConfig::validate() const {
    if (max_iterations < 1) throw config_error("pso: max_iterations must be >= 1");
    if (!(pos_min < pos_max)) throw config_error("pso: degenerate position bounds");
    if (swarm_size < 1) throw config_error("pso: swarm size must be >= 1");
    if (inertia < 0.0 || personal_coeff < 0.0 || social_coeff < 0.0)
        throw config_error("pso: coefficients must be >= 0");
}

PsoResult pso_optimize(const PsoObjective& objective, int dim, const PsoConfig& cfg, Rng& rng) {
    cfg.validate();

    std::vector<std::vector<double>> pos(cfg.swarm_size, std::vector<double>(dim));
    std::vector<std::vector<double>> vel(cfg.swarm_size, std::vector<double>(dim, 0.0));
    std::vector<std::vector<double>> personal_best(cfg.swarm_size);
    std::vector<double> personal_value(cfg.swarm_size);

    PsoResult result;
    result.best_value = std::numeric_limits<double>::infinity();

    for (int s = 0; s < cfg.swarm_size; ++s) {
        for (double& x : pos[s]) x = rng.uniform(cfg.pos_min, cfg.pos_max);
        personal_best[s] = pos[s];
        personal_value[s] = objective(pos[s]);
        if (personal_value[s] < result.best_value) {
            result.best_value = personal_value[s];
            result.best_position = pos[s];
        }
    }

    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        for (int s = 0; s < cfg.swarm_size; ++s) {
            for (int d = 0; d < dim; ++d) {
                double r1 = rng.uniform01();
                double r2 = rng.uniform01();
                vel[s][d] = cfg.inertia * vel[s][d] +
                            cfg.personal_coeff * r1 * (personal_best[s][d] - pos[s][d]) +
                            cfg.social_coeff * r2 * (result.best_position[d] - pos[s][d]);
                pos[s][d] = std::clamp(pos[s][d] + vel[s][d], cfg.pos_min, cfg.pos_max);
            }
            double value = objective(pos[s]);
            if (value < personal_value[s]) {
                personal_value[s] = value;
                personal_best[s] = pos[s];
            }
            if (value < result.best_value) {
                result.best_value = value;
                result.best_position = pos[s];
            }
        }
        result.trace.push_back(result.best_value);
    }
    return result;
}

}  // namespace bfssl
