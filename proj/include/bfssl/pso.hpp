#pragma once

#include <functional>
#include <span>
#include <vector>

#include "bfssl/rng.hpp"

namespace bfssl {

// Particle swarm over a normalized box, used as the non-learning allocator
// baseline. Positions live in [pos_min, pos_max] per dimension; the caller
// maps them onto physical action ranges.
struct PsoConfig {
    int max_iterations = 100;
    double inertia = 0.2;
    double personal_coeff = 0.1;
    double social_coeff = 0.1;
    double pos_min = 0.0001;
    double pos_max = 1.0;
    int swarm_size = 30;

    void validate() const;
};

struct PsoResult {
    std::vector<double> best_position;
    double best_value = 0.0;
    std::vector<double> trace;  // best-so-far per iteration, non-increasing
};

using PsoObjective = std::function<double(std::span<const double>)>;

PsoResult pso_optimize(const PsoObjective& objective, int dim, const PsoConfig& cfg, Rng& rng);

}  // namespace bfssl
