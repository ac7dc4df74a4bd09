#pragma once

#include <span>
#include <vector>

#include "bfssl/channel.hpp"
#include "bfssl/compute.hpp"
#include "bfssl/rng.hpp"

namespace bfssl {

struct ObjectiveWeights {
    double lambda_energy = 0.7;  // lambda_1
    double lambda_delay = 0.3;   // lambda_2

    void validate() const;       // throws config_error
};

// Per-vehicle coefficients of the reduced allocation objective
//   sum_n [ A/beta + B f^3 - C f^2 ] + max_n ( E/beta + F/f ).
// A and E carry the link terms; B, C, F the timing/compute constants.
struct NotationABCEF {
    double A = 0.0;
    double B = 0.0;
    double C = 0.0;
    double E = 0.0;
    double F = 0.0;
};

struct AllocationAction {
    std::vector<double> powers_w;
    std::vector<double> frequencies_hz;
    std::vector<double> betas;

    // Throws constraint_error naming the violated bound.
    void validate(const ChannelConfig& ch, const ComputeConfig& comp) const;
};

struct CostBreakdown {
    std::vector<double> trans_delay_s;
    std::vector<double> trans_energy_j;
    std::vector<double> comp_delay_s;    // one local iteration
    std::vector<double> comp_energy_j;   // all iterations of the round
    std::vector<int> iterations;
    double total_energy_j = 0.0;
    double max_delay_s = 0.0;
    double objective = 0.0;
};

NotationABCEF notations(double p_w, double gain, double interference_w,
                        const ObjectiveWeights& weights, const ChannelConfig& ch,
                        const ComputeConfig& comp);

// Multiplier tau = (3 B f^4 - 2 C f^3) / F for one vehicle.
double kkt_tau(double f_hz, const NotationABCEF& n);

struct KktBetaResult {
    std::vector<double> betas;
    int clamped = 0;  // radicands floored to keep the square roots real
};

// Closed-form bandwidth shares beta_n proportional to sqrt(A_n + tau_n E_n),
// normalized over the N vehicles.
KktBetaResult kkt_beta(std::span<const NotationABCEF> notes, std::span<const double> freqs_hz);

// Reduced objective evaluated at given shares (the quantity both the closed
// form and the numerical oracle minimize over the simplex).
double reduced_objective(std::span<const NotationABCEF> notes, std::span<const double> freqs_hz,
                         std::span<const double> betas);

// Weighted energy/delay cost of a full action against realized channels.
// Throws constraint_error on infeasible actions, link_error on dead links.
std::pair<double, CostBreakdown> objective(const AllocationAction& action,
                                           std::span<const ChannelRealization> realizations,
                                           const ObjectiveWeights& weights,
                                           const ChannelConfig& ch, const ComputeConfig& comp);

struct OracleConfig {
    int restarts = 24;
    int max_iterations = 600;
    double beta_floor = 1e-6;
    double tolerance = 1e-12;
};

struct OracleResult {
    std::vector<double> betas;
    double value = 0.0;
    bool converged = false;
};

// Projected-gradient minimization of reduced_objective over the simplex,
// restarted from random interior points. Independent of kkt_beta.
OracleResult oracle_beta(std::span<const NotationABCEF> notes, std::span<const double> freqs_hz,
                         const OracleConfig& cfg, Rng& rng);

// Euclidean projection onto { x >= floor, sum x = 1 }.
void project_simplex(std::span<double> x, double floor);

}  // namespace bfssl
