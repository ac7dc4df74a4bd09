#pragma once

namespace bfssl {

// DVFS compute model: power kappa*f^3, per-iteration delay cycles/f, and the
// iteration budget left after reserving the transmission window.
struct ComputeConfig {
    double kappa = 1.0e-27;           // effective switched capacitance
    double cycles_per_round = 1.0e7;  // |D_data| * r_cyc
    double round_duration_s = 0.5;    // T
    double max_trans_delay_s = 0.02;  // t_max^Trans
    double f_min_hz = 5.0e7;
    double f_max_hz = 4.0e8;

    void validate() const;            // throws config_error
};

// kappa * f^3. Throws constraint_error for f outside [f_min, f_max].
double compute_power(double f_hz, const ComputeConfig& cfg);

// cycles_per_round / f.
double compute_delay(double f_hz, const ComputeConfig& cfg);

// kappa * f^2 * cycles_per_round == compute_power * compute_delay.
double compute_energy_per_iter(double f_hz, const ComputeConfig& cfg);

// max(floor((T - t_max^Trans) / compute_delay) - 1, 0).
int iteration_count(double f_hz, const ComputeConfig& cfg);

// 1 / compute_energy_per_iter.
double frequency_utility(double f_hz, const ComputeConfig& cfg);

}  // namespace bfssl
