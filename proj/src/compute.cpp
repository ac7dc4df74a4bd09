#include "bfssl/compute.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bfssl/errors.hpp"

namespace bfssl {

void ComputeConfig::validate() const {
    if (!(f_min_hz < f_max_hz)) throw config_error("compute: f_min must be < f_max");
    if (!(max_trans_delay_s > 0.0 && max_trans_delay_s < round_duration_s))
        throw config_error("compute: need 0 < t_max_trans < round_duration");
    if (!(cycles_per_round > 0.0)) throw config_error("compute: cycles_per_round must be > 0");
    if (!(kappa > 0.0)) throw config_error("compute: kappa must be > 0");
}

namespace {

void check_frequency(double f_hz, const ComputeConfig& cfg) {
    if (f_hz < cfg.f_min_hz || f_hz > cfg.f_max_hz) {
        throw constraint_error("cpu frequency " + std::to_string(f_hz) +
                               " outside [f_min, f_max]");
    }
}

}  // namespace

double compute_power(double f_hz, const ComputeConfig& cfg) {
    check_frequency(f_hz, cfg);
    return cfg.kappa * f_hz * f_hz * f_hz;
}

double compute_delay(double f_hz, const ComputeConfig& cfg) {
    return cfg.cycles_per_round / f_hz;
}

double compute_energy_per_iter(double f_hz, const ComputeConfig& cfg) {
    check_frequency(f_hz, cfg);
    return cfg.kappa * f_hz * f_hz * cfg.cycles_per_round;
}

int iteration_count(double f_hz, const ComputeConfig& cfg) {
    check_frequency(f_hz, cfg);
    double window = cfg.round_duration_s - cfg.max_trans_delay_s;
    int n = static_cast<int>(std::floor(window / compute_delay(f_hz, cfg)));
    return std::max(n - 1, 0);
}

double frequency_utility(double f_hz, const ComputeConfig& cfg) {
    return 1.0 / compute_energy_per_iter(f_hz, cfg);
}

}  // namespace bfssl
