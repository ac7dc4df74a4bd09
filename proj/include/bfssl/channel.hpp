#pragma once

#include <utility>

#include "bfssl/rng.hpp"

namespace bfssl {

// Uplink model: dB path loss plus log-normal shadowing for the deterministic
// attenuation, exponential fast fading on top, Shannon rate over an allocated
// bandwidth share, and an exponential waterfall error probability.
struct ChannelConfig {
    double bandwidth_hz = 2.0e6;        // B^U
    double noise_dbm_per_hz = -114.0;   // N0, converted to W/Hz internally
    double shadow_std_db = 8.0;
    double waterfall_m = 0.023;
    double error_cap = 0.2;             // epsilon_tau
    double model_bits = 2.0e4;          // Z, uplink payload per round
    double p_min_dbm = 5.0;
    double p_max_dbm = 30.0;
    int interferer_count = 0;
    double interferer_power_w = 0.1;
    double interferer_distance_m = 150.0;
    // Optional floor on the exponential fast fade (0 = pure Rayleigh-style
    // model). Deep-fade slots otherwise make per-slot delay heavy-tailed
    // beyond anything a mean can estimate.
    double fast_fading_floor = 0.0;

    double noise_w_per_hz() const;      // linear N0
    double noise_floor_w() const;       // B^U * N0
    double p_min_w() const;
    double p_max_w() const;

    void validate() const;              // throws config_error
};

struct ChannelRealization {
    double path_loss_db = 0.0;
    double shadow_db = 0.0;
    double fast_fading = 1.0;           // g, exponential with unit mean
    double gain = 0.0;                  // h = g / attenuation
    double interference_w = 0.0;        // I

    // Linear attenuation J = 10^((path_loss + shadow)/10); the state vector
    // exposes this, not the faded gain.
    double attenuation() const;
};

// 128.1 + 37.6 log10(d / 1 km).
double path_loss_db(double distance_m);

ChannelRealization realize_channel(double distance_m, const ChannelConfig& cfg, Rng& rng);

// Shannon rate in bits/s over the allocated share beta of the uplink band.
double transmission_rate(double p_w, double gain, double interference_w, double beta,
                         const ChannelConfig& cfg);

// (delay s, energy J) for the configured payload. Throws link_error at zero rate.
std::pair<double, double> transmission_delay_energy(double p_w, double gain,
                                                    double interference_w, double beta,
                                                    const ChannelConfig& cfg);

// Waterfall data error probability, strictly decreasing in p.
double error_probability(double p_w, double gain, double interference_w,
                         const ChannelConfig& cfg);

// Power at which the error probability equals the cap error_cap.
double p_tau(double gain, double interference_w, const ChannelConfig& cfg);

// max(p_min, p_tau); the reward penalizes its gap above p_min.
double p_star(double gain, double interference_w, const ChannelConfig& cfg);

// Feasible power interval [P*, p_max]; throws link_error when P* > p_max.
std::pair<double, double> feasible_power_range(double gain, double interference_w,
                                               const ChannelConfig& cfg);

// Bernoulli(1 - error_probability) upload outcome.
int success_indicator(double p_w, double gain, double interference_w,
                      const ChannelConfig& cfg, Rng& rng);

}  // namespace bfssl
