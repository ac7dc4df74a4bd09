#include "bfssl/channel.hpp"

#include <cmath>

#include "bfssl/errors.hpp"

namespace bfssl {

double ChannelConfig::noise_w_per_hz() const {
    return std::pow(10.0, (noise_dbm_per_hz - 30.0) / 10.0);
}

double ChannelConfig::noise_floor_w() const {
    return bandwidth_hz * noise_w_per_hz();
}

double ChannelConfig::p_min_w() const {
    return std::pow(10.0, (p_min_dbm - 30.0) / 10.0);
}

double ChannelConfig::p_max_w() const {
    return std::pow(10.0, (p_max_dbm - 30.0) / 10.0);
}

void ChannelConfig::validate() const {
    if (!(bandwidth_hz > 0.0)) throw config_error("channel: bandwidth must be > 0");
    if (!(error_cap > 0.0 && error_cap < 1.0))
        throw config_error("channel: error_cap must be in (0,1)");
    if (!(p_min_dbm < p_max_dbm)) throw config_error("channel: p_min must be < p_max");
    if (!(waterfall_m > 0.0)) throw config_error("channel: waterfall threshold must be > 0");
    if (!(model_bits > 0.0)) throw config_error("channel: model size must be > 0");
    if (interferer_count < 0) throw config_error("channel: interferer_count must be >= 0");
    if (!(shadow_std_db >= 0.0)) throw config_error("channel: shadow std must be >= 0");
}

double path_loss_db(double distance_m) {
    return 128.1 + 37.6 * std::log10(distance_m / 1000.0);
}

double ChannelRealization::attenuation() const {
    return std::pow(10.0, (path_loss_db + shadow_db) / 10.0);
}

ChannelRealization realize_channel(double distance_m, const ChannelConfig& cfg, Rng& rng) {
    ChannelRealization r;
    r.path_loss_db = path_loss_db(distance_m);
    r.shadow_db = rng.normal(0.0, cfg.shadow_std_db);
    r.fast_fading = std::max(rng.exponential(), cfg.fast_fading_floor);
    r.gain = r.fast_fading / r.attenuation();

    // Interferer draws are consumed unconditionally so that sweeping
    // interferer_count leaves every other stream draw in place.
    double pl_i = path_loss_db(cfg.interferer_distance_m);
    double shadow_i = rng.normal(0.0, cfg.shadow_std_db);
    double g_i = std::max(rng.exponential(), cfg.fast_fading_floor);
    double h_i = g_i / std::pow(10.0, (pl_i + shadow_i) / 10.0);
    r.interference_w = cfg.interferer_count * cfg.interferer_power_w * h_i;
    return r;
}

double transmission_rate(double p_w, double gain, double interference_w, double beta,
                         const ChannelConfig& cfg) {
    double sinr = p_w * gain / (interference_w + cfg.noise_floor_w());
    return beta * cfg.bandwidth_hz * std::log1p(sinr);
}

std::pair<double, double> transmission_delay_energy(double p_w, double gain,
                                                    double interference_w, double beta,
                                                    const ChannelConfig& cfg) {
    double rate = transmission_rate(p_w, gain, interference_w, beta, cfg);
    if (!(rate > 0.0)) throw link_error("unreachable link: zero transmission rate");
    double delay = cfg.model_bits / rate;
    return {delay, p_w * delay};
}

double error_probability(double p_w, double gain, double interference_w,
                         const ChannelConfig& cfg) {
    double x = cfg.waterfall_m * (interference_w + cfg.noise_floor_w()) / (p_w * gain);
    return -std::expm1(-x);
}

double p_tau(double gain, double interference_w, const ChannelConfig& cfg) {
    return -cfg.waterfall_m * (interference_w + cfg.noise_floor_w()) /
           (gain * std::log1p(-cfg.error_cap));
}

double p_star(double gain, double interference_w, const ChannelConfig& cfg) {
    return std::max(cfg.p_min_w(), p_tau(gain, interference_w, cfg));
}

std::pair<double, double> feasible_power_range(double gain, double interference_w,
                                               const ChannelConfig& cfg) {
    double lo = p_star(gain, interference_w, cfg);
    double hi = cfg.p_max_w();
    if (lo > hi) throw link_error("infeasible link: error cap requires power above p_max");
    return {lo, hi};
}

int success_indicator(double p_w, double gain, double interference_w,
                      const ChannelConfig& cfg, Rng& rng) {
    double eps = error_probability(p_w, gain, interference_w, cfg);
    return rng.uniform01() < 1.0 - eps ? 1 : 0;
}

}  // namespace bfssl
