#include "bfssl/mobility.hpp"

#include <algorithm>
#include <cmath>

#include "bfssl/errors.hpp"
#include "bfssl/mathutil.hpp"

namespace bfssl {

void MobilityConfig::validate() const {
    if (!(v_min_kmh < v_max_kmh)) throw config_error("mobility: v_min must be < v_max");
    if (!(sigma2 > 0.0)) throw config_error("mobility: sigma2 must be > 0");
    double sum = turn_probs[0] + turn_probs[1] + turn_probs[2];
    if (turn_probs[0] < 0.0 || turn_probs[1] < 0.0 || turn_probs[2] < 0.0 ||
        std::abs(sum - 1.0) > 1e-12) {
        throw config_error("mobility: turn probabilities must be >= 0 and sum to 1");
    }
    if (!(slot_duration_s > 0.0)) throw config_error("mobility: slot_duration must be > 0");
    if (!(d_floor_m > 0.0)) throw config_error("mobility: d_floor must be > 0");
    if (!(spawn_radius_m > 0.0) || !(exit_radius_m >= spawn_radius_m))
        throw config_error("mobility: need 0 < spawn_radius <= exit_radius");
}

namespace {

// Normalized truncation bounds and their CDF values.
struct TruncParams {
    double sigma, lo_z, hi_z, cdf_lo, cdf_hi;
};

TruncParams trunc_params(const MobilityConfig& cfg) {
    TruncParams t;
    t.sigma = std::sqrt(cfg.sigma2);
    t.lo_z = (cfg.v_min_kmh - cfg.mu_kmh) / t.sigma;
    t.hi_z = (cfg.v_max_kmh - cfg.mu_kmh) / t.sigma;
    t.cdf_lo = normal_cdf(t.lo_z);
    t.cdf_hi = normal_cdf(t.hi_z);
    return t;
}

}  // namespace

double sample_velocity(const MobilityConfig& cfg, Rng& rng) {
    TruncParams t = trunc_params(cfg);
    double mass = t.cdf_hi - t.cdf_lo;
    if (mass < 1e-300) {
        // Truncation window carries no representable mass; all samples sit at
        // the bound nearer the mean.
        return cfg.mu_kmh < cfg.v_min_kmh ? cfg.v_min_kmh : cfg.v_max_kmh;
    }
    double u = t.cdf_lo + mass * rng.uniform01();
    double v = cfg.mu_kmh + t.sigma * normal_quantile(u);
    return std::clamp(v, cfg.v_min_kmh, cfg.v_max_kmh);
}

double velocity_pdf(const MobilityConfig& cfg, double v_kmh) {
    if (v_kmh < cfg.v_min_kmh || v_kmh > cfg.v_max_kmh) return 0.0;
    TruncParams t = trunc_params(cfg);
    double mass = t.cdf_hi - t.cdf_lo;
    if (mass < 1e-300) return 0.0;
    double z = (v_kmh - cfg.mu_kmh) / t.sigma;
    return normal_pdf(z) / (t.sigma * mass);
}

double velocity_cdf(const MobilityConfig& cfg, double v_kmh) {
    if (v_kmh <= cfg.v_min_kmh) return 0.0;
    if (v_kmh >= cfg.v_max_kmh) return 1.0;
    TruncParams t = trunc_params(cfg);
    double mass = t.cdf_hi - t.cdf_lo;
    if (mass < 1e-300) return v_kmh >= cfg.mu_kmh ? 1.0 : 0.0;
    double z = (v_kmh - cfg.mu_kmh) / t.sigma;
    return (normal_cdf(z) - t.cdf_lo) / mass;
}

namespace {

std::array<double, 2> rotate_left(const std::array<double, 2>& h) {
    return {-h[1], h[0]};
}

std::array<double, 2> rotate_right(const std::array<double, 2>& h) {
    return {h[1], -h[0]};
}

}  // namespace

VehicleState step_vehicle(const VehicleState& state, const MobilityConfig& cfg, Rng& rng) {
    double v_ms = state.velocity_kmh / 3.6;
    double disp = v_ms * cfg.slot_duration_s;

    // Signed progress along the heading, relative to the intersection center.
    double rel_x = state.position_m[0] - cfg.bs_position_m[0];
    double rel_y = state.position_m[1] - cfg.bs_position_m[1];
    double s0 = rel_x * state.heading[0] + rel_y * state.heading[1];

    VehicleState next = state;
    next.position_m[0] += state.heading[0] * disp;
    next.position_m[1] += state.heading[1] * disp;

    if (!state.has_turned && s0 < 0.0 && s0 + disp >= 0.0) {
        int choice = rng.categorical(cfg.turn_probs.data(), 3);
        if (choice == 0) next.heading = rotate_left(state.heading);
        else if (choice == 1) next.heading = rotate_right(state.heading);
        next.has_turned = true;
    }

    next.velocity_kmh = sample_velocity(cfg, rng);
    return next;
}

double distance_to_bs(const VehicleState& state, const MobilityConfig& cfg) {
    double dx = state.position_m[0] - cfg.bs_position_m[0];
    double dy = state.position_m[1] - cfg.bs_position_m[1];
    return std::max(cfg.d_floor_m, std::hypot(dx, dy));
}

VehicleState spawn_vehicle(int id, const MobilityConfig& cfg, Rng& rng) {
    static const std::array<std::array<double, 2>, 4> inbound = {{
        {{-1.0, 0.0}},  // arriving from +x
        {{1.0, 0.0}},   // arriving from -x
        {{0.0, -1.0}},  // arriving from +y
        {{0.0, 1.0}},   // arriving from -y
    }};
    int road = rng.uniform_int(4);
    VehicleState v;
    v.id = id;
    v.heading = inbound[road];
    v.position_m = {cfg.bs_position_m[0] - v.heading[0] * cfg.spawn_radius_m,
                    cfg.bs_position_m[1] - v.heading[1] * cfg.spawn_radius_m};
    v.velocity_kmh = sample_velocity(cfg, rng);
    v.has_turned = false;
    return v;
}

}  // namespace bfssl
