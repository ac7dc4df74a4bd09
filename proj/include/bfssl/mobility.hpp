#pragma once

#include <array>

#include "bfssl/rng.hpp"

namespace bfssl {

// Vehicle kinematics at an intersection: truncated-Gaussian velocities,
// a single turn decision at the center, straight driving otherwise.
// Velocities are km/h throughout; positions are meters.
struct MobilityConfig {
    double v_min_kmh = 60.0;
    double v_max_kmh = 150.0;
    double mu_kmh = 105.0;        // (v_min + v_max) / 2
    double sigma2 = 8.0;          // (km/h)^2
    std::array<double, 3> turn_probs = {0.3, 0.3, 0.4};  // left, right, straight
    std::array<double, 2> bs_position_m = {0.0, 0.0};
    double slot_duration_s = 0.5;
    double spawn_radius_m = 150.0;
    double exit_radius_m = 200.0;
    double d_floor_m = 1.0;       // path loss diverges at zero distance

    void validate() const;        // throws config_error
};

struct VehicleState {
    int id = 0;
    std::array<double, 2> position_m = {0.0, 0.0};
    std::array<double, 2> heading = {1.0, 0.0};  // unit vector
    double velocity_kmh = 0.0;
    bool has_turned = false;
};

// One draw from the truncated Gaussian over [v_min, v_max] (inverse CDF).
double sample_velocity(const MobilityConfig& cfg, Rng& rng);

// Density of the truncated Gaussian; zero outside [v_min, v_max].
double velocity_pdf(const MobilityConfig& cfg, double v_kmh);

// CDF matching velocity_pdf, used for spawning/diagnostics.
double velocity_cdf(const MobilityConfig& cfg, double v_kmh);

// Advance one slot: move along heading at the current velocity, apply the
// one-shot turn decision when crossing the intersection center, then
// resample the velocity for the next slot.
VehicleState step_vehicle(const VehicleState& state, const MobilityConfig& cfg, Rng& rng);

// Euclidean distance to the base station, clamped below by d_floor.
double distance_to_bs(const VehicleState& state, const MobilityConfig& cfg);

// Fresh vehicle on one of the four approach roads, heading toward the center.
VehicleState spawn_vehicle(int id, const MobilityConfig& cfg, Rng& rng);

}  // namespace bfssl
