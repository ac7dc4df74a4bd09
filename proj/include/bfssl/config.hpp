#pragma once

#include <cstdint>
#include <string>

#include "bfssl/channel.hpp"
#include "bfssl/compute.hpp"
#include "bfssl/kkt.hpp"
#include "bfssl/mobility.hpp"
#include "bfssl/pso.hpp"
#include "bfssl/sac.hpp"
#include "bfssl/simco.hpp"

namespace bfssl {

// Full run configuration, read from a flat key = value file. Unknown keys are
// rejected. Every key has a desk-scale default; the schema is what
// dump_config prints.
struct RunConfig {
    MobilityConfig mobility;
    ChannelConfig channel;
    ComputeConfig compute;
    ObjectiveWeights weights;
    SacConfig sac;
    SimcoConfig simco;
    PsoConfig pso;

    // reward shaping
    double theta1 = 0.05;   // penalty on (P* - p_min)
    double theta2 = 5e-5;   // bonus per local iteration

    // state normalization: fading enters as log10(attenuation)/fading_norm_div,
    // velocity as v/v_max
    double fading_norm_div = 20.0;

    // blur / corruption
    double blur_coeff = 0.01;                  // s*H/Q, km/h -> blur level
    double blur_velocity_threshold_kmh = 100.0;
    double corrupt_share = 0.2;                // fraction blurred above threshold
    double drop_threshold_kmh = 100.0;         // baseline2 discard rule
    double corrupt_blend = 0.5;
    double corrupt_noise_std = 0.1;

    // loop shape
    int vehicles = 2;           // N
    int episodes = 200;         // K_max
    int slots = 20;             // S_max
    int update_every = 2;       // K_u, episodes between update events
    int updates_per_event = 0;  // 0 means one per slot (S_max)
    int warmup_slots = 200;     // uniform-random actions until this many transitions exist
    long seed = 1;
    int test_slots = 50;
    int eval_samples = 32;      // probe batch for the global-loss metric

    void validate() const;  // throws config_error
};

// Parse one "key = value" assignment; throws config_error on unknown keys or
// malformed values.
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value);

// Load from file: '#' comments and blank lines ignored.
RunConfig load_config(const std::string& path);

// Apply assignments from in-memory text (same syntax as the file).
void apply_config_text(RunConfig& cfg, const std::string& text);

// Canonical textual form (also documents the schema).
std::string dump_config(const RunConfig& cfg);

// FNV-1a hash of the canonical form, reported in run summaries.
std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace bfssl
