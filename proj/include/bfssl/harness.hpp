#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bfssl/aggregate.hpp"
#include "bfssl/checkpoint.hpp"
#include "bfssl/config.hpp"
#include "bfssl/sac.hpp"

namespace bfssl {

enum class RunMode {
    train,
    test,
    baseline_pso,
    baseline_uniform_agg,
    baseline_drop_agg,
    baseline_random_alloc,
};

// Accepts "train", "test", "pso", "uniform-agg", "drop-agg", "random-alloc".
RunMode run_mode_from_name(const std::string& name);
std::string run_mode_name(RunMode mode);

// r = (k-1)*S_max + t; throws internal_error for t outside [1, S_max].
long slot_to_round(int episode, int slot, int slots_per_episode);

struct MetricsRow {
    int episode = 0;
    int slot = 0;
    long round = 0;
    double objective = 0.0;
    double total_energy_j = 0.0;
    double max_delay_s = 0.0;
    double reward = 0.0;
    int total_iterations = 0;
    int success_count = 0;
    double mean_blur = 0.0;
    double global_loss = 0.0;
};

std::string metrics_csv_header();
std::string metrics_csv_line(const MetricsRow& row);
void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::string& path);

struct RunResult {
    std::vector<MetricsRow> metrics;
    ModelParams global_model;
    long empty_rounds = 0;
    long update_iterations = 0;

    double mean_reward() const;
    double mean_reward_last_episodes(int episodes) const;
    double mean_objective() const;
    double objective_variance() const;
    double final_global_loss() const;
};

// One full Algorithm run: the episode/slot clock, per-slot state assembly,
// action application, local training, upload draws, aggregation, reward,
// replay storage, and the SAC update cadence.
class Simulation {
public:
    Simulation(RunConfig cfg, RunMode mode);

    // Install trained actor parameters (test mode). Throws on arch mismatch.
    void load_actor(const Checkpoint& ckpt);

    RunResult run();

    SacAgent& agent() { return *agent_; }
    const SacAgent& agent() const { return *agent_; }
    const RunConfig& config() const { return cfg_; }

    // Actor/critics/targets/temperature plus the current global model.
    Checkpoint make_checkpoint() const;

private:
    struct SlotAction {
        std::vector<double> powers_w;
        std::vector<double> frequencies_hz;
        std::vector<double> squashed;  // replay representation
    };

    void realize_slot();
    std::vector<double> assemble_state() const;
    SlotAction choose_action();
    SlotAction random_action();
    SlotAction pso_action();
    ModelParams aggregate_round(const std::vector<ModelParams>& locals,
                                const std::vector<BlurRecord>& records);
    void advance_vehicles();
    double slot_reward_for(const std::vector<double>& powers,
                           const std::vector<double>& freqs) const;

    RunConfig cfg_;
    RunMode mode_;
    Rng mobility_rng_, channel_rng_, success_rng_, ssl_rng_, sac_rng_, pso_rng_;
    BoundsSpec bounds_;
    std::vector<VehicleState> vehicles_;
    std::vector<double> prev_velocity_kmh_;
    std::vector<ChannelRealization> realizations_;
    std::vector<double> state_;
    std::optional<SacAgent> agent_;
    ModelParams global_;
    std::vector<std::vector<double>> centers_;
    DataBatch probe_;
    long round_ = 0;
    long empty_rounds_ = 0;
    long updates_done_ = 0;
};

// Convenience wrappers matching the CLI subcommands.
RunResult run_training(const RunConfig& cfg);
RunResult run_test(const RunConfig& cfg, const Checkpoint& actor);
RunResult run_baseline(const RunConfig& cfg, const std::string& which);

void write_summary_json(const RunConfig& cfg, RunMode mode, const RunResult& result,
                        const std::string& path);

}  // namespace bfssl
