// Command-line front end: train the allocator, replay a trained policy, or
// run one of the baselines, writing metrics/summary/checkpoint to --out.
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bfssl/harness.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    long seed = -1;
    int episodes = -1;
    int slots = -1;
    int vehicles = -1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "configuration file (key = value lines)");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--seed", opts.seed, "override the master seed");
    cmd->add_option("--episodes", opts.episodes, "override episode count");
    cmd->add_option("--slots", opts.slots, "override slots per episode");
    cmd->add_option("--vehicles", opts.vehicles, "override training vehicle count");
}

bfssl::RunConfig build_config(const CommonOpts& opts) {
    bfssl::RunConfig cfg;
    if (!opts.config_path.empty()) cfg = bfssl::load_config(opts.config_path);
    if (opts.seed >= 0) cfg.seed = opts.seed;
    if (opts.episodes > 0) cfg.episodes = opts.episodes;
    if (opts.slots > 0) cfg.slots = opts.slots;
    if (opts.vehicles > 0) cfg.vehicles = opts.vehicles;
    cfg.validate();
    return cfg;
}

void write_outputs(const bfssl::RunConfig& cfg, bfssl::RunMode mode,
                   const bfssl::RunResult& result, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    bfssl::write_metrics_csv(result.metrics, out_dir + "/metrics.csv");
    bfssl::write_summary_json(cfg, mode, result, out_dir + "/summary.json");
    std::printf("wrote %zu metric rows to %s/metrics.csv\n", result.metrics.size(),
                out_dir.c_str());
    std::printf("mean reward %.6g, final global loss %.6g, empty rounds %ld\n",
                result.mean_reward(), result.final_global_loss(), result.empty_rounds);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Federated self-supervised learning simulator with SAC resource allocation"};
    app.require_subcommand(1);

    CommonOpts train_opts, test_opts, baseline_opts;
    std::string actor_path;
    std::string baseline_name;

    CLI::App* train_cmd = app.add_subcommand("train", "train the SAC allocator end to end");
    add_common(train_cmd, train_opts);

    CLI::App* test_cmd = app.add_subcommand("test", "replay a trained actor deterministically");
    add_common(test_cmd, test_opts);
    test_cmd->add_option("--actor", actor_path, "checkpoint produced by train")->required();

    CLI::App* baseline_cmd = app.add_subcommand("baseline", "run a comparison allocator/aggregator");
    baseline_cmd->add_option("name", baseline_name, "pso | uniform-agg | drop-agg | random-alloc")
        ->required();
    add_common(baseline_cmd, baseline_opts);

    CLI::App* config_cmd = app.add_subcommand("print-config", "print the full key schema with defaults");

    CLI11_PARSE(app, argc, argv);

    try {
        if (config_cmd->parsed()) {
            std::cout << bfssl::dump_config(bfssl::RunConfig{});
            return 0;
        }
        if (train_cmd->parsed()) {
            bfssl::RunConfig cfg = build_config(train_opts);
            bfssl::Simulation sim(cfg, bfssl::RunMode::train);
            bfssl::RunResult result = sim.run();
            write_outputs(cfg, bfssl::RunMode::train, result, train_opts.out_dir);
            sim.make_checkpoint().save(train_opts.out_dir + "/checkpoint.txt");
            std::printf("checkpoint saved to %s/checkpoint.txt\n", train_opts.out_dir.c_str());
            return 0;
        }
        if (test_cmd->parsed()) {
            bfssl::RunConfig cfg = build_config(test_opts);
            bfssl::Checkpoint ckpt = bfssl::Checkpoint::load(actor_path);
            bfssl::RunResult result = bfssl::run_test(cfg, ckpt);
            write_outputs(cfg, bfssl::RunMode::test, result, test_opts.out_dir);
            return 0;
        }
        if (baseline_cmd->parsed()) {
            bfssl::RunConfig cfg = build_config(baseline_opts);
            bfssl::RunMode mode = bfssl::run_mode_from_name(baseline_name);
            bfssl::RunResult result = bfssl::run_baseline(cfg, baseline_name);
            write_outputs(cfg, mode, result, baseline_opts.out_dir);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
