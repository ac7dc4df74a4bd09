#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <sstream>
#include <vector>

#include "bfssl/errors.hpp"
#include "bfssl/harness.hpp"

using namespace bfssl;

namespace {

// Desk config small enough for per-test runs.
RunConfig tiny_cfg() {
    RunConfig cfg;
    cfg.vehicles = 2;
    cfg.episodes = 2;
    cfg.slots = 4;
    cfg.eval_samples = 8;
    cfg.simco.samples_per_round = 6;
    cfg.simco.input_dim = 4;
    cfg.simco.encoder_hidden = 8;
    cfg.simco.encoder_out = 8;
    cfg.simco.head_hidden = 8;
    cfg.simco.embed_dim = 8;
    cfg.sac.hidden_layers = 1;
    cfg.sac.hidden_width = 8;
    cfg.seed = 5;
    return cfg;
}

std::string csv_of(const RunResult& r) {
    std::ostringstream out;
    out << metrics_csv_header() << "\n";
    for (const MetricsRow& row : r.metrics) out << metrics_csv_line(row) << "\n";
    return out.str();
}

}  // namespace

TEST_CASE("slot to round mapping") {
    CHECK(slot_to_round(1, 1, 100) == 1);
    CHECK(slot_to_round(2, 1, 100) == 101);
    CHECK(slot_to_round(3, 100, 100) == 300);
    CHECK_THROWS_AS(slot_to_round(1, 0, 100), internal_error);
    CHECK_THROWS_AS(slot_to_round(1, 101, 100), internal_error);

    for (int k = 1; k <= 5; ++k)
        for (int t = 1; t <= 7; ++t) CHECK(slot_to_round(k, t, 7) == (k - 1) * 7 + t);
}

TEST_CASE("config text parsing, unknown keys, and dump round trip") {
    RunConfig cfg;
    apply_config_text(cfg, "# comment line\n\nvehicles = 5\nv_max_kmh = 140\ntau_alpha = 0.2\n");
    CHECK(cfg.vehicles == 5);
    CHECK(cfg.mobility.v_max_kmh == 140.0);
    CHECK(cfg.simco.tau_alpha == 0.2);

    RunConfig other;
    CHECK_THROWS_AS(apply_config_text(other, "no_such_key = 1\n"), config_error);
    CHECK_THROWS_AS(apply_config_text(other, "vehicles 5\n"), config_error);
    CHECK_THROWS_AS(apply_config_text(other, "vehicles = abc\n"), config_error);

    // dump -> apply -> dump is a fixed point
    std::string dumped = dump_config(cfg);
    RunConfig replayed;
    apply_config_text(replayed, dumped);
    CHECK(dump_config(replayed) == dumped);
    CHECK(config_hash(replayed) == config_hash(cfg));
    CHECK(config_hash(replayed) != config_hash(RunConfig{}));
}

TEST_CASE("config validation rejects bad shapes") {
    RunConfig cfg = tiny_cfg();
    CHECK_NOTHROW(cfg.validate());
    cfg.vehicles = 0;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg = tiny_cfg();
    cfg.weights.lambda_energy = 0.9;  // no longer sums to 1
    CHECK_THROWS_AS(cfg.validate(), config_error);
}

TEST_CASE("metrics row count is episodes times slots and rounds line up") {
    RunConfig cfg = tiny_cfg();
    Simulation sim(cfg, RunMode::train);
    RunResult r = sim.run();
    REQUIRE(r.metrics.size() == std::size_t(cfg.episodes * cfg.slots));
    for (const MetricsRow& row : r.metrics) {
        CHECK(row.round == slot_to_round(row.episode, row.slot, cfg.slots));
        CHECK(std::isfinite(row.reward));
        CHECK(std::isfinite(row.objective));
        CHECK(std::isfinite(row.global_loss));
        CHECK(row.success_count >= 0);
        CHECK(row.success_count <= cfg.vehicles);
    }
}

TEST_CASE("identical seeds give byte-identical metrics") {
    RunConfig cfg = tiny_cfg();
    Simulation a(cfg, RunMode::train);
    Simulation b(cfg, RunMode::train);
    CHECK(csv_of(a.run()) == csv_of(b.run()));

    RunConfig other = cfg;
    other.seed = 6;
    Simulation c(other, RunMode::train);
    CHECK(csv_of(c.run()) != csv_of(Simulation(cfg, RunMode::train).run()));
}

TEST_CASE("degenerate single-slot run aggregates exactly once") {
    RunConfig cfg = tiny_cfg();
    cfg.vehicles = 1;
    cfg.episodes = 1;
    cfg.slots = 1;
    cfg.channel.waterfall_m = 1e-12;  // error probability ~ 0: forced success
    Simulation sim(cfg, RunMode::train);
    RunResult r = sim.run();
    REQUIRE(r.metrics.size() == 1);
    CHECK(r.metrics[0].success_count == 1);
    CHECK(r.empty_rounds == 0);
    CHECK(r.metrics[0].total_iterations > 0);
}

TEST_CASE("all-failed uploads carry the global model over") {
    RunConfig cfg = tiny_cfg();
    cfg.channel.waterfall_m = 1e12;  // error probability ~ 1: every upload lost
    Simulation sim(cfg, RunMode::train);
    RunResult r = sim.run();
    CHECK(r.empty_rounds == long(cfg.episodes * cfg.slots));
    for (const MetricsRow& row : r.metrics) CHECK(row.success_count == 0);
    // the probe loss never moves because the model never changes
    for (const MetricsRow& row : r.metrics)
        CHECK(row.global_loss == doctest::Approx(r.metrics[0].global_loss));
}

TEST_CASE("uniform aggregation equals blur weighting when blur is constant") {
    RunConfig cfg = tiny_cfg();
    // degenerate velocity spread: every vehicle always drives at 80 km/h
    cfg.mobility.mu_kmh = 80.0;
    cfg.mobility.sigma2 = 1e-12;
    Simulation a(cfg, RunMode::train);
    Simulation b(cfg, RunMode::baseline_uniform_agg);
    CHECK(csv_of(a.run()) == csv_of(b.run()));
}

TEST_CASE("drop aggregation with an unreachable threshold equals uniform") {
    RunConfig cfg = tiny_cfg();
    cfg.drop_threshold_kmh = cfg.mobility.v_max_kmh + 1.0;
    Simulation a(cfg, RunMode::baseline_drop_agg);
    Simulation b(cfg, RunMode::baseline_uniform_agg);
    CHECK(csv_of(a.run()) == csv_of(b.run()));
}

TEST_CASE("random allocator and pso baselines run inside the action box") {
    RunConfig cfg = tiny_cfg();
    cfg.episodes = 1;
    cfg.slots = 2;
    cfg.pso.max_iterations = 15;
    cfg.pso.swarm_size = 8;
    // objective() validates every action; a completed run implies feasibility
    CHECK_NOTHROW(run_baseline(cfg, "random-alloc"));
    CHECK_NOTHROW(run_baseline(cfg, "pso"));
    CHECK_THROWS_AS(run_baseline(cfg, "train"), config_error);
    CHECK_THROWS_AS(run_baseline(cfg, "nonsense"), config_error);
}

TEST_CASE("checkpoints round-trip bit exactly") {
    RunConfig cfg = tiny_cfg();
    Simulation sim(cfg, RunMode::train);
    sim.run();
    Checkpoint ckpt = sim.make_checkpoint();

    std::string path = "/tmp/bfssl_test_ckpt.txt";
    ckpt.save(path);
    Checkpoint loaded = Checkpoint::load(path);
    REQUIRE(loaded.sections.size() == ckpt.sections.size());
    for (std::size_t s = 0; s < ckpt.sections.size(); ++s) {
        CHECK(loaded.sections[s].name == ckpt.sections[s].name);
        CHECK(loaded.sections[s].meta == ckpt.sections[s].meta);
        REQUIRE(loaded.sections[s].values.size() == ckpt.sections[s].values.size());
        for (std::size_t i = 0; i < ckpt.sections[s].values.size(); ++i)
            CHECK(loaded.sections[s].values[i] == ckpt.sections[s].values[i]);
    }
    std::filesystem::remove(path);
}

TEST_CASE("checkpoint faults: missing section, bad magic, arch mismatch") {
    Checkpoint empty;
    CHECK_THROWS_AS(empty.require("actor"), internal_error);

    std::string path = "/tmp/bfssl_bad_ckpt.txt";
    {
        std::FILE* f = std::fopen(path.c_str(), "w");
        std::fputs("not-a-checkpoint v9\n", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(Checkpoint::load(path), internal_error);
    std::filesystem::remove(path);

    RunConfig cfg = tiny_cfg();
    Simulation sim(cfg, RunMode::train);
    Checkpoint ckpt = sim.make_checkpoint();

    RunConfig wider = cfg;
    wider.sac.hidden_width = 16;
    Simulation other(wider, RunMode::test);
    CHECK_THROWS_AS(other.load_actor(ckpt), internal_error);
}

TEST_CASE("test mode replays a trained actor deterministically") {
    RunConfig cfg = tiny_cfg();
    Simulation train_sim(cfg, RunMode::train);
    train_sim.run();
    Checkpoint ckpt = train_sim.make_checkpoint();

    RunConfig test_cfg = cfg;
    test_cfg.test_slots = 6;
    RunResult a = run_test(test_cfg, ckpt);
    RunResult b = run_test(test_cfg, ckpt);
    REQUIRE(a.metrics.size() == 6);
    CHECK(csv_of(a) == csv_of(b));
    CHECK(a.update_iterations == 0);
}

TEST_CASE("summary json and metrics files are written") {
    RunConfig cfg = tiny_cfg();
    Simulation sim(cfg, RunMode::train);
    RunResult r = sim.run();
    std::string dir = "/tmp/bfssl_test_out";
    std::filesystem::create_directories(dir);
    write_metrics_csv(r.metrics, dir + "/metrics.csv");
    write_summary_json(cfg, RunMode::train, r, dir + "/summary.json");
    CHECK(std::filesystem::exists(dir + "/metrics.csv"));
    CHECK(std::filesystem::exists(dir + "/summary.json"));
    CHECK(std::filesystem::file_size(dir + "/metrics.csv") > 100);
    std::filesystem::remove_all(dir);
}

TEST_CASE("mode names round trip") {
    for (const char* name : {"train", "test", "pso", "uniform-agg", "drop-agg", "random-alloc"})
        CHECK(run_mode_name(run_mode_from_name(name)) == name);
    CHECK_THROWS_AS(run_mode_from_name("bogus"), config_error);
}
