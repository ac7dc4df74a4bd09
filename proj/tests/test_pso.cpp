#include <doctest.h>

#include <cmath>
#include <vector>

#include "bfssl/pso.hpp"

using namespace bfssl;

TEST_CASE("swarm converges on a convex bowl") {
    PsoConfig cfg;  // Table-style defaults: 100 iterations, 0.2/0.1/0.1, swarm 30
    std::vector<double> target{0.4, 0.7, 0.25, 0.55};
    PsoObjective bowl = [&](std::span<const double> x) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - target[i]) * (x[i] - target[i]);
        return s;
    };
    Rng rng(1);
    PsoResult r = pso_optimize(bowl, 4, cfg, rng);
    CHECK(r.best_value < 1e-3);
}

TEST_CASE("best-so-far trace never increases") {
    PsoConfig cfg;
    PsoObjective wiggly = [](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) s += std::sin(13.0 * v) + v * v;
        return s;
    };
    Rng rng(2);
    PsoResult r = pso_optimize(wiggly, 3, cfg, rng);
    REQUIRE(r.trace.size() == std::size_t(cfg.max_iterations));
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] <= r.trace[i - 1]);
}

TEST_CASE("every evaluated position stays inside the box") {
    PsoConfig cfg;
    bool ok = true;
    PsoObjective checker = [&](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) {
            if (v < cfg.pos_min || v > cfg.pos_max) ok = false;
            s += v * v;
        }
        return s;
    };
    Rng rng(3);
    pso_optimize(checker, 5, cfg, rng);
    CHECK(ok);
}

TEST_CASE("fixed seeds reproduce the exact same search") {
    PsoConfig cfg;
    cfg.max_iterations = 40;
    PsoObjective bowl = [](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) s += (v - 0.3) * (v - 0.3);
        return s;
    };
    Rng r1(4), r2(4);
    PsoResult a = pso_optimize(bowl, 4, cfg, r1);
    PsoResult b = pso_optimize(bowl, 4, cfg, r2);
    CHECK(a.best_value == b.best_value);
    CHECK(a.best_position == b.best_position);
    CHECK(a.trace == b.trace);
}

TEST_CASE("config invariants") {
    PsoConfig cfg;
    cfg.swarm_size = 0;
    CHECK_THROWS(cfg.validate());
    cfg = PsoConfig{};
    cfg.pos_min = cfg.pos_max;
    CHECK_THROWS(cfg.validate());
}
