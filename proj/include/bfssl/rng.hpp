#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace bfssl {

// Deterministic random stream. One master seed spawns named sub-streams
// (mobility, channel, success, ssl, sac, ...) so that toggling one component
// does not perturb the draws of the others. The engine is mt19937_64, whose
// output sequence is fixed by the standard; all distributions are sampled
// here by hand so runs are reproducible bit for bit.
class Rng {
public:
    Rng() : Rng(0) {}
    explicit Rng(std::uint64_t seed);

    // Sub-stream derived from (master, name).
    static Rng stream(std::uint64_t master_seed, std::string_view name);
    // Indexed fork, e.g. one fresh stream per evaluation round.
    static Rng stream(std::uint64_t master_seed, std::string_view name, std::uint64_t index);

    std::uint64_t next_u64();

    double uniform01();            // [0, 1)
    double uniform_open01();       // (0, 1)
    double uniform(double lo, double hi);
    double normal();               // N(0, 1) via inverse CDF, one draw per call
    double normal(double mean, double stddev);
    double exponential();          // unit mean, strictly positive
    int uniform_int(int n);        // {0, ..., n-1}

    // Index into a discrete distribution given by n non-negative weights.
    int categorical(const double* probs, int n);

private:
    std::mt19937_64 engine_;
};

}  // namespace bfssl
