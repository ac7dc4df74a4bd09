#include "bfssl/rng.hpp"

#include <cmath>

#include "bfssl/mathutil.hpp"

namespace bfssl {

Rng::Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

Rng Rng::stream(std::uint64_t master_seed, std::string_view name) {
    return Rng(splitmix64(master_seed ^ fnv1a64(name)));
}

Rng Rng::stream(std::uint64_t master_seed, std::string_view name, std::uint64_t index) {
    return Rng(splitmix64(master_seed ^ fnv1a64(name)) + splitmix64(index + 1));
}

std::uint64_t Rng::next_u64() {
    return engine_();
}

double Rng::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform_open01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
}

double Rng::normal() {
    return normal_quantile(uniform_open01());
}

double Rng::normal(double mean, double stddev) {
    return mean + stddev * normal();
}

double Rng::exponential() {
    return -std::log(uniform_open01());
}

int Rng::uniform_int(int n) {
    // n is small everywhere this is used; modulo bias is below 2^-50.
    return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
}

int Rng::categorical(const double* probs, int n) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += probs[i];
    double u = uniform01() * total;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    return n - 1;
}

}  // namespace bfssl
