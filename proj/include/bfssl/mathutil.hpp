#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace bfssl {

// Standard normal CDF.
double normal_cdf(double x);

// Standard normal pdf.
double normal_pdf(double x);

// Inverse standard normal CDF for p in (0,1). Accurate to ~1e-15 via a
// rational initial guess plus one Halley refinement.
double normal_quantile(double p);

// log(exp(a) + exp(b)) without overflow.
double log_sum_exp(double a, double b);

// logsumexp over a vector.
double log_sum_exp(std::span<const double> v);

// FNV-1a 64-bit hash, used to derive named RNG sub-streams and config hashes.
std::uint64_t fnv1a64(std::string_view s);

// SplitMix64 mixing step.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace bfssl
