#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

#include "kvstream/error.hpp"

namespace kvstream {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// The counter-th output of the SplitMix64 sequence started at `seed`.
// Stateless, so any element can be regenerated independently.
inline constexpr std::uint64_t counter_hash(std::uint64_t seed,
                                            std::uint64_t counter) {
  return mix64(seed + (counter + 1) * kGoldenGamma);
}

// Seed for an independent sub-stream (replica, trial, ...).
inline constexpr std::uint64_t derive_seed(std::uint64_t master,
                                           std::uint64_t index) {
  return mix64(mix64(master ^ 0x6A09E667F3BCC909ULL) + index * kGoldenGamma);
}

// SplitMix64 generator. Eight bytes of state, so thousands of replicas can
// each own one. Satisfies UniformRandomBitGenerator; Rng(s) yields
// counter_hash(s, 0), counter_hash(s, 1), ...
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

 private:
  std::uint64_t state_;
};

// [0, 1) with 53 random bits.
inline double bits_to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// (0, 1): midpoints of the 2^52 grid, all exactly representable, so never 0
// or 1. (On the 2^53 grid the top midpoint rounds to 1.)
inline double bits_to_open_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

inline double uniform01(Rng& rng) { return bits_to_unit(rng()); }
inline double uniform_open01(Rng& rng) { return bits_to_open_unit(rng()); }

// Uniform integer in [0, bound). Lemire's multiply-shift with rejection, so
// the result is exactly uniform.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  detail::require(bound > 0, "uniform_below: bound must be positive");
  std::uint64_t x = rng();
  __uint128_t m = static_cast<__uint128_t>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = rng();
      m = static_cast<__uint128_t>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

// N(0, 1) by Box-Muller, cosine branch only (two words per draw).
inline double standard_normal(Rng& rng) {
  const double u1 = uniform_open01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace detail {

inline double log_binomial_pmf(std::uint64_t trials, std::uint64_t k,
                               double log_p, double log_q) {
  const auto n = static_cast<double>(trials);
  const auto kk = static_cast<double>(k);
  return std::lgamma(n + 1.0) - std::lgamma(kk + 1.0) -
         std::lgamma(n - kk + 1.0) + kk * log_p + (n - kk) * log_q;
}

}  // namespace detail

// Bin(trials, p) by exact inversion of the CDF. Takes both p and q = 1 - p so
// callers holding an accurate q (e.g. from expm1) keep full precision.
//
// Small means walk the CDF up from zero. When q^trials would underflow the
// walk starts at the mode and alternates outward; visiting the support in a
// fixed order is still inversion, just with the outcomes permuted.
inline std::uint64_t binomial_inversion(Rng& rng, std::uint64_t trials,
                                        double p, double q) {
  detail::require(p >= 0.0 && q >= 0.0 && std::isfinite(p) && std::isfinite(q),
                  "binomial: probability out of range");
  if (trials == 0 || p <= 0.0) return 0;
  if (q <= 0.0) return trials;
  if (p > q) return trials - binomial_inversion(rng, trials, q, p);

  const double log_p = std::log(p);
  const double log_q = std::log(q);
  const auto n = static_cast<double>(trials);
  double u = uniform01(rng);

  if (n * log_q > -600.0) {
    double pmf = std::exp(n * log_q);
    const double ratio = p / q;
    std::uint64_t k = 0;
    while (u >= pmf && k < trials) {
      u -= pmf;
      pmf *= static_cast<double>(trials - k) / static_cast<double>(k + 1) *
             ratio;
      ++k;
      if (pmf == 0.0) break;
    }
    return k;
  }

  const auto mode = static_cast<std::uint64_t>(
      std::min(n, std::floor((n + 1.0) * p)));
  std::uint64_t down = mode;      // next index to visit below (inclusive)
  std::uint64_t up = mode + 1;    // next index to visit above
  bool down_open = true;
  bool up_open = up <= trials;
  while (down_open || up_open) {
    if (down_open) {
      const double pmf =
          std::exp(detail::log_binomial_pmf(trials, down, log_p, log_q));
      if (u < pmf) return down;
      u -= pmf;
      if (down == 0 || pmf == 0.0) {
        down_open = false;
      } else {
        --down;
      }
    }
    if (up_open) {
      const double pmf =
          std::exp(detail::log_binomial_pmf(trials, up, log_p, log_q));
      if (u < pmf) return up;
      u -= pmf;
      if (up == trials || pmf == 0.0) {
        up_open = false;
      } else {
        ++up;
      }
    }
  }
  return mode;  // residual rounding mass
}

inline std::uint64_t binomial_inversion(Rng& rng, std::uint64_t trials,
                                        double p) {
  return binomial_inversion(rng, trials, p, 1.0 - p);
}

}  // namespace kvstream
