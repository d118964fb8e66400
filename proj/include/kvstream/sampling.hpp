#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "kvstream/error.hpp"
#include "kvstream/rng.hpp"

namespace kvstream {

// Single-item reservoir: the i-th offered item replaces the held one with
// probability 1/i, so after k offers each item is held with probability 1/k.
template <typename T>
class Reservoir {
 public:
  void offer(const T& item, Rng& rng) {
    ++count_;
    if (uniform_below(rng, count_) == 0) held_ = item;
  }

  std::uint64_t count() const { return count_; }
  bool empty() const { return count_ == 0; }
  const std::optional<T>& held() const { return held_; }

 private:
  std::optional<T> held_;
  std::uint64_t count_ = 0;
};

template <typename T>
Reservoir<T> reservoir_update(Reservoir<T> r, const T& item, Rng& rng) {
  r.offer(item, rng);
  return r;
}

// Gumbel(0, 1) by inversion: -log(-log(u)).
inline double gumbel_draw(double u) {
  detail::require(u > 0.0 && u < 1.0, "gumbel_draw: u must lie in (0, 1)");
  return -std::log(-std::log(u));
}

inline double gumbel_draw(Rng& rng) { return gumbel_draw(uniform_open01(rng)); }

// Gumbel(0, 1) conditioned on exceeding `cutoff`:
// F^{-1}(F(B) + u (1 - F(B))) with F(x) = exp(-exp(-x)).
// Evaluated through t = exp(-B) with expm1/log1p so that large B keeps its
// precision and B -> -inf reduces to gumbel_draw(u).
inline double conditional_gumbel_above(double cutoff, double u) {
  detail::require(std::isfinite(cutoff), "conditional_gumbel_above: cutoff must be finite");
  detail::require(u > 0.0 && u < 1.0, "conditional_gumbel_above: u must lie in (0, 1)");
  const double t = std::exp(-cutoff);              // -log F(B)
  const double tail = -std::expm1(-t);             // 1 - F(B)
  const double neg_log_y = -std::log1p(-(1.0 - u) * tail);
  double g = -std::log(neg_log_y);
  if (!(g > cutoff)) g = std::nextafter(cutoff, std::numeric_limits<double>::infinity());
  return g;
}

// argmax_j (s_j + g_j): a draw from softmax(scores).
inline std::size_t gumbel_max_sample(std::span<const double> scores, Rng& rng) {
  detail::require(!scores.empty(), "gumbel_max_sample: empty input");
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < scores.size(); ++j) {
    detail::require(std::isfinite(scores[j]), "gumbel_max_sample: non-finite score");
    const double v = scores[j] + gumbel_draw(rng);
    if (v > best_value) {
      best_value = v;
      best = j;
    }
  }
  return best;
}

struct ScoredIndex {
  std::size_t index = 0;
  double score = 0.0;
};

struct LazySample {
  std::size_t index = 0;
  std::size_t tail_probes = 0;  // m: tail positions that received noise
  double cutoff = 0.0;          // B
};

// Tail population backed by an explicit score list. Draws are uniform without
// replacement via a partial Fisher-Yates shuffle over a persistent permutation
// (any permutation is a valid starting point).
class VectorTail {
 public:
  explicit VectorTail(std::vector<ScoredIndex> items) : items_(std::move(items)) {}

  std::size_t size() const { return items_.size(); }

  void draw(std::size_t m, Rng& rng, std::vector<ScoredIndex>& out) {
    detail::require(m <= items_.size(), "VectorTail::draw: more draws than items");
    out.clear();
    for (std::size_t t = 0; t < m; ++t) {
      const std::size_t pick = t + uniform_below(rng, items_.size() - t);
      std::swap(items_[t], items_[pick]);
      out.push_back(items_[t]);
    }
  }

 private:
  std::vector<ScoredIndex> items_;
};

// Lazy Gumbel sampling from softmax over `total` scores, given the `top` set
// holding exactly the k largest. Only the top set gets unconditional noise;
// the tail contributes m ~ Bin(total - k, 1 - exp(-exp(-B))) positions, drawn
// uniformly without replacement by `tail`, each with noise conditioned to
// exceed the cutoff B = M - S_min.
//
// Tail must provide draw(m, rng, out) filling `out` with m distinct positions.
template <typename Tail>
LazySample lazy_gumbel_sample(std::span<const ScoredIndex> top, std::size_t total,
                              Tail& tail, Rng& rng) {
  detail::require(!top.empty(), "lazy_gumbel_sample: empty top set");
  detail::require(top.size() <= total, "lazy_gumbel_sample: k exceeds n");

  LazySample result;
  double best = -std::numeric_limits<double>::infinity();
  double s_min = std::numeric_limits<double>::infinity();
  for (const auto& item : top) {
    const double v = item.score + gumbel_draw(rng);
    if (v > best) {
      best = v;
      result.index = item.index;
    }
    s_min = std::min(s_min, item.score);
  }
  const double cutoff = best - s_min;
  result.cutoff = cutoff;

  const std::size_t rest = total - top.size();
  if (rest == 0) return result;

  const double t = std::exp(-cutoff);
  const double p = -std::expm1(-t);  // 1 - exp(-exp(-B))
  const double q = std::exp(-t);
  const auto m = static_cast<std::size_t>(binomial_inversion(rng, rest, p, q));
  result.tail_probes = m;
  if (m == 0) return result;

  std::vector<ScoredIndex> sampled;
  tail.draw(m, rng, sampled);
  for (const auto& item : sampled) {
    const double v = item.score + conditional_gumbel_above(cutoff, uniform_open01(rng));
    if (v > best) {
      best = v;
      result.index = item.index;
    }
  }
  return result;
}

}  // namespace kvstream
