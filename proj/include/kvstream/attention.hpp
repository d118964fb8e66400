#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "kvstream/error.hpp"
#include "kvstream/vector.hpp"

namespace kvstream {

// A probability distribution over positions 0..support_size-1.
class SoftmaxDist {
 public:
  explicit SoftmaxDist(std::vector<double> weights)
      : weights_(std::move(weights)) {
    detail::require(!weights_.empty(), "SoftmaxDist: empty support");
    double total = 0.0;
    for (double w : weights_) {
      detail::require(w >= 0.0 && std::isfinite(w), "SoftmaxDist: bad weight");
      total += w;
    }
    detail::require(std::abs(total - 1.0) <= 1e-9, "SoftmaxDist: weights do not sum to 1");
  }

  std::size_t support_size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::span<const double> weights() const { return weights_; }

  // Expectation of the value rows under this distribution.
  Vector expectation(std::span<const Vector> values) const {
    detail::require(values.size() == weights_.size(),
                    "SoftmaxDist::expectation: support/value count mismatch");
    detail::require(!values.empty(), "SoftmaxDist::expectation: empty support");
    std::vector<double> out(values.front().dim(), 0.0);
    for (std::size_t l = 0; l < values.size(); ++l) {
      const auto row = values[l].values();
      for (std::size_t j = 0; j < out.size(); ++j) out[j] += weights_[l] * row[j];
    }
    return Vector(std::move(out));
  }

 private:
  std::vector<double> weights_;
};

// log(sum_l exp(s_l)), shifted by the max.
inline double log_sum_exp(std::span<const double> scores) {
  detail::require(!scores.empty(), "log_sum_exp: empty input");
  const double top = *std::max_element(scores.begin(), scores.end());
  double acc = 0.0;
  for (double s : scores) acc += std::exp(s - top);
  return top + std::log(acc);
}

inline SoftmaxDist softmax(std::span<const double> scores) {
  detail::require(!scores.empty(), "softmax: empty input");
  for (double s : scores) detail::require(std::isfinite(s), "softmax: non-finite score");
  const double top = *std::max_element(scores.begin(), scores.end());
  std::vector<double> w(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    w[i] = std::exp(scores[i] - top);
    total += w[i];
  }
  for (double& x : w) x /= total;
  return SoftmaxDist(std::move(w));
}

inline SoftmaxDist softmax(const std::vector<double>& scores) {
  return softmax(std::span<const double>(scores));
}

// Exact key/value store: the O(nd) baseline. Append is the only mutation.
class KvCache {
 public:
  explicit KvCache(std::size_t dim) : dim_(dim) {
    detail::require(dim > 0, "KvCache: dimension must be positive");
  }

  void append(Vector key, Vector value) {
    detail::require(key.dim() == dim_ && value.dim() == dim_,
                    "KvCache::append: dimension mismatch");
    keys_.push_back(std::move(key));
    values_.push_back(std::move(value));
  }

  void append(const TokenTriple& t) { append(t.k, t.v); }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return keys_.size(); }
  bool empty() const { return keys_.empty(); }
  std::span<const Vector> keys() const { return keys_; }
  std::span<const Vector> values() const { return values_; }

 private:
  std::size_t dim_;
  std::vector<Vector> keys_;
  std::vector<Vector> values_;
};

// D_i: softmax over the scores K q.
inline SoftmaxDist attention_as_expectation(const KvCache& cache,
                                            const Vector& q) {
  detail::require(!cache.empty(), "attention: empty cache");
  detail::require(q.dim() == cache.dim(), "attention: query dimension mismatch");
  std::vector<double> scores;
  scores.reserve(cache.size());
  for (const auto& k : cache.keys()) scores.push_back(dot(k.values(), q.values()));
  return softmax(scores);
}

// softmax(K q)^T V.
inline Vector exact_attention(const KvCache& cache, const Vector& q) {
  return attention_as_expectation(cache, q).expectation(cache.values());
}

struct SlidingWindowSpec {
  std::size_t window = 1;

  explicit SlidingWindowSpec(std::size_t w) : window(w) {
    detail::require(w >= 1, "SlidingWindowSpec: window must be >= 1");
  }
};

// Masked score vector for an arbitrary query against the first `step`
// tokens: in-window positions (the last W) score q^T k, older positions score
// exactly 0 and stay in the support.
inline std::vector<double> sliding_window_scores(
    std::span<const TokenTriple> triples, SlidingWindowSpec spec,
    std::size_t step, const Vector& q) {
  detail::require(step >= 1, "sliding window: step must be >= 1");
  detail::require(step <= triples.size(), "sliding window: step beyond stream");
  const std::size_t first_in_window = step > spec.window ? step - spec.window : 0;
  std::vector<double> scores(step, 0.0);
  for (std::size_t l = first_in_window; l < step; ++l) {
    require_same_dim(triples[l].k, q, "sliding window");
    scores[l] = dot(triples[l].k.values(), q.values());
  }
  return scores;
}

// Attn_W for an external query against the prefix of length `step`.
inline Vector sliding_window_attention_query(std::span<const TokenTriple> triples,
                                             SlidingWindowSpec spec,
                                             std::size_t step, const Vector& q) {
  const auto scores = sliding_window_scores(triples, spec, step, q);
  const auto dist = softmax(scores);
  std::vector<double> out(q.dim(), 0.0);
  for (std::size_t l = 0; l < step; ++l) {
    const auto row = triples[l].v.values();
    require_same_dim(triples[l].v, q, "sliding window");
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += dist[l] * row[j];
  }
  return Vector(std::move(out));
}

// Attn_W(q_step, K_step, V_step); `step` is 1-based.
inline Vector sliding_window_attention_exact(std::span<const TokenTriple> triples,
                                             SlidingWindowSpec spec,
                                             std::size_t step) {
  detail::require(step >= 1, "sliding window: step must be >= 1");
  detail::require(step <= triples.size(), "sliding window: step beyond stream");
  return sliding_window_attention_query(triples, spec, step, triples[step - 1].q);
}

}  // namespace kvstream
