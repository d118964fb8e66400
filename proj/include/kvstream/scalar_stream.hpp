#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kvstream/error.hpp"
#include "kvstream/rng.hpp"
#include "kvstream/sampling.hpp"
#include "kvstream/vector.hpp"

namespace kvstream {

// One d = 1 token: position in the stream plus its key and value scalars.
struct ScalarToken {
  std::size_t index = 0;
  double key = 0.0;
  double value = 0.0;
};

// Total order used by both buffers: larger key ranks higher, equal keys are
// broken toward the smaller index.
inline bool ranks_above(const ScalarToken& a, const ScalarToken& b) {
  return a.key > b.key || (a.key == b.key && a.index < b.index);
}

inline std::size_t ceil_sqrt(std::size_t n) {
  auto r = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  while (r * r < n) ++r;
  while (r > 0 && (r - 1) * (r - 1) >= n) --r;
  return r;
}

struct ScalarQuery {
  double value = 0.0;
  std::size_t index = 0;
  std::size_t tail_probes = 0;
  // Middle-population draws the pool could not cover without replacement.
  // Those were filled by resampling the pool; zero means the draw was exact.
  std::size_t pool_shortfall = 0;
};

// Streaming state for d = 1 attention in O(sqrt n) space.
//
// Every token sits in exactly one region:
//   top     - the |top| highest-ranked tokens, |top| <= k = ceil(sqrt(n))
//   bottom  - the |bottom| lowest-ranked tokens, |bottom| <= k
//   middle  - everything else; only a random pool of it is retained
// Buffers only admit a token that outranks (resp. underranks) everything
// outside them, so each buffer is always an exact top/bottom set even while
// its capacity grows. Tokens evicted from a buffer move outward and never
// return, which makes the middle an append-only stream.
//
// The pool keeps each middle token independently with probability theta,
// thinning existing members whenever theta drops. theta follows
// min(1, 2/sqrt(n)), which is non-increasing, so the pool is a Bernoulli
// sample of the middle and, given its size, a uniform subset of it. A hard
// cap keeps retained scalars <= 8 sqrt(n); if the cap bites, theta is lowered
// to the evicted priority and cap_evictions() records it.
class ScalarStreamState {
 public:
  static constexpr double kSpaceConstant = 8.0;
  static constexpr double kPoolRate = 2.0;

  void update(const TokenTriple& t, Rng& rng) {
    detail::require(t.dim() == 1, "ScalarStreamState: token dimension must be 1");
    update(t.k[0], t.v[0], rng);
  }

  void update(double key, double value, Rng& rng) {
    detail::require(std::isfinite(key) && std::isfinite(value),
                    "ScalarStreamState: non-finite scalar");
    const ScalarToken token{seen_, key, value};
    ++seen_;
    const std::size_t k = capacity();

    if (!best_outside_top_ || ranks_above(token, *best_outside_top_)) {
      insert_sorted(top_, token, [](const auto& a, const auto& b) { return ranks_above(a, b); });
      if (top_.size() > k) {
        const ScalarToken demoted = top_.back();
        top_.pop_back();
        leave_top(demoted, rng);
      }
    } else {
      leave_top(token, rng);
    }

    threshold_ = std::min(threshold_, std::min(1.0, kPoolRate / std::sqrt(static_cast<double>(seen_))));
    thin_pool();
    enforce_pool_cap();

    if (static_cast<double>(retained_scalars()) >
        kSpaceConstant * std::sqrt(static_cast<double>(seen_))) {
      throw InvariantViolation("ScalarStreamState: retained scalars exceed 8 sqrt(n)");
    }
  }

  // One draw from softmax(q k_1, ..., q k_n), returning the sampled value.
  // q >= 0 takes the top buffer as the Gumbel head, q < 0 the bottom buffer.
  ScalarQuery query(double q, Rng& rng) const {
    detail::require(seen_ > 0, "ScalarStreamState::query: empty state");
    detail::require(std::isfinite(q), "ScalarStreamState::query: non-finite query");

    const bool use_top = q >= 0.0;
    const std::vector<ScalarToken>* head = use_top ? &top_ : &bottom_;
    const std::vector<ScalarToken>* other = use_top ? &bottom_ : &top_;
    if (head->empty()) std::swap(head, other);  // only when the other buffer holds everything

    std::vector<ScalarToken> catalog;
    catalog.reserve(top_.size() + bottom_.size() + pool_.size());
    std::vector<ScoredIndex> head_scores;
    for (const auto& t : *head) {
      head_scores.push_back({catalog.size(), q * t.key});
      catalog.push_back(t);
    }
    std::vector<ScoredIndex> explicit_tail;
    for (const auto& t : *other) {
      explicit_tail.push_back({catalog.size(), q * t.key});
      catalog.push_back(t);
    }
    std::vector<ScoredIndex> pool_scores;
    for (const auto& e : pool_) {
      pool_scores.push_back({catalog.size(), q * e.token.key});
      catalog.push_back(e.token);
    }

    Tail tail(std::move(explicit_tail), middle_count_, std::move(pool_scores));
    const LazySample s = lazy_gumbel_sample(std::span<const ScoredIndex>(head_scores), seen_, tail, rng);
    const ScalarToken& chosen = catalog[s.index];
    return ScalarQuery{chosen.value, chosen.index, s.tail_probes, tail.shortfall()};
  }

  std::size_t seen() const { return seen_; }
  std::size_t capacity() const { return ceil_sqrt(seen_); }
  std::size_t middle_count() const { return middle_count_; }
  std::size_t cap_evictions() const { return cap_evictions_; }
  std::size_t retained_scalars() const {
    return 2 * (top_.size() + bottom_.size() + pool_.size());
  }

  std::span<const ScalarToken> top_buffer() const { return top_; }
  std::span<const ScalarToken> bottom_buffer() const { return bottom_; }
  std::vector<ScalarToken> pool() const {
    std::vector<ScalarToken> out;
    for (const auto& e : pool_) out.push_back(e.token);
    return out;
  }

 private:
  struct PoolEntry {
    ScalarToken token;
    double priority;
  };

  // Tail = explicit buffer tokens plus the middle population (middle_total
  // tokens, represented by the pool). Sequential draws without replacement:
  // each draw picks a region in proportion to its unsampled count.
  class Tail {
   public:
    Tail(std::vector<ScoredIndex> explicit_items, std::size_t middle_total,
         std::vector<ScoredIndex> pool)
        : explicit_(std::move(explicit_items)), middle_total_(middle_total), pool_(std::move(pool)) {}

    void draw(std::size_t m, Rng& rng, std::vector<ScoredIndex>& out) {
      out.clear();
      std::size_t explicit_left = explicit_.size();
      std::size_t middle_left = middle_total_;
      std::size_t pool_left = pool_.size();
      for (std::size_t t = 0; t < m; ++t) {
        const std::size_t r = uniform_below(rng, explicit_left + middle_left);
        if (r < explicit_left) {
          const std::size_t used = explicit_.size() - explicit_left;
          const std::size_t pick = used + uniform_below(rng, explicit_left);
          std::swap(explicit_[used], explicit_[pick]);
          out.push_back(explicit_[used]);
          --explicit_left;
          continue;
        }
        --middle_left;
        if (pool_left > 0) {
          const std::size_t used = pool_.size() - pool_left;
          const std::size_t pick = used + uniform_below(rng, pool_left);
          std::swap(pool_[used], pool_[pick]);
          out.push_back(pool_[used]);
          --pool_left;
        } else {
          ++shortfall_;
          if (!pool_.empty()) out.push_back(pool_[uniform_below(rng, pool_.size())]);
        }
      }
    }

    std::size_t shortfall() const { return shortfall_; }

   private:
    std::vector<ScoredIndex> explicit_;
    std::size_t middle_total_;
    std::vector<ScoredIndex> pool_;
    std::size_t shortfall_ = 0;
  };

  template <typename Less>
  static void insert_sorted(std::vector<ScalarToken>& buf, const ScalarToken& t, Less less) {
    buf.insert(std::upper_bound(buf.begin(), buf.end(), t, less), t);
  }

  void leave_top(const ScalarToken& token, Rng& rng) {
    if (!best_outside_top_ || ranks_above(token, *best_outside_top_)) best_outside_top_ = token;

    if (!lowest_in_middle_ || ranks_above(*lowest_in_middle_, token)) {
      // Bottom is kept lowest-first.
      insert_sorted(bottom_, token, [](const auto& a, const auto& b) { return ranks_above(b, a); });
      if (bottom_.size() > capacity()) {
        const ScalarToken raised = bottom_.back();
        bottom_.pop_back();
        enter_middle(raised, rng);
      }
    } else {
      enter_middle(token, rng);
    }
  }

  void enter_middle(const ScalarToken& token, Rng& rng) {
    ++middle_count_;
    if (!lowest_in_middle_ || ranks_above(*lowest_in_middle_, token)) lowest_in_middle_ = token;
    const double priority = uniform01(rng);
    if (priority < threshold_) pool_.push_back({token, priority});
  }

  void thin_pool() {
    std::erase_if(pool_, [this](const PoolEntry& e) { return e.priority >= threshold_; });
  }

  void enforce_pool_cap() {
    const auto budget = static_cast<std::size_t>(
        std::floor(kSpaceConstant / 2.0 * std::sqrt(static_cast<double>(seen_))));
    const std::size_t buffers = top_.size() + bottom_.size();
    const std::size_t cap = budget > buffers ? budget - buffers : 0;
    while (pool_.size() > cap) {
      const auto worst = std::max_element(pool_.begin(), pool_.end(), [](const auto& a, const auto& b) {
        return a.priority < b.priority;
      });
      threshold_ = worst->priority;
      thin_pool();
      ++cap_evictions_;
    }
  }

  std::vector<ScalarToken> top_;     // best first
  std::vector<ScalarToken> bottom_;  // lowest first
  std::vector<PoolEntry> pool_;
  std::optional<ScalarToken> best_outside_top_;
  std::optional<ScalarToken> lowest_in_middle_;
  double threshold_ = 1.0;
  std::size_t seen_ = 0;
  std::size_t middle_count_ = 0;
  std::size_t cap_evictions_ = 0;
};

}  // namespace kvstream
