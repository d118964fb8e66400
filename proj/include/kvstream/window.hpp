#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kvstream/attention.hpp"
#include "kvstream/error.hpp"
#include "kvstream/jl.hpp"
#include "kvstream/rng.hpp"
#include "kvstream/sampling.hpp"
#include "kvstream/vector.hpp"

namespace kvstream {

// The last W keys and values, oldest first.
class WindowBuffer {
 public:
  WindowBuffer(SlidingWindowSpec spec, std::size_t dim) : spec_(spec), dim_(dim) {
    detail::require(dim > 0, "WindowBuffer: dimension must be positive");
    keys_.reserve(spec.window);
    values_.reserve(spec.window);
  }

  // Appends the token; once the window is full, returns the value that fell
  // out of it.
  std::optional<Vector> push(const TokenTriple& t) {
    detail::require(t.dim() == dim_, "WindowBuffer::push: dimension mismatch");
    ++step_;
    if (keys_.size() < spec_.window) {
      keys_.push_back(t.k);
      values_.push_back(t.v);
      return std::nullopt;
    }
    std::optional<Vector> evicted = std::move(values_[head_]);
    keys_[head_] = t.k;
    values_[head_] = t.v;
    head_ = (head_ + 1) % spec_.window;
    return evicted;
  }

  std::size_t size() const { return keys_.size(); }
  std::size_t step() const { return step_; }
  std::size_t dim() const { return dim_; }
  SlidingWindowSpec spec() const { return spec_; }
  // Tokens seen that are no longer in the window: max(step - W, 0).
  std::size_t outside_count() const { return step_ > spec_.window ? step_ - spec_.window : 0; }

  const Vector& key(std::size_t i) const { return keys_[slot(i)]; }
  const Vector& value(std::size_t i) const { return values_[slot(i)]; }

 private:
  std::size_t slot(std::size_t i) const {
    return keys_.size() < spec_.window ? i : (head_ + i) % spec_.window;
  }

  SlidingWindowSpec spec_;
  std::size_t dim_;
  std::vector<Vector> keys_;
  std::vector<Vector> values_;
  std::size_t head_ = 0;
  std::size_t step_ = 0;
};

// Everything a draw needs for one query, shared by all replicas looking at
// the same window.
struct WindowQueryPlan {
  // step <= W: the output is computed directly and has no variance.
  std::optional<Vector> exact;
  // S_W / S with S_W = sum_window e^{q.k}, S = (i - W) + S_W.
  double window_probability = 1.0;
  // Cumulative shifted weights over window positions, oldest first.
  std::vector<double> cdf;
};

inline WindowQueryPlan plan_window_query(const WindowBuffer& buffer, const Vector& q) {
  detail::require(buffer.step() >= 1, "window query: empty state");
  detail::require(q.dim() == buffer.dim(), "window query: dimension mismatch");

  std::vector<double> scores(buffer.size());
  for (std::size_t l = 0; l < buffer.size(); ++l) scores[l] = dot(buffer.key(l).values(), q.values());

  WindowQueryPlan plan;
  if (buffer.outside_count() == 0) {
    const auto dist = softmax(scores);
    std::vector<Vector> values;
    values.reserve(buffer.size());
    for (std::size_t l = 0; l < buffer.size(); ++l) values.push_back(buffer.value(l));
    plan.exact = dist.expectation(values);
    return plan;
  }

  const double top = *std::max_element(scores.begin(), scores.end());
  plan.cdf.resize(scores.size());
  double acc = 0.0;
  for (std::size_t l = 0; l < scores.size(); ++l) {
    acc += std::exp(scores[l] - top);
    plan.cdf[l] = acc;
  }
  // S_W / S = 1 / (1 + (i - W) / S_W), evaluated in the log domain.
  const double log_window_mass = top + std::log(acc);
  const double log_outside_mass = std::log(static_cast<double>(buffer.outside_count()));
  plan.window_probability = 1.0 / (1.0 + std::exp(log_outside_mass - log_window_mass));
  return plan;
}

inline std::size_t sample_window_position(const WindowQueryPlan& plan, Rng& rng) {
  const double target = uniform01(rng) * plan.cdf.back();
  const auto it = std::upper_bound(plan.cdf.begin(), plan.cdf.end(), target);
  return std::min<std::size_t>(static_cast<std::size_t>(it - plan.cdf.begin()), plan.cdf.size() - 1);
}

// One draw of the estimator: a window value with probability S_W / S (picked
// proportionally to e^{q.k}), otherwise the reservoir's out-of-window value.
inline Vector draw_from_plan(const WindowQueryPlan& plan, const WindowBuffer& buffer,
                             const Reservoir<Vector>& outside, Rng& rng) {
  if (plan.exact) return *plan.exact;
  if (uniform01(rng) < plan.window_probability) {
    return buffer.value(sample_window_position(plan, rng));
  }
  if (!outside.held()) throw InvariantViolation("window sample: reservoir empty past the window");
  return *outside.held();
}

// Sliding-window attention in O(dW) space: the last W keys/values plus one
// reservoir-sampled value from outside the window.
class WindowState {
 public:
  WindowState(SlidingWindowSpec spec, std::size_t dim) : buffer_(spec, dim) {}

  void process(const TokenTriple& t, Rng& rng) {
    if (auto evicted = buffer_.push(t)) outside_.offer(*evicted, rng);
    check_invariants();
  }

  Vector sample(const Vector& q, Rng& rng) const {
    return draw_from_plan(plan_window_query(buffer_, q), buffer_, outside_, rng);
  }

  WindowQueryPlan plan(const Vector& q) const { return plan_window_query(buffer_, q); }

  std::size_t step() const { return buffer_.step(); }
  const WindowBuffer& buffer() const { return buffer_; }
  const Reservoir<Vector>& outside_reservoir() const { return outside_; }

  // Keys + values in the window, plus the reservoir value if held.
  std::size_t stored_vector_count() const {
    return 2 * buffer_.size() + (outside_.held() ? 1 : 0);
  }

 private:
  void check_invariants() const {
    const std::size_t w = buffer_.spec().window;
    if (buffer_.size() != std::min(buffer_.step(), w) ||
        outside_.count() != buffer_.outside_count() || stored_vector_count() > 2 * w + 1) {
      throw InvariantViolation("WindowState: invariant violated at step " +
                               std::to_string(buffer_.step()));
    }
  }

  WindowBuffer buffer_;
  Reservoir<Vector> outside_;
};

inline void window_process(WindowState& state, const TokenTriple& t, Rng& rng) { state.process(t, rng); }

inline Vector window_sample(const WindowState& state, const Vector& q, Rng& rng) {
  return state.sample(q, rng);
}

// Median-of-means parameters: T draws per group, Q groups.
struct BoostConfig {
  double eps = 0.0;
  double delta = 0.0;
  double v_max = 0.0;
  double mean_lower_bound = 1.0;
  std::size_t inner = 1;   // T
  std::size_t groups = 1;  // Q

  std::size_t replicas() const { return inner * groups; }
};

// T = ceil(3 v_max / (eps^2 mean_lower_bound)), Q = ceil(12 ln(2 / delta)).
inline BoostConfig boost_config(double eps, double delta, double v_max, double mean_lower_bound = 1.0) {
  detail::require(eps > 0.0 && eps <= 1.0, "boost_config: eps must lie in (0, 1]");
  detail::require(delta > 0.0 && delta < 1.0, "boost_config: delta must lie in (0, 1)");
  detail::require(v_max > 0.0, "boost_config: v_max must be positive");
  detail::require(mean_lower_bound > 0.0, "boost_config: mean_lower_bound must be positive");
  BoostConfig cfg{eps, delta, v_max, mean_lower_bound, 1, 1};
  cfg.inner = std::max<std::size_t>(1, detail::ceil_tolerant(3.0 * v_max / (eps * eps * mean_lower_bound)));
  cfg.groups = std::max<std::size_t>(1, detail::ceil_tolerant(12.0 * std::log(2.0 / delta)));
  return cfg;
}

// T*Q independent Algorithm-1 replicas over one shared stream. The window
// buffer is deterministic given the stream, so it is held once; each replica
// owns only its reservoir and RNG, seeded derive_seed(master, replica).
class WindowReplicaSet {
 public:
  WindowReplicaSet(SlidingWindowSpec spec, std::size_t dim, std::size_t replicas,
                   std::uint64_t master_seed)
      : buffer_(spec, dim), reservoirs_(replicas) {
    detail::require(replicas > 0, "WindowReplicaSet: need at least one replica");
    rngs_.reserve(replicas);
    for (std::size_t r = 0; r < replicas; ++r) rngs_.emplace_back(derive_seed(master_seed, r));
  }

  void process(const TokenTriple& t) {
    if (auto evicted = buffer_.push(t)) {
      for (std::size_t r = 0; r < reservoirs_.size(); ++r) reservoirs_[r].offer(*evicted, rngs_[r]);
    }
  }

  // One draw per replica, in replica order.
  std::vector<Vector> draw(const Vector& q) {
    const auto plan = plan_window_query(buffer_, q);
    std::vector<Vector> out;
    out.reserve(reservoirs_.size());
    for (std::size_t r = 0; r < reservoirs_.size(); ++r) {
      out.push_back(draw_from_plan(plan, buffer_, reservoirs_[r], rngs_[r]));
    }
    return out;
  }

  std::size_t replica_count() const { return reservoirs_.size(); }
  std::size_t step() const { return buffer_.step(); }
  const WindowBuffer& buffer() const { return buffer_; }

  // What replica r would store on its own.
  std::size_t stored_vectors_per_replica(std::size_t r) const {
    return 2 * buffer_.size() + (reservoirs_.at(r).held() ? 1 : 0);
  }

 private:
  WindowBuffer buffer_;
  std::vector<Reservoir<Vector>> reservoirs_;
  std::vector<Rng> rngs_;
};

// Coordinate-wise means of consecutive blocks of `inner` draws.
inline std::vector<Vector> group_means(std::span<const Vector> draws, std::size_t inner, std::size_t groups) {
  detail::require(inner > 0 && groups > 0, "group_means: empty configuration");
  detail::require(draws.size() == inner * groups, "group_means: draw count does not match T*Q");
  const std::size_t d = draws.front().dim();
  std::vector<Vector> means;
  means.reserve(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    std::vector<double> acc(d, 0.0);
    for (std::size_t t = 0; t < inner; ++t) {
      const auto row = draws[g * inner + t].values();
      for (std::size_t j = 0; j < d; ++j) acc[j] += row[j];
    }
    for (double& a : acc) a /= static_cast<double>(inner);
    means.emplace_back(std::move(acc));
  }
  return means;
}

inline double median_of(std::vector<double> xs) {
  detail::require(!xs.empty(), "median: empty input");
  const std::size_t mid = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid), xs.end());
  const double upper = xs[mid];
  if (xs.size() % 2 == 1) return upper;
  const double lower = *std::max_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

// Per coordinate: average within each group of T, median across the Q groups.
inline Vector median_of_means(std::span<const Vector> draws, std::size_t inner, std::size_t groups) {
  const auto means = group_means(draws, inner, groups);
  const std::size_t d = means.front().dim();
  std::vector<double> out(d);
  std::vector<double> column(groups);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t g = 0; g < groups; ++g) column[g] = means[g][j];
    out[j] = median_of(column);
  }
  return Vector(std::move(out));
}

inline Vector boosted_estimate(WindowReplicaSet& replicas, const Vector& q, const BoostConfig& cfg) {
  detail::require(replicas.replica_count() == cfg.replicas(),
                  "boosted_estimate: replica count does not match T*Q");
  // Inside the first W steps every draw is the exact value; averaging copies
  // of it could still move the last bit.
  if (auto plan = plan_window_query(replicas.buffer(), q); plan.exact) return *plan.exact;
  const auto draws = replicas.draw(q);
  return median_of_means(draws, cfg.inner, cfg.groups);
}

}  // namespace kvstream
