#pragma once

#include <algorithm>
#include <chrono>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "kvstream/attention.hpp"
#include "kvstream/error.hpp"
#include "kvstream/instances.hpp"
#include "kvstream/rng.hpp"
#include "kvstream/scalar_stream.hpp"
#include "kvstream/window.hpp"

namespace kvstream {

enum class Estimator { exact, window, window_boosted, scalar_gumbel };

inline std::string_view estimator_name(Estimator e) {
  switch (e) {
    case Estimator::exact: return "exact";
    case Estimator::window: return "window";
    case Estimator::window_boosted: return "window-boosted";
    case Estimator::scalar_gumbel: return "scalar-gumbel";
  }
  return "unknown";
}

inline Estimator parse_estimator(std::string_view s) {
  if (s == "exact") return Estimator::exact;
  if (s == "window") return Estimator::window;
  if (s == "window-boosted") return Estimator::window_boosted;
  if (s == "scalar-gumbel") return Estimator::scalar_gumbel;
  throw ParameterError("unknown estimator '" + std::string(s) + "'");
}

struct RunParams {
  Estimator estimator = Estimator::exact;
  std::size_t window = 0;  // 0: take it from the instance
  double eps = 0.1;
  double delta = 0.05;
  double v_max = 0.0;  // 0: max |v| over the instance
  double mean_lower_bound = 1.0;
  std::vector<std::size_t> query_steps;  // 1-based; empty means the final step
  bool record_time = true;
};

struct RunReport {
  std::string instance_id;
  std::string estimator;
  std::size_t step = 0;
  Vector exact;
  Vector estimate;
  std::vector<double> per_coordinate_error;
  double max_rel_error = 0.0;
  std::size_t stored_vector_count = 0;
  std::size_t stored_bytes = 0;
  std::int64_t wall_time_ms = 0;
  std::uint64_t seed = 0;
};

// |estimate - exact| / |exact|, or the absolute error when exact is 0.
inline double relative_error(double estimate, double exact) {
  const double diff = std::abs(estimate - exact);
  return exact == 0.0 ? diff : diff / std::abs(exact);
}

inline RunReport make_report(std::string instance_id, Estimator e, std::size_t step, Vector exact,
                             Vector estimate, std::size_t stored_vectors, double mean_lower_bound,
                             std::uint64_t seed) {
  require_same_dim(exact, estimate, "make_report");
  RunReport r;
  r.instance_id = std::move(instance_id);
  r.estimator = std::string(estimator_name(e));
  r.step = step;
  r.per_coordinate_error.resize(exact.dim());
  for (std::size_t j = 0; j < exact.dim(); ++j) {
    r.per_coordinate_error[j] = relative_error(estimate[j], exact[j]);
    if (std::abs(exact[j]) >= mean_lower_bound) {
      r.max_rel_error = std::max(r.max_rel_error, r.per_coordinate_error[j]);
    }
  }
  r.stored_vector_count = stored_vectors;
  r.stored_bytes = stored_vectors * exact.dim() * sizeof(double);
  r.exact = std::move(exact);
  r.estimate = std::move(estimate);
  r.seed = seed;
  return r;
}

inline double max_abs_value(const HardInstance& inst) {
  double m = 0.0;
  for (const auto& t : inst.stream) {
    for (double c : t.v) m = std::max(m, std::abs(c));
  }
  return m;
}

inline std::size_t effective_window(const HardInstance& inst, const RunParams& p) {
  return p.window > 0 ? p.window : inst.window;
}

// Rejects estimator/instance combinations before any streaming happens.
inline void check_compatible(const HardInstance& inst, const RunParams& p) {
  detail::require(!inst.stream.empty(), "run: empty instance");
  if (p.estimator == Estimator::scalar_gumbel && inst.d != 1) {
    throw ParameterError("run: scalar-gumbel requires d == 1 (instance has d = " +
                         std::to_string(inst.d) + ")");
  }
  if ((p.estimator == Estimator::window || p.estimator == Estimator::window_boosted) &&
      effective_window(inst, p) == 0) {
    throw ParameterError("run: window estimators need --w (the instance has no window)");
  }
  for (std::size_t s : p.query_steps) {
    if (s < 1 || s > inst.stream.size()) {
      throw ParameterError("run: query step " + std::to_string(s) + " outside [1, n]");
    }
  }
  if (p.estimator == Estimator::window_boosted) {
    const double vmax = p.v_max > 0.0 ? p.v_max : max_abs_value(inst);
    if (!(vmax > 0.0)) throw ParameterError("run: window-boosted needs a nonzero v_max");
    (void)boost_config(p.eps, p.delta, vmax, p.mean_lower_bound);
  }
}

// Streams the instance through one estimator and reports every query step.
// The reference is Attn_W for window estimators (and for `exact` when a
// window is set), full attention otherwise.
inline std::vector<RunReport> run_estimator(const HardInstance& inst, const RunParams& p,
                                            std::uint64_t seed) {
  check_compatible(inst, p);
  std::vector<std::size_t> steps = p.query_steps;
  if (steps.empty()) steps.push_back(inst.stream.size());
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());

  const std::size_t w = effective_window(inst, p);
  const std::string id = inst.id();
  const auto start = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    if (!p.record_time) return std::int64_t{0};
    return static_cast<std::int64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                         std::chrono::steady_clock::now() - start)
                                         .count());
  };
  auto reference = [&](std::size_t step) {
    if (w > 0) return sliding_window_attention_exact(inst.stream, SlidingWindowSpec(w), step);
    KvCache cache(inst.d);
    for (std::size_t l = 0; l < step; ++l) cache.append(inst.stream[l]);
    return exact_attention(cache, inst.stream[step - 1].q);
  };

  std::vector<RunReport> out;
  Rng rng(seed);
  std::size_t next = 0;
  auto emit = [&](std::size_t step, Vector estimate, std::size_t stored) {
    auto r = make_report(id, p.estimator, step, reference(step), std::move(estimate), stored,
                         p.mean_lower_bound, seed);
    r.wall_time_ms = elapsed_ms();
    out.push_back(std::move(r));
  };

  switch (p.estimator) {
    case Estimator::exact: {
      for (std::size_t step : steps) emit(step, reference(step), 2 * (w > 0 ? std::min(step, w) : step));
      break;
    }
    case Estimator::window: {
      WindowState state(SlidingWindowSpec(w), inst.d);
      for (std::size_t l = 0; l < inst.stream.size() && next < steps.size(); ++l) {
        state.process(inst.stream[l], rng);
        if (l + 1 == steps[next]) {
          emit(l + 1, state.sample(inst.stream[l].q, rng), state.stored_vector_count());
          ++next;
        }
      }
      break;
    }
    case Estimator::window_boosted: {
      const double vmax = p.v_max > 0.0 ? p.v_max : max_abs_value(inst);
      const auto cfg = boost_config(p.eps, p.delta, vmax, p.mean_lower_bound);
      WindowReplicaSet replicas(SlidingWindowSpec(w), inst.d, cfg.replicas(), seed);
      for (std::size_t l = 0; l < inst.stream.size() && next < steps.size(); ++l) {
        replicas.process(inst.stream[l]);
        if (l + 1 == steps[next]) {
          const std::size_t held = l + 1 > w ? cfg.replicas() : 0;
          emit(l + 1, boosted_estimate(replicas, inst.stream[l].q, cfg),
               2 * replicas.buffer().size() + held);
          ++next;
        }
      }
      break;
    }
    case Estimator::scalar_gumbel: {
      ScalarStreamState state;
      for (std::size_t l = 0; l < inst.stream.size() && next < steps.size(); ++l) {
        state.update(inst.stream[l], rng);
        if (l + 1 == steps[next]) {
          const auto q = state.query(inst.stream[l].q[0], rng);
          emit(l + 1, Vector{q.value}, state.retained_scalars());
          ++next;
        }
      }
      break;
    }
  }
  return out;
}

inline constexpr std::string_view kCsvHeader =
    "instance_id,estimator,step,coord,exact,estimate,rel_error,stored_vectors,stored_bytes,wall_ms,seed";

inline std::string csv_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

// One CSV row per coordinate.
inline void write_csv_rows(std::ostream& os, const RunReport& r) {
  for (std::size_t j = 0; j < r.exact.dim(); ++j) {
    os << r.instance_id << ',' << r.estimator << ',' << r.step << ',' << j << ','
       << csv_double(r.exact[j]) << ',' << csv_double(r.estimate[j]) << ','
       << csv_double(r.per_coordinate_error[j]) << ',' << r.stored_vector_count << ','
       << r.stored_bytes << ',' << r.wall_time_ms << ',' << r.seed << '\n';
  }
}

}  // namespace kvstream
