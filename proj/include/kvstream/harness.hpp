#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "kvstream/attention.hpp"
#include "kvstream/instances.hpp"
#include "kvstream/jl.hpp"
#include "kvstream/parallel.hpp"
#include "kvstream/rng.hpp"
#include "kvstream/sampling.hpp"
#include "kvstream/scalar_stream.hpp"
#include "kvstream/window.hpp"

// Acceptance experiments. Each criterion is a self-contained Monte Carlo or
// closed-form check with fixed seeds, so results are reproducible.

namespace kvstream::harness {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct Moments {
  double mean = 0.0;
  double std_error = 0.0;
};

// Sample mean and standard error (sample std / sqrt(N)).
inline Moments moments(std::span<const double> xs) {
  const auto n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double var = xs.size() > 1 ? ss / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

inline double total_variation(std::span<const double> p, std::span<const double> q) {
  double tv = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) tv += std::abs(p[i] - q[i]);
  return 0.5 * tv;
}

// Indices of the k largest scores, larger first, ties toward the smaller index.
inline std::vector<std::size_t> top_k_indices(std::span<const double> scores, std::size_t k) {
  std::vector<std::size_t> idx(scores.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  idx.resize(k);
  return idx;
}

// Empirical distribution of `draws` lazy Gumbel samples with the given top-k.
inline std::vector<double> lazy_histogram(std::span<const double> scores, std::size_t k, std::size_t draws,
                                          Rng& rng, double* mean_probes = nullptr) {
  const auto top_idx = top_k_indices(scores, k);
  std::vector<bool> in_top(scores.size(), false);
  std::vector<ScoredIndex> top;
  for (std::size_t i : top_idx) {
    in_top[i] = true;
    top.push_back({i, scores[i]});
  }
  std::vector<ScoredIndex> rest;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!in_top[i]) rest.push_back({i, scores[i]});
  }
  VectorTail tail(std::move(rest));
  std::vector<double> hist(scores.size(), 0.0);
  double probes = 0.0;
  for (std::size_t t = 0; t < draws; ++t) {
    const auto s = lazy_gumbel_sample(std::span<const ScoredIndex>(top), scores.size(), tail, rng);
    hist[s.index] += 1.0;
    probes += static_cast<double>(s.tail_probes);
  }
  for (double& h : hist) h /= static_cast<double>(draws);
  if (mean_probes) *mean_probes = probes / static_cast<double>(draws);
  return hist;
}

inline std::string fmt(double x, int precision = 6) {
  std::ostringstream os;
  os.precision(precision);
  os << x;
  return os.str();
}

namespace detail {

template <typename Fn>
CriterionResult timed(int id, std::string title, Fn body) {
  const auto start = std::chrono::steady_clock::now();
  CriterionResult r{id, std::move(title), false, {}, 0.0};
  try {
    body(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

// Independent reference for attention: long double weights, direct sum.
inline std::vector<long double> reference_attention(std::span<const TokenTriple> stream, const Vector& q) {
  std::vector<long double> scores(stream.size());
  long double top = -INFINITY;
  for (std::size_t l = 0; l < stream.size(); ++l) {
    long double s = 0.0L;
    for (std::size_t j = 0; j < q.dim(); ++j) s += static_cast<long double>(q[j]) * stream[l].k[j];
    scores[l] = s;
    top = std::max(top, s);
  }
  long double total = 0.0L;
  for (auto& s : scores) {
    s = std::exp(s - top);
    total += s;
  }
  std::vector<long double> out(q.dim(), 0.0L);
  for (std::size_t l = 0; l < stream.size(); ++l) {
    for (std::size_t j = 0; j < q.dim(); ++j) out[j] += scores[l] / total * stream[l].v[j];
  }
  return out;
}

}  // namespace detail

// 1. Exact attention equals its expectation form on random streams.
inline CriterionResult criterion_expectation_form(std::size_t streams = 50) {
  return detail::timed(1, "exact attention equals the softmax expectation form", [&](CriterionResult& r) {
    Rng rng(101);
    double worst = 0.0;
    for (std::size_t s = 0; s < streams; ++s) {
      const std::size_t n = 1 + uniform_below(rng, 256);
      const std::size_t d = 1 + uniform_below(rng, 16);
      const auto inst = build_random_stream(n, d, rng(), -1.0, 1.0);
      KvCache cache(d);
      for (const auto& t : inst.stream) cache.append(t);
      const Vector& q = inst.stream.back().q;
      const Vector direct = exact_attention(cache, q);
      const Vector via_dist = attention_as_expectation(cache, q).expectation(cache.values());
      const auto ref = detail::reference_attention(inst.stream, q);
      for (std::size_t j = 0; j < d; ++j) {
        worst = std::max(worst, std::abs(direct[j] - via_dist[j]));
        worst = std::max(worst, static_cast<double>(std::abs(static_cast<long double>(direct[j]) - ref[j])));
      }
    }
    r.passed = worst <= 1e-9;
    r.detail = std::to_string(streams) + " streams, max |diff| = " + fmt(worst, 3) + " (tol 1e-9)";
  });
}

// 2. Mean of independent Algorithm-1 draws vs Attn_W, within 3 standard errors.
inline CriterionResult criterion_window_unbiased(std::size_t seeds = 10, std::size_t draws = 100000) {
  return detail::timed(2, "window sampler is unbiased (3 standard errors)", [&](CriterionResult& r) {
    const std::size_t n = 512, w = 32, d = 8;
    double worst_z = 0.0;
    std::size_t misses = 0;
    for (std::size_t s = 0; s < seeds; ++s) {
      const auto inst = build_random_stream(n, d, derive_seed(2002, s), 1.0, 2.0);
      WindowReplicaSet replicas(SlidingWindowSpec(w), d, draws, derive_seed(2003, s));
      for (const auto& t : inst.stream) replicas.process(t);
      const auto out = replicas.draw(inst.stream.back().q);
      const Vector exact = sliding_window_attention_exact(inst.stream, SlidingWindowSpec(w), n);
      std::vector<double> column(draws);
      for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t t = 0; t < draws; ++t) column[t] = out[t][j];
        const auto m = moments(column);
        const double z = std::abs(m.mean - exact[j]) / m.std_error;
        worst_z = std::max(worst_z, z);
        if (z > 3.0) ++misses;
      }
    }
    r.passed = misses == 0;
    r.detail = std::to_string(seeds) + " seeds x " + std::to_string(d) + " coords, " +
               std::to_string(draws) + " draws each; max |mean-exact|/SE = " + fmt(worst_z, 3) +
               ", coords beyond 3 SE: " + std::to_string(misses);
  });
}

// 3. Stored vectors <= 2W + 1 after every update.
inline CriterionResult criterion_window_space(std::size_t updates = 100000) {
  return detail::timed(3, "window state stores at most 2W+1 vectors", [&](CriterionResult& r) {
    const std::size_t d = 4;
    std::size_t worst_excess = 0;
    std::string detail_text;
    bool ok = true;
    for (std::size_t w : {std::size_t{8}, std::size_t{256}}) {
      WindowState state(SlidingWindowSpec(w), d);
      Rng rng(3000 + w);
      std::size_t peak = 0;
      for (std::size_t i = 0; i < updates; ++i) {
        std::vector<double> k(d), v(d);
        for (std::size_t j = 0; j < d; ++j) {
          k[j] = standard_normal(rng);
          v[j] = uniform01(rng);
        }
        state.process(TokenTriple(Vector::zeros(d), Vector(std::move(k)), Vector(std::move(v))), rng);
        peak = std::max(peak, state.stored_vector_count());
        if (state.stored_vector_count() > 2 * w + 1) {
          ok = false;
          worst_excess = std::max(worst_excess, state.stored_vector_count() - (2 * w + 1));
        }
      }
      detail_text += "W=" + std::to_string(w) + ": peak " + std::to_string(peak) + " (bound " +
                     std::to_string(2 * w + 1) + ") ";
    }
    r.passed = ok;
    r.detail = detail_text + "over " + std::to_string(updates) + " updates";
  });
}

// 4. Median-of-means boosting hits relative error eps in >= 95 of 100 trials.
inline CriterionResult criterion_boosting(std::size_t trials = 100) {
  return detail::timed(4, "median-of-means reaches eps relative error w.p. >= 1 - delta", [&](CriterionResult& r) {
    const double eps = 0.1, delta = 0.05;
    const auto cfg = boost_config(eps, delta, 2.0, 1.0);
    const std::size_t n = 512, w = 32, d = 4;
    const auto errors = parallel_map(trials, [&](std::size_t t) {
      const auto inst = build_random_stream(n, d, derive_seed(4004, t), 1.0, 2.0);
      WindowReplicaSet replicas(SlidingWindowSpec(w), d, cfg.replicas(), derive_seed(4005, t));
      for (const auto& tok : inst.stream) replicas.process(tok);
      const Vector est = boosted_estimate(replicas, inst.stream.back().q, cfg);
      const Vector exact = sliding_window_attention_exact(inst.stream, SlidingWindowSpec(w), n);
      double worst = 0.0;
      for (std::size_t j = 0; j < d; ++j) worst = std::max(worst, std::abs(est[j] - exact[j]) / std::abs(exact[j]));
      return worst;
    });
    const auto good = static_cast<std::size_t>(std::count_if(errors.begin(), errors.end(), [&](double e) { return e <= eps; }));
    const double worst = *std::max_element(errors.begin(), errors.end());
    const bool config_ok = cfg.inner == 600 && cfg.groups == 45;
    const auto needed = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(trials)));
    r.passed = config_ok && good >= needed;
    r.detail = "T=" + std::to_string(cfg.inner) + " Q=" + std::to_string(cfg.groups) + "; " +
               std::to_string(good) + "/" + std::to_string(trials) + " trials within eps, worst rel err " +
               fmt(worst, 4);
  });
}

// 5. Lazy Gumbel vs exact softmax: TV <= 0.02 and mean probes <= 4 sqrt(n).
inline CriterionResult criterion_lazy_gumbel(std::size_t sets = 20, std::size_t draws = 100000) {
  return detail::timed(5, "lazy Gumbel sampling matches softmax", [&](CriterionResult& r) {
    const std::size_t n = 256, k = 16;
    double worst_tv = 0.0, worst_probes = 0.0;
    Rng rng(5005);
    for (std::size_t s = 0; s < sets; ++s) {
      std::vector<double> scores(n);
      for (double& x : scores) x = 2.0 * standard_normal(rng);
      const auto exact = softmax(scores);
      double probes = 0.0;
      const auto hist = lazy_histogram(scores, k, draws, rng, &probes);
      worst_tv = std::max(worst_tv, total_variation(hist, exact.weights()));
      worst_probes = std::max(worst_probes, probes);
    }
    const double probe_bound = 4.0 * std::sqrt(static_cast<double>(n));
    r.passed = worst_tv <= 0.02 && worst_probes <= probe_bound;
    r.detail = std::to_string(sets) + " score sets, max TV " + fmt(worst_tv, 4) + " (tol 0.02), max mean probes " +
               fmt(worst_probes, 4) + " (bound " + fmt(probe_bound, 3) + ")";
  });
}

// 6. d = 1 streaming estimator: unbiased within 3 SE, space <= 8 sqrt(n).
inline CriterionResult criterion_scalar_stream(std::size_t runs = 10000) {
  return detail::timed(6, "d=1 streaming attention is unbiased in O(sqrt n) space", [&](CriterionResult& r) {
    const std::size_t n = 256;
    const auto inst = build_random_stream(n, 1, 6006, 1.0, 2.0);
    const double exact = final_attention(inst)[0];
    const double q = inst.stream.back().q[0];
    std::vector<double> estimates(runs);
    std::size_t shortfall_runs = 0, peak_scalars = 0;
    bool space_ok = true;
    for (std::size_t run = 0; run < runs; ++run) {
      Rng rng(derive_seed(6007, run));
      ScalarStreamState state;
      for (const auto& t : inst.stream) {
        state.update(t, rng);
        peak_scalars = std::max(peak_scalars, state.retained_scalars());
        if (static_cast<double>(state.retained_scalars()) > 8.0 * std::sqrt(static_cast<double>(state.seen()))) {
          space_ok = false;
        }
      }
      const auto out = state.query(q, rng);
      estimates[run] = out.value;
      if (out.pool_shortfall > 0) ++shortfall_runs;
    }
    const auto m = moments(estimates);
    const double z = std::abs(m.mean - exact) / m.std_error;
    r.passed = z <= 3.0 && space_ok;
    r.detail = "mean " + fmt(m.mean, 6) + " vs exact " + fmt(exact, 6) + " (" + fmt(z, 3) +
               " SE); peak retained scalars " + std::to_string(peak_scalars) + " (bound " +
               fmt(8.0 * std::sqrt(static_cast<double>(n)), 4) + "); runs using pool fallback " +
               std::to_string(shortfall_runs);
  });
}

// 7. JL preservation on 64 points in >= 1 - 2/64 of 640 seeds.
inline CriterionResult criterion_jl(std::size_t seeds = 640) {
  return detail::timed(7, "JL projection preserves all pairwise inner products", [&](CriterionResult& r) {
    const std::size_t n = 64, source = 64;
    const double eps = 0.3;
    const std::size_t target = dim_for(n, eps);
    const auto passed = parallel_map(seeds, [&](std::size_t s) {
      Rng rng(derive_seed(7007, s));
      std::vector<Vector> points;
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> v(source);
        double norm2 = 0.0;
        for (double& e : v) {
          e = standard_normal(rng);
          norm2 += e * e;
        }
        for (double& e : v) e /= std::sqrt(norm2);
        points.emplace_back(std::move(v));
      }
      const JlProjector f(derive_seed(7008, s), source, target);
      std::vector<Vector> images;
      for (const auto& p : points) images.push_back(f.project(p));
      return verify_pairwise(points, images, eps).passed ? 1 : 0;
    });
    const auto good = static_cast<std::size_t>(std::count(passed.begin(), passed.end(), 1));
    const double rate = static_cast<double>(good) / static_cast<double>(seeds);
    const double need = 1.0 - 2.0 / static_cast<double>(n);
    r.passed = target == 793 && rate >= need;
    r.detail = "d=" + std::to_string(target) + ", " + std::to_string(good) + "/" + std::to_string(seeds) +
               " seeds preserve all pairs (rate " + fmt(rate, 4) + ", need " + fmt(need, 4) + ")";
  });
}

struct DecodeTally {
  std::size_t seeds = 0;
  std::size_t jl_pass = 0;
  std::size_t decode_fail = 0;
  std::size_t decode_fail_on_jl_pass = 0;
};

inline std::string describe(const DecodeTally& t) {
  return std::to_string(t.jl_pass) + "/" + std::to_string(t.seeds) + " JL-pass seeds, " +
         std::to_string(t.decode_fail) + " decode-failure seeds, " + std::to_string(t.decode_fail_on_jl_pass) +
         " of them on JL-pass seeds";
}

// Runs `decode(seed)` -> (jl_passed, all_bits_correct) over seeds.
template <typename Fn>
DecodeTally tally_decodes(std::size_t seeds, Fn decode) {
  const auto results = parallel_map(seeds, decode);
  DecodeTally t;
  t.seeds = seeds;
  for (const auto& [jl_ok, decode_ok] : results) {
    if (jl_ok) ++t.jl_pass;
    if (!decode_ok) {
      ++t.decode_fail;
      if (jl_ok) ++t.decode_fail_on_jl_pass;
    }
  }
  return t;
}

inline std::pair<bool, bool> decode_index_seed(std::size_t n, std::size_t d, double eps, std::uint64_t seed) {
  Rng rng(seed);
  const auto x = BitMatrix::random(n, d, rng);
  const auto inst = build_index_instance(x, eps, rng());
  const auto report = decode_instance(inst, exact_rule(instance_thresholds(inst)));
  return {report.jl.passed, report.all_correct()};
}

// 8. Index-reduction decoding through the exact readout.
inline CriterionResult criterion_index_decode(std::size_t seeds = 100) {
  return detail::timed(8, "index-reduction bits decode on every JL-pass seed", [&](CriterionResult& r) {
    const std::size_t n = 16;
    const double eps = 0.1;
    const double C = index_scale(n, eps);
    const auto th = thresholds(n, C, eps);
    const bool closed_form = std::abs(C - std::log(1024.0)) <= 1e-12 && std::abs(th.lo - 1.0 / 17.0) <= 1e-12 &&
                             std::abs(th.hi - 16.0 / 17.0) <= 1e-12;
    const std::size_t d = dim_for(n, eps);
    const auto full = tally_decodes(seeds, [&](std::size_t s) { return decode_index_seed(n, d, eps, derive_seed(8008, s)); });
    // Undersized d: the JL event fails often; failures must stay inside it.
    const std::size_t small_d = 24;
    const auto small = tally_decodes(seeds, [&](std::size_t s) { return decode_index_seed(n, small_d, eps, derive_seed(8009, s)); });
    r.passed = closed_form && full.decode_fail_on_jl_pass == 0 && small.decode_fail_on_jl_pass == 0 && full.jl_pass > 0;
    r.detail = "C=" + fmt(C, 10) + " lo=" + fmt(th.lo, 6) + " hi=" + fmt(th.hi, 6) + "; d=" + std::to_string(d) + ": " +
               describe(full) + "; d=" + std::to_string(small_d) + ": " + describe(small);
  });
}

// 9. Decoding survives an eta = 0.5 multiplicative perturbation.
inline CriterionResult criterion_approximate_decode(std::size_t seeds = 100) {
  return detail::timed(9, "decoding survives eta-approximate readout", [&](CriterionResult& r) {
    const std::size_t n = 16;
    const double eps = 0.1, eta = 0.5;
    const double C = index_scale(n, eps);
    const auto th = thresholds(n, C, eps, eta);
    const double lhs = (1.0 + eta) * th.lo, rhs = (1.0 - eta) * th.hi;
    const std::size_t d = dim_for(n, eps);
    const auto rule = approximate_rule(th, eta);
    const auto tally = tally_decodes(seeds, [&](std::size_t s) {
      Rng rng(derive_seed(9009, s));
      const auto x = BitMatrix::random(n, d, rng);
      const auto inst = build_index_instance(x, eps, rng());
      const bool jl_ok = verify_instance(inst).passed;
      bool ok = true;
      for (std::size_t row = 0; row < n; ++row) {
        const Vector exact = exact_readout(inst, row);
        // Adversarial push toward the cut, and a random factor in [1 - eta, 1 + eta].
        std::vector<double> pushed(d), jittered(d);
        for (std::size_t j = 0; j < d; ++j) {
          pushed[j] = exact[j] * (x(row, j) ? 1.0 - eta : 1.0 + eta);
          jittered[j] = exact[j] * (1.0 + eta * (2.0 * uniform01(rng) - 1.0));
        }
        ok = ok && decode_readout(inst, row, Vector(std::move(pushed)), rule).correct == d;
        ok = ok && decode_readout(inst, row, Vector(std::move(jittered)), rule).correct == d;
      }
      return std::pair<bool, bool>{jl_ok, ok};
    });
    r.passed = lhs < rhs && tally.decode_fail_on_jl_pass == 0 && tally.jl_pass > 0;
    r.detail = "(1+eta)lo=" + fmt(lhs, 4) + " < (1-eta)hi=" + fmt(rhs, 4) + "; " + describe(tally);
  });
}

// 10. Window-reduction decoding (n = 64, W = 8).
inline CriterionResult criterion_window_decode(std::size_t seeds = 100) {
  return detail::timed(10, "window-reduction bits decode on every JL-pass seed", [&](CriterionResult& r) {
    const std::size_t n = 64, w = 8;
    const double eps = 0.1;
    const std::size_t d = dim_for(n, eps);
    const auto tally = tally_decodes(seeds, [&](std::size_t s) {
      Rng rng(derive_seed(10010, s));
      const auto x = BitMatrix::random(w, d, rng);
      const auto inst = build_window_instance(x, n, w, eps, 0.0, rng());
      const auto report = decode_instance(inst, exact_rule(instance_thresholds(inst)));
      return std::pair<bool, bool>{report.jl.passed, report.all_correct()};
    });
    r.passed = tally.decode_fail_on_jl_pass == 0 && tally.jl_pass > 0;
    r.detail = "d=" + std::to_string(d) + " C=" + fmt(window_scale(n, eps, 0.0), 8) + "; " + describe(tally);
  });
}

// 11. Time family closed forms and the one-position difference.
inline CriterionResult criterion_time_family() {
  return detail::timed(11, "time family: sigma mean, spike weight, single-position difference", [&](CriterionResult& r) {
    const std::size_t n = 16, d = 4, root = 4;
    const auto sigma = build_time_sigma(n, d);
    const Vector sigma_out = final_attention(sigma);
    double sigma_err = 0.0;
    for (double c : sigma_out) sigma_err = std::max(sigma_err, std::abs(c - 1.75));

    double spike_err = 0.0, tail_err = 0.0;
    bool one_position = true;
    for (std::size_t i = 0; i < n; ++i) {
      const auto fam = build_time_family(n, d, i);
      KvCache cache(d);
      for (const auto& t : fam.stream) cache.append(t);
      const auto dist = attention_as_expectation(cache, fam.stream.back().q);
      spike_err = std::max(spike_err, std::abs(dist[i] - (1.0 - 1.0 / static_cast<double>(n))));
      if (i + root >= n) {
        for (double c : final_attention(fam)) tail_err = std::max(tail_err, std::abs(c - 3.85));
      }
      const auto diff = differing_positions(fam.stream, sigma.stream);
      one_position = one_position && diff.size() == 1 && diff[0] == i;
    }
    r.passed = sigma_err <= 1e-9 && spike_err <= 1e-9 && tail_err <= 1e-9 && one_position;
    r.detail = "sigma err " + fmt(sigma_err, 3) + ", spike err " + fmt(spike_err, 3) + ", tail-case err " +
               fmt(tail_err, 3) + ", single differing position: " + (one_position ? "yes" : "no");
  });
}

// 12. Greedy covering at radius 3/e stays within ceil(e^d).
inline CriterionResult criterion_clusterability(std::size_t seeds = 100, std::size_t points = 1000) {
  return detail::timed(12, "unit-ball points cluster into at most ceil(e^d) groups at radius 3/e", [&](CriterionResult& r) {
    const double radius = 3.0 / std::numbers::e;
    bool ok = true;
    std::string text;
    for (std::size_t d = 1; d <= 5; ++d) {
      const auto target = static_cast<std::size_t>(std::ceil(std::exp(static_cast<double>(d))));
      const double slack = static_cast<double>(covering_bound(d, radius)) * std::pow(4.0, static_cast<double>(d));
      const auto counts = parallel_map(seeds, [&](std::size_t s) {
        Rng rng(derive_seed(12012 + d, s));
        const auto pts = random_unit_ball_points(points, d, rng);
        return greedy_cluster(pts, radius).count();
      });
      const auto within = static_cast<std::size_t>(
          std::count_if(counts.begin(), counts.end(), [&](std::size_t c) { return c <= target; }));
      const std::size_t worst = *std::max_element(counts.begin(), counts.end());
      const bool d_ok = within * 100 >= 95 * seeds && static_cast<double>(worst) <= slack;
      ok = ok && d_ok;
      text += "d=" + std::to_string(d) + ": " + std::to_string(within) + "/" + std::to_string(seeds) + " <= " +
              std::to_string(target) + " (max " + std::to_string(worst) + ") ";
    }
    r.passed = ok;
    r.detail = text;
  });
}

inline constexpr int kCriterionCount = 12;

inline CriterionResult run_criterion(int id) {
  switch (id) {
    case 1: return criterion_expectation_form();
    case 2: return criterion_window_unbiased();
    case 3: return criterion_window_space();
    case 4: return criterion_boosting();
    case 5: return criterion_lazy_gumbel();
    case 6: return criterion_scalar_stream();
    case 7: return criterion_jl();
    case 8: return criterion_index_decode();
    case 9: return criterion_approximate_decode();
    case 10: return criterion_window_decode();
    case 11: return criterion_time_family();
    case 12: return criterion_clusterability();
    default: throw ParameterError("unknown criterion " + std::to_string(id));
  }
}

inline std::string format_line(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.passed ? "PASS" : "FAIL") << " [" << r.id << "] " << r.title << " | " << r.detail << " | "
     << fmt(r.seconds, 3) << " s";
  return os.str();
}

}  // namespace kvstream::harness
