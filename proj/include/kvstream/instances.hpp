#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kvstream/attention.hpp"
#include "kvstream/error.hpp"
#include "kvstream/jl.hpp"
#include "kvstream/rng.hpp"
#include "kvstream/vector.hpp"

namespace kvstream {

enum class InstanceKind { index_reduction, window_reduction, time_family, time_sigma, random };

inline std::string_view kind_name(InstanceKind k) {
  switch (k) {
    case InstanceKind::index_reduction: return "index-reduction";
    case InstanceKind::window_reduction: return "window-reduction";
    case InstanceKind::time_family: return "time-family";
    case InstanceKind::time_sigma: return "time-sigma";
    case InstanceKind::random: return "random";
  }
  return "unknown";
}

// Accepts the canonical names and the short forms index/window/family/sigma.
inline InstanceKind parse_kind(std::string_view s) {
  if (s == "index-reduction" || s == "index") return InstanceKind::index_reduction;
  if (s == "window-reduction" || s == "window") return InstanceKind::window_reduction;
  if (s == "time-family" || s == "family") return InstanceKind::time_family;
  if (s == "time-sigma" || s == "sigma") return InstanceKind::time_sigma;
  if (s == "random") return InstanceKind::random;
  throw ParameterError("unknown instance kind '" + std::string(s) + "'");
}

class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(std::size_t rows, std::size_t cols, bool fill = false)
      : rows_(rows), cols_(cols), bits_(rows * cols, fill ? 1 : 0) {
    detail::require(rows > 0 && cols > 0, "BitMatrix: shape must be positive");
  }

  static BitMatrix random(std::size_t rows, std::size_t cols, Rng& rng) {
    BitMatrix m(rows, cols);
    for (auto& b : m.bits_) b = static_cast<std::uint8_t>(rng() >> 63);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool operator()(std::size_t r, std::size_t c) const { return bits_[r * cols_ + c] != 0; }
  void set(std::size_t r, std::size_t c, bool b) { bits_[r * cols_ + c] = b ? 1 : 0; }

  Vector row(std::size_t r) const {
    std::vector<double> out(cols_);
    for (std::size_t c = 0; c < cols_; ++c) out[c] = (*this)(r, c) ? 1.0 : 0.0;
    return Vector(std::move(out));
  }

  bool operator==(const BitMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> bits_;
};

// A generated stream plus the parameters needed to read it back.
// Indices (rows, positions) are 0-based throughout.
struct HardInstance {
  InstanceKind kind = InstanceKind::random;
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t window = 0;  // 0 unless window-reduction
  double eps = 0.0;
  double eta = 0.0;
  double C = 0.0;
  std::uint64_t seed = 0;
  std::optional<BitMatrix> x;
  std::optional<std::size_t> planted_index;
  std::vector<TokenTriple> stream;

  std::string id() const {
    std::string s(kind_name(kind));
    s += "-n" + std::to_string(n) + "-d" + std::to_string(d);
    if (window > 0) s += "-w" + std::to_string(window);
    if (planted_index) s += "-i" + std::to_string(*planted_index);
    s += "-s" + std::to_string(seed);
    return s;
  }

  bool operator==(const HardInstance&) const = default;
};

// 2 ln n / (1 - 2 eps).
inline double index_scale(std::size_t n, double eps) {
  return 2.0 * std::log(static_cast<double>(n)) / (1.0 - 2.0 * eps);
}

// (2 ln n - ln((1 - eta) / (1 + eta))) / (1 - 2 eps).
inline double window_scale(std::size_t n, double eps, double eta) {
  return (2.0 * std::log(static_cast<double>(n)) - std::log((1.0 - eta) / (1.0 + eta))) /
         (1.0 - 2.0 * eps);
}

struct Thresholds {
  double lo = 0.0;  // a 0 bit reads at most this
  double hi = 1.0;  // a 1 bit reads at least this
};

// lo = n e^{C eps} / (n e^{C eps} + e^{C(1-eps)}), hi = 1 - lo, computed as
// logistic functions of z = C(1 - 2 eps) - ln n.
inline Thresholds thresholds(std::size_t n, double C, double eps, double eta = 0.0) {
  detail::require(n >= 2, "thresholds: n must be >= 2");
  detail::require(C > 0.0 && std::isfinite(C), "thresholds: C must be positive");
  detail::require(eps > 0.0 && eps < 0.5, "thresholds: eps must lie in (0, 1/2)");
  detail::require(eta >= 0.0 && eta < 1.0, "thresholds: eta must lie in [0, 1)");
  const double z = C * (1.0 - 2.0 * eps) - std::log(static_cast<double>(n));
  const Thresholds t{1.0 / (1.0 + std::exp(z)), 1.0 / (1.0 + std::exp(-z))};
  if (!(t.lo < t.hi)) throw ParameterError("thresholds: lo < hi fails (needs C > ln n / (1 - 2 eps))");
  if (eta > 0.0 && !((1.0 + eta) * t.lo < (1.0 - eta) * t.hi)) {
    throw ParameterError("thresholds: (1 + eta) lo < (1 - eta) hi fails");
  }
  return t;
}

namespace detail {

inline void require_reduction_eps(double eps) {
  require(eps > 0.0 && eps < 0.5, "reduction instance: eps must lie in (0, 1/2)");
}

}  // namespace detail

// Alice's stream: q_i = 0, k_i = f(e_i), v_i = row i of x.
inline HardInstance build_index_instance(const BitMatrix& x, double eps, std::uint64_t seed) {
  detail::require_reduction_eps(eps);
  detail::require(x.rows() >= 2, "index instance: need at least 2 rows");
  HardInstance inst;
  inst.kind = InstanceKind::index_reduction;
  inst.n = x.rows();
  inst.d = x.cols();
  inst.eps = eps;
  inst.C = index_scale(inst.n, eps);
  inst.seed = seed;
  inst.x = x;
  const JlProjector f(seed, inst.n, inst.d);
  inst.stream.reserve(inst.n);
  for (std::size_t i = 0; i < inst.n; ++i) {
    inst.stream.emplace_back(Vector::zeros(inst.d), f.project_basis(i), x.row(i));
  }
  return inst;
}

// Zero keys and values up to n - W, then k = f(e_l), v = x row for the last W.
inline HardInstance build_window_instance(const BitMatrix& x, std::size_t n, std::size_t window,
                                          double eps, double eta, std::uint64_t seed) {
  detail::require_reduction_eps(eps);
  detail::require(eta >= 0.0 && eta < 1.0, "window instance: eta must lie in [0, 1)");
  detail::require(n >= 2, "window instance: n must be >= 2");
  detail::require(window >= 1 && window <= n, "window instance: need 1 <= W <= n");
  detail::require(x.rows() == window, "window instance: x must have W rows");
  HardInstance inst;
  inst.kind = InstanceKind::window_reduction;
  inst.n = n;
  inst.d = x.cols();
  inst.window = window;
  inst.eps = eps;
  inst.eta = eta;
  inst.C = window_scale(n, eps, eta);
  inst.seed = seed;
  inst.x = x;
  const JlProjector f(seed, n, inst.d);
  inst.stream.reserve(n);
  for (std::size_t l = 0; l < n; ++l) {
    if (l + window < n) {
      inst.stream.emplace_back(Vector::zeros(inst.d), Vector::zeros(inst.d), Vector::zeros(inst.d));
    } else {
      inst.stream.emplace_back(Vector::zeros(inst.d), f.project_basis(l), x.row(l + window - n));
    }
  }
  return inst;
}

// Position of the key Bob targets for row i.
inline std::size_t planted_position(const HardInstance& inst, std::size_t row) {
  if (inst.kind == InstanceKind::index_reduction) {
    detail::require(row < inst.n, "bob_query: row out of range");
    return row;
  }
  if (inst.kind == InstanceKind::window_reduction) {
    detail::require(row < inst.window, "bob_query: row out of range");
    return inst.n - inst.window + row;
  }
  throw DomainError("bob_query: instance is not a reduction instance");
}

// (C f(e_p), 0, 0) with p the planted position of `row`. The stream already
// holds k_p = f(e_p) bit for bit, so the projector is not rebuilt.
inline TokenTriple bob_query(const HardInstance& inst, std::size_t row) {
  const std::size_t p = planted_position(inst, row);
  return TokenTriple(scaled(inst.stream[p].k, inst.C), Vector::zeros(inst.d), Vector::zeros(inst.d));
}

inline Thresholds instance_thresholds(const HardInstance& inst, double eta = 0.0) {
  return thresholds(inst.n, inst.C, inst.eps, eta);
}

// Exact attention output after Bob's query. Index instances append Bob's
// token and attend over all n + 1 positions. Window instances evaluate
// Attn_W(q) over Alice's n tokens: appending Bob's zero key would slide the
// first planted row out of the window.
inline Vector exact_readout(const HardInstance& inst, std::size_t row) {
  const TokenTriple bob = bob_query(inst, row);
  if (inst.kind == InstanceKind::index_reduction) {
    KvCache cache(inst.d);
    for (const auto& t : inst.stream) cache.append(t);
    cache.append(bob);
    return exact_attention(cache, bob.q);
  }
  return sliding_window_attention_query(inst.stream, SlidingWindowSpec(inst.window), inst.n, bob.q);
}

// The keys whose inner products the decoding argument relies on.
inline std::vector<Vector> planted_keys(const HardInstance& inst) {
  const std::size_t rows = inst.kind == InstanceKind::window_reduction ? inst.window : inst.n;
  std::vector<Vector> keys;
  keys.reserve(rows);
  for (std::size_t r = 0; r < rows; ++r) keys.push_back(inst.stream[planted_position(inst, r)].k);
  return keys;
}

// JL event for the instance: all planted keys are images of distinct basis
// vectors, so their Gram matrix should be within eps of the identity.
inline PreservationReport verify_instance(const HardInstance& inst) {
  const auto keys = planted_keys(inst);
  return verify_basis_images(keys, inst.eps);
}

enum class BitCall { zero, one, ambiguous };

struct DecodeRule {
  double zero_at_most = 0.0;
  double one_at_least = 1.0;

  BitCall call(double readout) const {
    if (readout >= one_at_least) return BitCall::one;
    if (readout <= zero_at_most) return BitCall::zero;
    return BitCall::ambiguous;
  }
};

inline DecodeRule exact_rule(const Thresholds& t) { return {t.lo, t.hi}; }

// For an estimate within a (1 +- eta) factor of the exact readout.
inline DecodeRule approximate_rule(const Thresholds& t, double eta) {
  return {(1.0 + eta) * t.lo, (1.0 - eta) * t.hi};
}

struct RowDecode {
  std::size_t row = 0;
  Vector readout;
  std::vector<BitCall> calls;
  std::size_t correct = 0;
};

inline RowDecode decode_readout(const HardInstance& inst, std::size_t row, const Vector& readout,
                                const DecodeRule& rule) {
  detail::require(inst.x.has_value(), "decode: instance has no planted bits");
  detail::require(readout.dim() == inst.d, "decode: readout dimension mismatch");
  RowDecode out{row, readout, {}, 0};
  out.calls.reserve(inst.d);
  for (std::size_t j = 0; j < inst.d; ++j) {
    const BitCall c = rule.call(readout[j]);
    out.calls.push_back(c);
    const BitCall want = (*inst.x)(row, j) ? BitCall::one : BitCall::zero;
    if (c == want) ++out.correct;
  }
  return out;
}

inline RowDecode decode_row(const HardInstance& inst, std::size_t row, const DecodeRule& rule) {
  return decode_readout(inst, row, exact_readout(inst, row), rule);
}

struct DecodeReport {
  PreservationReport jl;
  std::vector<RowDecode> rows;
  std::size_t bits = 0;
  std::size_t correct = 0;

  bool all_correct() const { return correct == bits; }
};

inline std::size_t planted_rows(const HardInstance& inst) {
  detail::require(inst.x.has_value(), "decode: instance has no planted bits");
  return inst.x->rows();
}

inline DecodeReport decode_instance(const HardInstance& inst, const DecodeRule& rule) {
  DecodeReport report;
  report.jl = verify_instance(inst);
  for (std::size_t r = 0; r < planted_rows(inst); ++r) {
    auto row = decode_row(inst, r, rule);
    report.bits += inst.d;
    report.correct += row.correct;
    report.rows.push_back(std::move(row));
  }
  return report;
}

namespace detail {

inline std::size_t exact_sqrt(std::size_t n) {
  auto r = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  require(n >= 4 && r * r == n, "time family: n must be a perfect square >= 4");
  return r;
}

// v_l = 1 for the first n - sqrt(n) positions, sqrt(n) for the rest.
inline Vector time_value(std::size_t n, std::size_t root, std::size_t d, std::size_t l) {
  return Vector::filled(d, l + root < n ? 1.0 : static_cast<double>(root));
}

inline HardInstance time_instance(InstanceKind kind, std::size_t n, std::size_t d,
                                  std::optional<std::size_t> planted) {
  require(d > 0, "time family: d must be positive");
  const std::size_t root = exact_sqrt(n);
  HardInstance inst;
  inst.kind = kind;
  inst.n = n;
  inst.d = d;
  inst.C = 2.0 / static_cast<double>(d) * std::log(static_cast<double>(n - 1));
  inst.planted_index = planted;
  inst.stream.reserve(n);
  for (std::size_t l = 0; l < n; ++l) {
    Vector q = l + 1 == n ? Vector::filled(d, inst.C) : Vector::zeros(d);
    Vector k = planted && *planted == l ? Vector::filled(d, 1.0) : Vector::zeros(d);
    inst.stream.emplace_back(std::move(q), std::move(k), time_value(n, root, d, l));
  }
  return inst;
}

}  // namespace detail

// H(i): only k_i is nonzero; q_n = (2/d) ln(n - 1) 1^d puts weight 1 - 1/n on i.
inline HardInstance build_time_family(std::size_t n, std::size_t d, std::size_t i) {
  detail::require(i < n, "time family: index out of range");
  return detail::time_instance(InstanceKind::time_family, n, d, i);
}

// sigma: all keys zero, so the final attention is the plain value average.
// q_n matches H(i) so that the two streams differ only at position i.
inline HardInstance build_time_sigma(std::size_t n, std::size_t d) {
  return detail::time_instance(InstanceKind::time_sigma, n, d, std::nullopt);
}

// Benign stream: q, k entries N(0, 1/sqrt(d)) so scores have unit variance,
// value entries uniform in [value_lo, value_hi].
inline HardInstance build_random_stream(std::size_t n, std::size_t d, std::uint64_t seed,
                                        double value_lo = 1.0, double value_hi = 2.0) {
  detail::require(n >= 1 && d >= 1, "random stream: n and d must be positive");
  detail::require(value_lo <= value_hi, "random stream: empty value range");
  HardInstance inst;
  inst.kind = InstanceKind::random;
  inst.n = n;
  inst.d = d;
  inst.seed = seed;
  Rng rng(seed);
  const double scale = std::pow(static_cast<double>(d), -0.25);
  auto gaussian_vec = [&] {
    std::vector<double> v(d);
    for (double& e : v) e = scale * standard_normal(rng);
    return Vector(std::move(v));
  };
  inst.stream.reserve(n);
  for (std::size_t l = 0; l < n; ++l) {
    Vector q = gaussian_vec();
    Vector k = gaussian_vec();
    std::vector<double> v(d);
    for (double& e : v) e = value_lo + (value_hi - value_lo) * uniform01(rng);
    inst.stream.emplace_back(std::move(q), std::move(k), Vector(std::move(v)));
  }
  return inst;
}

// Final-step attention Attn(q_n, K_n, V_n) of any instance.
inline Vector final_attention(const HardInstance& inst) {
  KvCache cache(inst.d);
  for (const auto& t : inst.stream) cache.append(t);
  return exact_attention(cache, inst.stream.back().q);
}

// Positions where two streams differ in any of q, k, v.
inline std::vector<std::size_t> differing_positions(std::span<const TokenTriple> a,
                                                    std::span<const TokenTriple> b) {
  detail::require(a.size() == b.size(), "differing_positions: length mismatch");
  std::vector<std::size_t> out;
  for (std::size_t l = 0; l < a.size(); ++l) {
    if (!(a[l] == b[l])) out.push_back(l);
  }
  return out;
}

struct ClusterAssignment {
  std::vector<Vector> centers;
  std::vector<std::size_t> membership;
  double radius = 0.0;

  std::size_t count() const { return centers.size(); }
};

inline double distance(const Vector& a, const Vector& b) {
  require_same_dim(a, b, "distance");
  double acc = 0.0;
  for (std::size_t j = 0; j < a.dim(); ++j) {
    const double t = a[j] - b[j];
    acc += t * t;
  }
  return std::sqrt(acc);
}

// Sequential covering: a point joins the first center within `radius`,
// otherwise it opens a new cluster centered on itself.
inline ClusterAssignment greedy_cluster(std::span<const Vector> points, double radius) {
  detail::require(radius > 0.0 && std::isfinite(radius), "greedy_cluster: radius must be positive");
  ClusterAssignment out;
  out.radius = radius;
  out.membership.reserve(points.size());
  for (const auto& p : points) {
    detail::require(squared_norm(p) <= (1.0 + 1e-9) * (1.0 + 1e-9), "greedy_cluster: point norm exceeds 1");
    std::size_t c = 0;
    while (c < out.centers.size() && distance(p, out.centers[c]) > radius) ++c;
    if (c == out.centers.size()) out.centers.push_back(p);
    out.membership.push_back(c);
  }
  return out;
}

// ceil((3 / radius)^d), at least 1. Radii >= 1 are accepted since the
// e^d-count target uses radius 3/e.
inline std::uint64_t covering_bound(std::size_t d, double radius) {
  detail::require(d >= 1, "covering_bound: d must be positive");
  detail::require(radius > 0.0 && std::isfinite(radius), "covering_bound: radius must be positive");
  const double raw = std::pow(3.0 / radius, static_cast<double>(d));
  return std::max<std::uint64_t>(1, detail::ceil_tolerant(raw));
}

// Uniform points in the unit ball: Gaussian direction, radius U^{1/d}.
inline std::vector<Vector> random_unit_ball_points(std::size_t count, std::size_t d, Rng& rng) {
  detail::require(d >= 1, "random_unit_ball_points: d must be positive");
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> v(d);
    double norm2 = 0.0;
    do {
      norm2 = 0.0;
      for (double& e : v) {
        e = standard_normal(rng);
        norm2 += e * e;
      }
    } while (norm2 == 0.0);
    const double r = std::pow(uniform01(rng), 1.0 / static_cast<double>(d));
    const double s = std::min(r / std::sqrt(norm2), 1.0 / std::sqrt(norm2));
    for (double& e : v) e *= s;
    out.emplace_back(std::move(v));
  }
  return out;
}

}  // namespace kvstream
