#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "kvstream/error.hpp"
#include "kvstream/rng.hpp"
#include "kvstream/vector.hpp"

namespace kvstream {

namespace detail {

// Smallest integer >= x, tolerating a few ulps of representation error so that
// e.g. 3 / 0.1^2 lands on 300 rather than 301.
inline std::uint64_t ceil_tolerant(double x) {
  const double slack = 1e-9 * std::max(1.0, std::abs(x));
  return static_cast<std::uint64_t>(std::ceil(x - slack));
}

}  // namespace detail

// Target dimension ceil(12 ln n / (eps^2 - eps^3)) at which a dense Gaussian
// projection preserves all pairwise inner products of n points in the unit
// ball to within eps with probability at least 1 - 1/n.
inline std::size_t dim_for(std::size_t n, double eps) {
  detail::require(n >= 2, "dim_for: n must be >= 2");
  detail::require(eps > 0.0 && eps < 1.0, "dim_for: eps must lie in (0, 1)");
  const double raw = 12.0 * std::log(static_cast<double>(n)) /
                     (eps * eps - eps * eps * eps);
  return static_cast<std::size_t>(detail::ceil_tolerant(raw));
}

// Entry number `counter` of the seeded standard-normal sequence. Box-Muller
// on the pair (2p, 2p + 1) of counter hashes: even counters take the cosine
// branch, odd counters the sine branch. Pure, so it can be evaluated in any
// order and from any thread.
inline double gaussian_at(std::uint64_t seed, std::uint64_t counter) {
  const std::uint64_t pair = counter >> 1;
  const double u1 = bits_to_open_unit(counter_hash(seed, 2 * pair));
  const double u2 = bits_to_unit(counter_hash(seed, 2 * pair + 1));
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return (counter & 1U) != 0 ? radius * std::sin(angle) : radius * std::cos(angle);
}

// f(u) = (1/sqrt(d)) A u with A a d x n matrix of i.i.d. N(0, 1) entries.
// A(r, c) is gaussian_at(seed, c * d + r), so columns are contiguous in the
// counter space. Small matrices are materialized; beyond kMaterializeLimit
// entries the columns are regenerated on demand.
class JlProjector {
 public:
  static constexpr std::size_t kMaterializeLimit = std::size_t{1} << 26;

  JlProjector(std::uint64_t seed, std::size_t source_dim, std::size_t target_dim)
      : seed_(seed),
        source_dim_(source_dim),
        target_dim_(target_dim),
        scale_(1.0 / std::sqrt(static_cast<double>(target_dim))) {
    detail::require(source_dim > 0 && target_dim > 0,
                    "JlProjector: dimensions must be positive");
    if (source_dim * target_dim <= kMaterializeLimit) {
      entries_.resize(source_dim * target_dim);
      for (std::size_t e = 0; e < entries_.size(); ++e) entries_[e] = gaussian_at(seed_, e);
    }
  }

  std::uint64_t seed() const { return seed_; }
  std::size_t source_dim() const { return source_dim_; }
  std::size_t target_dim() const { return target_dim_; }
  bool materialized() const { return !entries_.empty(); }

  // Raw (unscaled) entry A(row, col).
  double entry(std::size_t row, std::size_t col) const {
    const std::size_t e = col * target_dim_ + row;
    return materialized() ? entries_[e] : gaussian_at(seed_, e);
  }

  Vector project(const Vector& x) const {
    detail::require(x.dim() == source_dim_, "JlProjector::project: dimension mismatch");
    std::vector<double> acc(target_dim_, 0.0);
    std::vector<double> column(target_dim_);
    for (std::size_t c = 0; c < source_dim_; ++c) {
      const double xc = x[c];
      if (xc == 0.0) continue;
      load_column(c, column);
      for (std::size_t r = 0; r < target_dim_; ++r) acc[r] += column[r] * xc;
    }
    for (double& a : acc) a *= scale_;
    return Vector(std::move(acc));
  }

  // f(e_i): column i of A scaled by 1/sqrt(d). `i` is 0-based.
  Vector project_basis(std::size_t i) const {
    detail::require(i < source_dim_, "JlProjector::project_basis: index out of range");
    std::vector<double> column(target_dim_);
    load_column(i, column);
    for (double& a : column) a *= scale_;
    return Vector(std::move(column));
  }

 private:
  void load_column(std::size_t c, std::vector<double>& out) const {
    const std::size_t base = c * target_dim_;
    if (materialized()) {
      std::copy_n(entries_.begin() + static_cast<std::ptrdiff_t>(base), target_dim_, out.begin());
    } else {
      for (std::size_t r = 0; r < target_dim_; ++r) out[r] = gaussian_at(seed_, base + r);
    }
  }

  std::uint64_t seed_;
  std::size_t source_dim_;
  std::size_t target_dim_;
  double scale_;
  std::vector<double> entries_;
};

struct PreservationReport {
  double max_cross_error = 0.0;  // max_{i<j} |p_i.p_j - f(p_i).f(p_j)|
  double max_norm_error = 0.0;   // max_i |f(p_i).f(p_i) - p_i.p_i|
  std::size_t pairs_checked = 0;
  bool passed = false;
};

// Exhaustive O(n^2 d) check of inner-product preservation. Points must lie in
// the unit ball.
inline PreservationReport verify_pairwise(std::span<const Vector> points,
                                          std::span<const Vector> projected,
                                          double eps) {
  detail::require(points.size() == projected.size(),
                  "verify_pairwise: point and projection counts differ");
  for (const auto& p : points) {
    detail::require(squared_norm(p) <= (1.0 + 1e-9) * (1.0 + 1e-9),
                    "verify_pairwise: point norm exceeds 1");
  }
  PreservationReport report;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double norm_err =
        std::abs(dot(projected[i], projected[i]) - dot(points[i], points[i]));
    report.max_norm_error = std::max(report.max_norm_error, norm_err);
    ++report.pairs_checked;
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double cross_err =
          std::abs(dot(points[i], points[j]) - dot(projected[i], projected[j]));
      report.max_cross_error = std::max(report.max_cross_error, cross_err);
      ++report.pairs_checked;
    }
  }
  report.passed = report.max_cross_error <= eps && report.max_norm_error <= eps;
  return report;
}

// Specialization for the standard basis e_0..e_{n-1}, whose Gram matrix is the
// identity. Avoids materializing n-dimensional basis vectors.
inline PreservationReport verify_basis_images(std::span<const Vector> images, double eps) {
  PreservationReport report;
  for (std::size_t i = 0; i < images.size(); ++i) {
    report.max_norm_error =
        std::max(report.max_norm_error, std::abs(dot(images[i], images[i]) - 1.0));
    ++report.pairs_checked;
    for (std::size_t j = i + 1; j < images.size(); ++j) {
      report.max_cross_error =
          std::max(report.max_cross_error, std::abs(dot(images[i], images[j])));
      ++report.pairs_checked;
    }
  }
  report.passed = report.max_cross_error <= eps && report.max_norm_error <= eps;
  return report;
}

}  // namespace kvstream
