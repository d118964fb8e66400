#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kvstream/error.hpp"

namespace kvstream {

// A finite, fixed-dimension real embedding. Construction rejects NaN and
// infinity, so every Vector in the library is finite.
class Vector {
 public:
  Vector() = default;

  explicit Vector(std::vector<double> components)
      : components_(std::move(components)) {
    for (double c : components_) {
      detail::require(std::isfinite(c), "Vector: non-finite component");
    }
  }

  Vector(std::initializer_list<double> components)
      : Vector(std::vector<double>(components)) {}

  static Vector zeros(std::size_t dim) {
    Vector v;
    v.components_.assign(dim, 0.0);
    return v;
  }

  static Vector filled(std::size_t dim, double value) {
    return Vector(std::vector<double>(dim, value));
  }

  // e_i in R^dim.
  static Vector basis(std::size_t dim, std::size_t i) {
    detail::require(i < dim, "Vector::basis: index out of range");
    Vector v = zeros(dim);
    v.components_[i] = 1.0;
    return v;
  }

  std::size_t dim() const { return components_.size(); }
  bool empty() const { return components_.empty(); }

  double operator[](std::size_t i) const { return components_[i]; }
  std::span<const double> values() const { return components_; }
  const std::vector<double>& raw() const { return components_; }

  auto begin() const { return components_.begin(); }
  auto end() const { return components_.end(); }

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> components_;
};

inline void require_same_dim(const Vector& a, const Vector& b,
                             const char* where) {
  if (a.dim() != b.dim()) {
    throw DomainError(std::string(where) + ": dimension mismatch (" +
                      std::to_string(a.dim()) + " vs " +
                      std::to_string(b.dim()) + ")");
  }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double dot(const Vector& a, const Vector& b) {
  require_same_dim(a, b, "dot");
  return dot(a.values(), b.values());
}

inline double squared_norm(const Vector& a) { return dot(a, a); }

inline Vector scaled(const Vector& a, double s) {
  std::vector<double> out(a.begin(), a.end());
  for (double& c : out) c *= s;
  return Vector(std::move(out));
}

inline Vector operator+(const Vector& a, const Vector& b) {
  require_same_dim(a, b, "operator+");
  std::vector<double> out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] = a[i] + b[i];
  return Vector(std::move(out));
}

inline Vector operator-(const Vector& a, const Vector& b) {
  require_same_dim(a, b, "operator-");
  std::vector<double> out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] = a[i] - b[i];
  return Vector(std::move(out));
}

// One stream unit (q_i, k_i, v_i). All three share a dimension.
struct TokenTriple {
  Vector q;
  Vector k;
  Vector v;

  TokenTriple() = default;
  TokenTriple(Vector query, Vector key, Vector value)
      : q(std::move(query)), k(std::move(key)), v(std::move(value)) {
    detail::require(q.dim() == k.dim() && k.dim() == v.dim(),
                    "TokenTriple: q, k, v dimensions differ");
    detail::require(q.dim() > 0, "TokenTriple: zero dimension");
  }

  std::size_t dim() const { return q.dim(); }

  friend bool operator==(const TokenTriple&, const TokenTriple&) = default;
};

}  // namespace kvstream
