#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "kvstream/jl.hpp"

using namespace kvstream;

TEST(DimFor, FrozenValues) {
  EXPECT_EQ(dim_for(16, 0.5), 267u);
  EXPECT_EQ(dim_for(2, 0.9), 103u);
  EXPECT_EQ(dim_for(64, 0.3), 793u);
  EXPECT_EQ(dim_for(32, 0.4), 434u);
  EXPECT_EQ(dim_for(16, 0.1), 3697u);
  EXPECT_EQ(dim_for(64, 0.1), 5546u);
  EXPECT_EQ(dim_for(8, 0.1), 2773u);
}

TEST(DimFor, Errors) {
  EXPECT_THROW(dim_for(1, 0.1), DomainError);
  EXPECT_THROW(dim_for(16, 0.0), DomainError);
  EXPECT_THROW(dim_for(16, 1.0), DomainError);
}

TEST(GaussianAt, PureAndStandardNormal) {
  EXPECT_EQ(gaussian_at(5, 17), gaussian_at(5, 17));
  EXPECT_NE(gaussian_at(5, 17), gaussian_at(6, 17));
  const int n = 400000;
  double s = 0.0, s2 = 0.0, odd_even = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = gaussian_at(11, i);
    s += x;
    s2 += x * x;
    if (i % 2 == 1) odd_even += x * gaussian_at(11, i - 1);
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.01);
  // Box-Muller pairs are independent.
  EXPECT_NEAR(odd_even / (n / 2), 0.0, 0.01);
}

TEST(JlProjector, EntryLayoutAndScaling) {
  const JlProjector f(3, 5, 7);
  EXPECT_TRUE(f.materialized());
  EXPECT_EQ(f.entry(2, 4), gaussian_at(3, 4 * 7 + 2));
  const auto img = f.project_basis(4);
  for (std::size_t r = 0; r < 7; ++r) EXPECT_DOUBLE_EQ(img[r], f.entry(r, 4) / std::sqrt(7.0));
}

TEST(JlProjector, BasisImageIsBitIdenticalToProjection) {
  const JlProjector f(99, 16, 40);
  for (std::size_t i = 0; i < 16; ++i) EXPECT_EQ(f.project_basis(i), f.project(Vector::basis(16, i)));
}

TEST(JlProjector, Linear) {
  const JlProjector f(4, 3, 50);
  const Vector a{0.2, -0.4, 0.1}, b{-0.3, 0.0, 0.5};
  const auto lhs = f.project(a + b);
  const auto rhs = f.project(a) + f.project(b);
  for (std::size_t r = 0; r < 50; ++r) EXPECT_NEAR(lhs[r], rhs[r], 1e-14);
}

TEST(JlProjector, Errors) {
  EXPECT_THROW(JlProjector(1, 0, 4), DomainError);
  const JlProjector f(1, 3, 4);
  EXPECT_THROW(f.project(Vector{1.0}), DomainError);
  EXPECT_THROW(f.project_basis(3), DomainError);
}

TEST(VerifyPairwise, IdentityPasses) {
  std::vector<Vector> pts{Vector{1.0, 0.0}, Vector{0.6, 0.8}, Vector{0.0, 0.5}};
  const auto rep = verify_pairwise(pts, pts, 1e-12);
  EXPECT_TRUE(rep.passed);
  EXPECT_EQ(rep.pairs_checked, 3u * 2u / 2u + 3u);
  EXPECT_EQ(rep.max_cross_error, 0.0);
}

TEST(VerifyPairwise, DetectsDistortion) {
  std::vector<Vector> pts{Vector{1.0, 0.0}, Vector{0.0, 1.0}};
  std::vector<Vector> img{Vector{1.0, 0.0}, Vector{0.5, 0.9}};
  const auto rep = verify_pairwise(pts, img, 0.3);
  EXPECT_FALSE(rep.passed);
  EXPECT_NEAR(rep.max_cross_error, 0.5, 1e-15);
  EXPECT_NEAR(rep.max_norm_error, 0.06, 1e-12);
}

TEST(VerifyPairwise, RejectsPointsOutsideBall) {
  std::vector<Vector> pts{Vector{1.1, 0.0}};
  EXPECT_THROW(verify_pairwise(pts, pts, 0.1), DomainError);
}

TEST(VerifyBasisImages, AgreesWithGeneralCheck) {
  const std::size_t n = 12;
  const JlProjector f(8, n, dim_for(n, 0.5));
  std::vector<Vector> basis, images;
  for (std::size_t i = 0; i < n; ++i) {
    basis.push_back(Vector::basis(n, i));
    images.push_back(f.project_basis(i));
  }
  const auto a = verify_pairwise(basis, images, 0.5);
  const auto b = verify_basis_images(images, 0.5);
  EXPECT_EQ(a.passed, b.passed);
  EXPECT_DOUBLE_EQ(a.max_cross_error, b.max_cross_error);
  EXPECT_DOUBLE_EQ(a.max_norm_error, b.max_norm_error);
}

TEST(JlProjector, PreservesInnerProductsAtTheFormulaDimension) {
  const std::size_t n = 32;
  const double eps = 0.4;
  int passed = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const JlProjector f(seed, n, dim_for(n, eps));
    std::vector<Vector> images;
    for (std::size_t i = 0; i < n; ++i) images.push_back(f.project_basis(i));
    passed += verify_basis_images(images, eps).passed;
  }
  EXPECT_GE(passed, 48);
}
