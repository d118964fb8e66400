#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "kvstream/attention.hpp"

using namespace kvstream;

TEST(Vector, RejectsNonFinite) {
  EXPECT_THROW(Vector({1.0, std::numeric_limits<double>::quiet_NaN()}), DomainError);
  EXPECT_THROW(Vector({std::numeric_limits<double>::infinity()}), DomainError);
  EXPECT_NO_THROW(Vector({1.0, -2.0}));
}

TEST(Vector, BasisAndDot) {
  const auto e2 = Vector::basis(4, 2);
  EXPECT_EQ(e2[2], 1.0);
  EXPECT_EQ(dot(e2, Vector({1, 2, 3, 4})), 3.0);
  EXPECT_THROW(Vector::basis(4, 4), DomainError);
  EXPECT_THROW(dot(Vector({1.0}), Vector({1.0, 2.0})), DomainError);
}

TEST(TokenTriple, DimensionsMustAgree) {
  EXPECT_THROW(TokenTriple(Vector({1.0}), Vector({1.0, 2.0}), Vector({1.0})), DomainError);
  EXPECT_EQ(TokenTriple(Vector({1.0}), Vector({2.0}), Vector({3.0})).dim(), 1u);
}

TEST(Softmax, ShiftedForLargeScores) {
  const auto p = softmax(std::vector<double>{1000.0, 999.0});
  EXPECT_NEAR(p[0], 0.7310585786300049, 1e-15);
  EXPECT_NEAR(p[1], 0.2689414213699951, 1e-15);
}

TEST(Softmax, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(softmax(std::vector<double>{}), DomainError);
  EXPECT_THROW(softmax(std::vector<double>{0.0, std::numeric_limits<double>::infinity()}), DomainError);
}

TEST(Softmax, LogSumExp) {
  const std::vector<double> s{0.0, std::log(3.0)};
  EXPECT_NEAR(log_sum_exp(s), std::log(4.0), 1e-15);
  EXPECT_NEAR(log_sum_exp(std::vector<double>{800.0, 800.0}), 800.0 + std::log(2.0), 1e-12);
}

TEST(SoftmaxDist, ValidatesWeights) {
  EXPECT_THROW(SoftmaxDist({0.5, 0.4}), DomainError);
  EXPECT_THROW(SoftmaxDist({1.5, -0.5}), DomainError);
  EXPECT_NO_THROW(SoftmaxDist({0.25, 0.75}));
}

TEST(ExactAttention, MatchesClosedForm) {
  // Scores 0, 0, 2 over values 1, 2, 4: (1 + 2 + 4 e^2) / (2 + e^2).
  KvCache cache(1);
  cache.append(Vector{0.0}, Vector{1.0});
  cache.append(Vector{0.0}, Vector{2.0});
  cache.append(Vector{1.0}, Vector{4.0});
  const auto out = exact_attention(cache, Vector{2.0});
  EXPECT_NEAR(out[0], 3.467465105403996, 1e-14);
}

TEST(ExactAttention, EqualsExpectationForm) {
  KvCache cache(2);
  cache.append(Vector{0.3, -0.1}, Vector{1.0, 5.0});
  cache.append(Vector{-0.7, 0.2}, Vector{2.0, -1.0});
  cache.append(Vector{0.1, 0.9}, Vector{0.5, 0.0});
  const Vector q{1.5, -0.5};
  const auto dist = attention_as_expectation(cache, q);
  std::vector<double> manual(2, 0.0);
  double z = 0.0;
  for (std::size_t l = 0; l < cache.size(); ++l) z += std::exp(dot(cache.keys()[l], q));
  for (std::size_t l = 0; l < cache.size(); ++l) {
    const double w = std::exp(dot(cache.keys()[l], q)) / z;
    EXPECT_NEAR(dist[l], w, 1e-15);
    for (std::size_t j = 0; j < 2; ++j) manual[j] += w * cache.values()[l][j];
  }
  const auto out = exact_attention(cache, q);
  EXPECT_NEAR(out[0], manual[0], 1e-14);
  EXPECT_NEAR(out[1], manual[1], 1e-14);
}

TEST(ExactAttention, Errors) {
  KvCache cache(2);
  EXPECT_THROW(exact_attention(cache, Vector{1.0, 0.0}), DomainError);
  cache.append(Vector{1.0, 0.0}, Vector{1.0, 0.0});
  EXPECT_THROW(exact_attention(cache, Vector{1.0}), DomainError);
  EXPECT_THROW(cache.append(Vector{1.0}, Vector{1.0}), DomainError);
  EXPECT_THROW(KvCache(0), DomainError);
}

TEST(SlidingWindow, MaskedPositionsStayInSupport) {
  // W = 1, three tokens: scores (0, 0, s) with s = q.k_3.
  std::vector<TokenTriple> t;
  t.emplace_back(Vector{0.0}, Vector{5.0}, Vector{1.0});
  t.emplace_back(Vector{0.0}, Vector{5.0}, Vector{2.0});
  t.emplace_back(Vector{1.0}, Vector{2.0}, Vector{4.0});
  const SlidingWindowSpec w1(1);
  const auto scores = sliding_window_scores(t, w1, 3, t[2].q);
  EXPECT_EQ(scores, (std::vector<double>{0.0, 0.0, 2.0}));
  const auto out = sliding_window_attention_exact(t, w1, 3);
  EXPECT_NEAR(out[0], 3.467465105403996, 1e-14);
}

TEST(SlidingWindow, FullWindowIsFullAttention) {
  std::vector<TokenTriple> t;
  KvCache cache(2);
  for (int i = 0; i < 6; ++i) {
    t.emplace_back(Vector{0.1 * i, -0.2}, Vector{0.3 - 0.1 * i, 0.05 * i}, Vector{1.0 + i, 2.0 - i});
    cache.append(t.back());
  }
  const auto a = sliding_window_attention_exact(t, SlidingWindowSpec(6), 6);
  const auto b = exact_attention(cache, t.back().q);
  EXPECT_NEAR(a[0], b[0], 1e-14);
  EXPECT_NEAR(a[1], b[1], 1e-14);
}

TEST(SlidingWindow, Errors) {
  EXPECT_THROW(SlidingWindowSpec(0), DomainError);
  std::vector<TokenTriple> t;
  t.emplace_back(Vector{0.0}, Vector{1.0}, Vector{1.0});
  EXPECT_THROW(sliding_window_attention_exact(t, SlidingWindowSpec(1), 0), DomainError);
  EXPECT_THROW(sliding_window_attention_exact(t, SlidingWindowSpec(1), 2), DomainError);
}
