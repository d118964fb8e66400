#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "kvstream/attention.hpp"
#include "kvstream/harness.hpp"
#include "kvstream/instances.hpp"
#include "kvstream/scalar_stream.hpp"

using namespace kvstream;

namespace {

double exact_scalar(const std::vector<std::pair<double, double>>& kv, double q) {
  KvCache cache(1);
  for (const auto& [k, v] : kv) cache.append(Vector{k}, Vector{v});
  return exact_attention(cache, Vector{q})[0];
}

}  // namespace

TEST(ScalarStream, CeilSqrt) {
  EXPECT_EQ(ceil_sqrt(0), 0u);
  EXPECT_EQ(ceil_sqrt(1), 1u);
  EXPECT_EQ(ceil_sqrt(4), 2u);
  EXPECT_EQ(ceil_sqrt(5), 3u);
  EXPECT_EQ(ceil_sqrt(256), 16u);
  EXPECT_EQ(ceil_sqrt(257), 17u);
}

TEST(ScalarStream, TopBufferHoldsLargestKeys) {
  Rng rng(1);
  ScalarStreamState s;
  for (double k : {0.5, 3.0, -1.0, 2.0}) s.update(k, 10.0 * k, rng);
  EXPECT_EQ(s.capacity(), 2u);
  ASSERT_EQ(s.top_buffer().size(), 2u);
  EXPECT_EQ(s.top_buffer()[0].key, 3.0);
  EXPECT_EQ(s.top_buffer()[1].key, 2.0);
  ASSERT_FALSE(s.bottom_buffer().empty());
  EXPECT_EQ(s.bottom_buffer()[0].key, -1.0);
}

TEST(ScalarStream, TiesBreakTowardSmallerIndex) {
  Rng rng(2);
  ScalarStreamState s;
  for (int i = 0; i < 9; ++i) s.update(1.0, i, rng);
  // With equal keys a later token never outranks one already demoted, so
  // the buffer stays a strict prefix of the ranking: indices 0, 1, ...
  const auto top = s.top_buffer();
  ASSERT_FALSE(top.empty());
  ASSERT_LE(top.size(), s.capacity());
  for (std::size_t j = 0; j < top.size(); ++j) EXPECT_EQ(top[j].index, j);
}

TEST(ScalarStream, RegionsAreDisjointAndAccountForEveryToken) {
  Rng rng(3);
  ScalarStreamState s;
  for (int i = 0; i < 2000; ++i) {
    s.update(standard_normal(rng), uniform01(rng), rng);
    std::set<std::size_t> ids;
    for (const auto& t : s.top_buffer()) ids.insert(t.index);
    for (const auto& t : s.bottom_buffer()) ids.insert(t.index);
    for (const auto& t : s.pool()) ids.insert(t.index);
    const std::size_t explicit_count = s.top_buffer().size() + s.bottom_buffer().size() + s.pool().size();
    ASSERT_EQ(ids.size(), explicit_count) << "overlap at step " << i;
    ASSERT_EQ(s.top_buffer().size() + s.bottom_buffer().size() + s.middle_count(), s.seen());
    ASSERT_LE(s.retained_scalars(), 8.0 * std::sqrt(double(s.seen())));
  }
}

TEST(ScalarStream, TopBufferIsExactTopSet) {
  Rng rng(4);
  ScalarStreamState s;
  std::vector<double> keys;
  for (int i = 0; i < 500; ++i) {
    keys.push_back(standard_normal(rng));
    s.update(keys.back(), 0.0, rng);
    auto sorted = keys;
    std::sort(sorted.rbegin(), sorted.rend());
    const auto top = s.top_buffer();
    for (std::size_t j = 0; j < top.size(); ++j) ASSERT_EQ(top[j].key, sorted[j]);
  }
}

TEST(ScalarStream, SingleTokenIsExact) {
  Rng rng(5);
  ScalarStreamState s;
  s.update(0.7, 4.25, rng);
  for (double q : {-3.0, 0.0, 2.0}) EXPECT_EQ(s.query(q, rng).value, 4.25);
}

TEST(ScalarStream, EqualKeysGivePlainAverage) {
  Rng rng(6);
  std::vector<std::pair<double, double>> kv;
  for (int i = 0; i < 100; ++i) kv.emplace_back(0.3, 1.0 + (i % 10));
  double total = 0.0;
  const int runs = 20000;
  for (int r = 0; r < runs; ++r) {
    ScalarStreamState s;
    for (const auto& [k, v] : kv) s.update(k, v, rng);
    total += s.query(1.7, rng).value;
  }
  EXPECT_NEAR(total / runs, 5.5, 0.06);
}

TEST(ScalarStream, ZeroQueryIsUniform) {
  Rng rng(7);
  double total = 0.0;
  const int runs = 20000;
  for (int r = 0; r < runs; ++r) {
    ScalarStreamState s;
    for (int i = 0; i < 64; ++i) s.update(std::sin(i * 1.3), i % 2 == 0 ? 1.0 : 3.0, rng);
    total += s.query(0.0, rng).value;
  }
  EXPECT_NEAR(total / runs, 2.0, 0.04);
}

TEST(ScalarStream, DominantKeyConcentrates) {
  Rng rng(8);
  ScalarStreamState s;
  for (int i = 0; i < 100; ++i) s.update(i == 37 ? 10.0 : 0.0, i == 37 ? 99.0 : 1.0, rng);
  int hits = 0;
  for (int t = 0; t < 10000; ++t) hits += s.query(1.0, rng).value == 99.0;
  EXPECT_GE(hits / 10000.0, 0.9);
}

TEST(ScalarStream, NegativeQueryUsesBottomBuffer) {
  Rng rng(9);
  ScalarStreamState s;
  for (int i = 0; i < 100; ++i) s.update(i == 12 ? -10.0 : 0.0, i == 12 ? 7.0 : 1.0, rng);
  int hits = 0;
  for (int t = 0; t < 10000; ++t) hits += s.query(-1.0, rng).value == 7.0;
  EXPECT_GE(hits / 10000.0, 0.9);
}

TEST(ScalarStream, UnbiasedOnRandomStream) {
  const auto inst = build_random_stream(256, 1, 77, 1.0, 2.0);
  std::vector<std::pair<double, double>> kv;
  for (const auto& t : inst.stream) kv.emplace_back(t.k[0], t.v[0]);
  for (double q : {-1.2, 0.8}) {
    const double exact = exact_scalar(kv, q);
    std::vector<double> est;
    for (int r = 0; r < 10000; ++r) {
      Rng rng(derive_seed(78, r));
      ScalarStreamState s;
      for (const auto& [k, v] : kv) s.update(k, v, rng);
      est.push_back(s.query(q, rng).value);
    }
    const auto m = harness::moments(est);
    EXPECT_LE(std::abs(m.mean - exact), 3.0 * m.std_error) << "q = " << q;
  }
}

TEST(ScalarStream, Errors) {
  Rng rng(10);
  ScalarStreamState s;
  EXPECT_THROW(s.query(1.0, rng), DomainError);
  EXPECT_THROW(s.update(TokenTriple(Vector{1.0, 2.0}, Vector{1.0, 2.0}, Vector{1.0, 2.0}), rng), DomainError);
  EXPECT_NO_THROW(s.update(TokenTriple(Vector{1.0}, Vector{2.0}, Vector{3.0}), rng));
}
