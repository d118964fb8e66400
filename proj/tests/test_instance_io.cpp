#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "kvstream/instance_io.hpp"

using namespace kvstream;

namespace {

void expect_round_trip(const HardInstance& inst) {
  const std::string text = instance_to_string(inst);
  const HardInstance back = instance_from_string(text);
  EXPECT_EQ(back, inst);
  EXPECT_EQ(instance_to_string(back), text);
}

}  // namespace

TEST(InstanceIo, RoundTripsEveryKind) {
  Rng rng(1);
  expect_round_trip(build_index_instance(BitMatrix::random(8, 33, rng), 0.1, 7));
  expect_round_trip(build_window_instance(BitMatrix::random(4, 21, rng), 16, 4, 0.2, 0.5, 8));
  expect_round_trip(build_time_family(16, 3, 5));
  expect_round_trip(build_time_sigma(9, 2));
  expect_round_trip(build_random_stream(40, 5, 9));
}

TEST(InstanceIo, BitExactForAwkwardDoubles) {
  HardInstance inst = build_random_stream(3, 2, 2);
  inst.stream[0] = TokenTriple(Vector{0.1, 1e-300}, Vector{-0.0, 5e-324}, Vector{1.7976931348623157e308, 1.0 / 3.0});
  inst.eps = 0.1;
  inst.C = std::log(1024.0);
  const auto back = instance_from_string(instance_to_string(inst));
  EXPECT_EQ(back.stream[0].k[1], 5e-324);
  EXPECT_TRUE(std::signbit(back.stream[0].k[0]));
  EXPECT_EQ(back.C, inst.C);
  EXPECT_EQ(back, inst);
}

TEST(InstanceIo, Deterministic) {
  Rng a(3), b(3);
  EXPECT_EQ(instance_to_string(build_index_instance(BitMatrix::random(6, 10, a), 0.1, 4)),
            instance_to_string(build_index_instance(BitMatrix::random(6, 10, b), 0.1, 4)));
}

TEST(InstanceIo, HeaderCarriesParameters) {
  const auto text = instance_to_string(build_time_sigma(4, 1));
  EXPECT_EQ(text.rfind("kvstream-instance 1\nkind time-sigma\nn 4\nd 1\nw 0\n", 0), 0u);
  EXPECT_NE(text.find("planted -\nx -\nstream 4 1\n"), std::string::npos);
}

TEST(InstanceIo, RejectsMalformedInput) {
  const std::string good = instance_to_string(build_time_sigma(4, 1));
  EXPECT_THROW(instance_from_string(""), ParameterError);
  EXPECT_THROW(instance_from_string("kvstream-instance 2\n"), ParameterError);
  EXPECT_THROW(instance_from_string(good + "extra"), ParameterError);
  EXPECT_THROW(instance_from_string(good.substr(0, good.size() - 3)), ParameterError);
  std::string bad_kind = good;
  bad_kind.replace(bad_kind.find("time-sigma"), 10, "time-omega");
  EXPECT_THROW(instance_from_string(bad_kind), ParameterError);
  std::string bad_num = good;
  bad_num.replace(bad_num.find("n 4"), 3, "n x");
  EXPECT_THROW(instance_from_string(bad_num), ParameterError);
}

TEST(InstanceIo, RejectsNonBitCharacters) {
  Rng rng(5);
  std::string text = instance_to_string(build_index_instance(BitMatrix::random(2, 4, rng), 0.1, 1));
  const auto pos = text.find("x 2 4\n") + 6;
  text[pos] = '2';
  EXPECT_THROW(instance_from_string(text), ParameterError);
}
