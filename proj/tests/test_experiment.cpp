#include <gtest/gtest.h>

#include <sstream>
#include <stdexcept>
#include <string>

#include "kvstream/experiment.hpp"
#include "kvstream/parallel.hpp"

using namespace kvstream;

TEST(Experiment, ExactEstimatorHasNoError) {
  const auto inst = build_random_stream(60, 3, 1);
  RunParams p;
  p.query_steps = {1, 30, 60};
  const auto reports = run_estimator(inst, p, 5);
  ASSERT_EQ(reports.size(), 3u);
  for (const auto& r : reports) {
    EXPECT_EQ(r.max_rel_error, 0.0);
    EXPECT_EQ(r.stored_vector_count, 2 * r.step);
  }
}

TEST(Experiment, WindowRowsRespectSpaceBound) {
  const auto inst = build_random_stream(200, 4, 2);
  RunParams p;
  p.estimator = Estimator::window;
  p.window = 16;
  for (std::size_t s = 1; s <= 200; s += 7) p.query_steps.push_back(s);
  for (const auto& r : run_estimator(inst, p, 3)) {
    EXPECT_LE(r.stored_vector_count, 33u);
    EXPECT_EQ(r.stored_bytes, r.stored_vector_count * 4 * 8);
  }
}

TEST(Experiment, BoostedOnBenignStream) {
  const auto inst = build_random_stream(512, 4, 3, 1.0, 2.0);
  RunParams p;
  p.estimator = Estimator::window_boosted;
  p.window = 32;
  p.v_max = 2.0;
  const auto r = run_estimator(inst, p, 4);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_LE(r[0].max_rel_error, 0.1);
}

TEST(Experiment, ScalarGumbelNeedsDimensionOne) {
  RunParams p;
  p.estimator = Estimator::scalar_gumbel;
  EXPECT_THROW(run_estimator(build_random_stream(10, 2, 1), p, 1), ParameterError);
  const auto r = run_estimator(build_random_stream(50, 1, 1), p, 1);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_LE(r[0].stored_vector_count, 8.0 * std::sqrt(50.0));
}

TEST(Experiment, IncompatibleParametersFailEarly) {
  const auto inst = build_random_stream(10, 2, 1);
  RunParams p;
  p.estimator = Estimator::window;
  EXPECT_THROW(check_compatible(inst, p), ParameterError);
  p.window = 4;
  p.query_steps = {11};
  EXPECT_THROW(check_compatible(inst, p), ParameterError);
  EXPECT_THROW(parse_estimator("nope"), ParameterError);
}

TEST(Experiment, ReportMaxIgnoresSmallCoordinates) {
  const auto r = make_report("id", Estimator::window, 3, Vector{2.0, 0.1}, Vector{2.2, 0.5}, 5, 1.0, 9);
  EXPECT_NEAR(r.per_coordinate_error[0], 0.1, 1e-12);
  EXPECT_NEAR(r.per_coordinate_error[1], 4.0, 1e-12);
  EXPECT_NEAR(r.max_rel_error, 0.1, 1e-12);
  EXPECT_EQ(r.stored_bytes, 5u * 2u * 8u);
  EXPECT_EQ(relative_error(0.5, 0.0), 0.5);
}

TEST(Experiment, CsvRowsAreReproducible) {
  const auto inst = build_random_stream(100, 2, 6);
  RunParams p;
  p.estimator = Estimator::window;
  p.window = 8;
  p.record_time = false;
  p.query_steps = {50, 100};
  auto render = [&] {
    std::ostringstream os;
    os << kCsvHeader << '\n';
    for (const auto& r : run_estimator(inst, p, 77)) write_csv_rows(os, r);
    return os.str();
  };
  const auto a = render();
  EXPECT_EQ(a, render());
  std::istringstream is(a);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "instance_id,estimator,step,coord,exact,estimate,rel_error,stored_vectors,stored_bytes,wall_ms,seed");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 10);
  }
  EXPECT_EQ(rows, 4);
}

TEST(Parallel, PreservesOrderAndPropagatesErrors) {
  const auto out = parallel_map(100, [](std::size_t i) { return i * i; }, 4);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(out[i], i * i);
  EXPECT_THROW(parallel_map(10, [](std::size_t i) -> int {
                 if (i == 7) throw std::runtime_error("boom");
                 return 0;
               }, 3),
               std::runtime_error);
}
