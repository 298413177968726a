#include <cmath>

#include <gtest/gtest.h>

#include "inhomwalk/engine.hpp"
#include "inhomwalk/montecarlo.hpp"

using namespace inhomwalk;

namespace {

StepSchedule lazy(std::size_t n) { return StepSchedule::homogeneous(lazy_walk(), n); }

StepSchedule drifting(std::size_t n) {
  std::vector<IncrementLaw> laws;
  for (std::size_t i = 0; i < n; ++i) laws.push_back(tilt(lazy_walk(), (i % 3) * 0.2 - 0.1));
  return StepSchedule(laws);
}

}  // namespace

TEST(MonteCarlo, SamplePath) {
  auto s = drifting(50);
  auto a = sample_path(s, 7, 123);
  EXPECT_EQ(a.size(), 51u);
  EXPECT_EQ(a[0], 7);
  EXPECT_EQ(a, sample_path(s, 7, 123));
  double sum = 0, sum2 = 0;
  const int N = 100000;
  for (int r = 0; r < N; ++r) {
    const double x = static_cast<double>(sample_path(s, 0, 1000 + r).back());
    sum += x;
    sum2 += x * x;
  }
  const double m = sum / N, se = std::sqrt((sum2 / N - m * m) / N);
  EXPECT_NEAR(m, s.partial_mean(50), 4 * se);
}

TEST(MonteCarlo, AgreesWithDp) {
  auto s = drifting(40);
  std::vector<PathConstraint> cases{PathConstraint::floor(40), PathConstraint::floor(40, -2.0).with_endpoint(4),
                                    PathConstraint::none(40).with_endpoint(3)};
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const double p = event_prob(2, s, cases[k]);
    ASSERT_GE(p, 1e-3);
    auto e = estimate_event(s, 2, cases[k], 100000, 77 + k);
    EXPECT_NEAR(e.value, p, 4 * e.std_error);
  }
}

TEST(MonteCarlo, TrivialEvents) {
  auto s = lazy(20);
  auto all = estimate_event(s, 0, PathConstraint::none(20), 1000, 1);
  EXPECT_EQ(all.value, 1.0);
  EXPECT_EQ(all.std_error, 0.0);
  std::vector<std::optional<Band>> bands(20, Band{5.0, 9.0});
  bands[0] = std::nullopt;
  auto none = estimate_event(s, 0, PathConstraint(20, bands, false, {}, std::nullopt), 1000, 1);
  EXPECT_EQ(none.value, 0.0);
  EXPECT_THROW(estimate_event(s, 0, PathConstraint::none(20).with_endpoint(40), 1000, 1), Error);
}

TEST(MonteCarlo, ImportanceSamplingOffCenter) {
  auto s = lazy(64);
  auto c = PathConstraint::none(64).with_endpoint(16);
  const double p = event_prob(0, s, c);
  auto is = importance_tilted_estimate(s, 0, c, 20000, 4);
  auto plain = estimate_event(s, 0, c, 20000, 4);
  EXPECT_NEAR(is.value, p, 4 * is.std_error);
  EXPECT_GE(is.accepted_fraction, 10 * plain.accepted_fraction);
  // centered target: no tilt
  auto c0 = PathConstraint::none(64).with_endpoint(0);
  auto z = importance_tilted_estimate(s, 0, c0, 20000, 4);
  auto r = estimate_event(s, 0, c0, 20000, 4);
  EXPECT_NEAR(z.value, r.value, 1e-12);
}

TEST(MonteCarlo, RunningMaxIsDeterministic) {
  auto s = lazy(64);
  auto a = conditioned_running_max(s, 2, 2000, 3);
  auto b = conditioned_running_max(s, 2, 2000, 3);
  EXPECT_EQ(a.value, b.value);
  EXPECT_GT(a.value, 4.0);
  EXPECT_GT(a.accepted_fraction, 0.0);
}

TEST(MonteCarlo, PathSatisfiesCaps) {
  Checkpoint c{2, std::nullopt, std::nullopt, 1.0};
  PathConstraint pc(3, {}, false, {c}, std::nullopt);
  EXPECT_TRUE(path_satisfies({0, 1, 1, 5}, pc));
  EXPECT_FALSE(path_satisfies({0, 1, 2, 2}, pc));
}
