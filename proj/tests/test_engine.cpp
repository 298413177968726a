#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "inhomwalk/engine.hpp"

using namespace inhomwalk;

namespace {

StepSchedule pm(std::size_t n) { return StepSchedule::homogeneous(simple_walk(), n); }
StepSchedule lazy(std::size_t n) { return StepSchedule::homogeneous(lazy_walk(), n); }

// Random schedule with support size <= 3 on atoms in [-2, 2].
StepSchedule random_schedule(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> k(1, 3), atom(-2, 2);
  std::uniform_real_distribution<double> w(0.1, 1.0);
  std::vector<IncrementLaw> laws;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> atoms, weights;
    const int m = k(rng);
    while (static_cast<int>(atoms.size()) < m) {
      const double a = atom(rng);
      if (std::find(atoms.begin(), atoms.end(), a) != atoms.end()) continue;
      atoms.push_back(a);
      weights.push_back(w(rng));
    }
    laws.push_back(validate_law(atoms, weights, true));
  }
  return StepSchedule(laws);
}

PathConstraint random_constraint(std::mt19937_64& rng, const StepSchedule& s) {
  const std::size_t n = s.length();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::optional<Band>> bands(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    if (u(rng) < 0.6) {
      Band b;
      if (u(rng) < 0.8) b.lo = -4.0 + 4.0 * u(rng);
      if (u(rng) < 0.5) b.hi = 1.0 + 5.0 * u(rng);
      bands[i] = b;
    }
  }
  std::vector<Checkpoint> cps;
  if (u(rng) < 0.3 && n >= 4) {
    Checkpoint c;
    c.time = n / 2;
    c.set = std::vector<std::int64_t>{-2, 0, 1, 3};
    cps.push_back(c);
  }
  std::optional<std::int64_t> v;
  if (u(rng) < 0.5) v = static_cast<std::int64_t>(std::floor(u(rng) * 7)) - 2;
  return PathConstraint(n, bands, u(rng) < 0.3, cps, v);
}

}  // namespace

TEST(Engine, PropagateSingleStep) {
  auto d = propagate(PositionDistribution::point(0), lazy_walk(), std::nullopt, false);
  EXPECT_EQ(d.lo(), -1);
  EXPECT_DOUBLE_EQ(d.at(-1), 0.25);
  EXPECT_DOUBLE_EQ(d.at(0), 0.5);
  EXPECT_DOUBLE_EQ(d.at(1), 0.25);
  auto f = propagate(PositionDistribution::point(0), simple_walk(), Band{0.0, kInf}, false);
  EXPECT_DOUBLE_EQ(f.total(), 0.5);
  EXPECT_DOUBLE_EQ(f.at(1), 0.5);
  EXPECT_EQ(f.lo(), 1);
  auto g = propagate(propagate(PositionDistribution::point(0), simple_walk(), std::nullopt, false), simple_walk(),
                     std::nullopt, false);
  EXPECT_DOUBLE_EQ(g.at(-2), 0.25);
  EXPECT_DOUBLE_EQ(g.at(0), 0.5);
  EXPECT_DOUBLE_EQ(g.at(2), 0.25);
}

TEST(Engine, EventProbSmallCases) {
  auto s = pm(2);
  EXPECT_DOUBLE_EQ(event_prob(1, s, PathConstraint::floor(2)), 0.75);
  EXPECT_DOUBLE_EQ(event_prob(1, s, PathConstraint::floor(2).with_endpoint(1)), 0.5);
  EXPECT_DOUBLE_EQ(event_prob(0, lazy(1), PathConstraint::none(1).with_endpoint(0)), 0.5);
  // strict floor: S_i > 0
  EXPECT_DOUBLE_EQ(event_prob(1, s, PathConstraint::floor(2, 0.0, true)), 0.5);
}

TEST(Engine, InfeasibleAndUnreachable) {
  std::vector<std::optional<Band>> bands(3);
  bands[2] = Band{0.2, 0.8};
  EXPECT_THROW(event_prob(0, pm(3), PathConstraint(3, bands, false, {}, std::nullopt)), Error);
  EXPECT_EQ(event_prob(0, pm(3), PathConstraint::none(3).with_endpoint(2)), 0.0);
  EXPECT_EQ(event_prob(0, pm(3), PathConstraint::none(3).with_endpoint(30)), 0.0);
}

TEST(Engine, MatchesBruteForce) {
  std::mt19937_64 rng(1234);
  double worst = 0.0;
  for (int r = 0; r < 150; ++r) {
    std::uniform_int_distribution<int> nn(1, 12), uu(0, 2);
    auto s = random_schedule(rng, static_cast<std::size_t>(nn(rng)));
    auto c = random_constraint(rng, s);
    const std::int64_t u = uu(rng);
    double dp = 0.0;
    try {
      dp = event_prob(u, s, c);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InfeasibleConstraint) throw;
      continue;
    }
    worst = std::max(worst, std::abs(dp - brute_force_prob(u, s, c)));
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(Engine, IncrementCapsMatchBruteForce) {
  std::mt19937_64 rng(99);
  for (int r = 0; r < 40; ++r) {
    auto s = random_schedule(rng, 10);
    Checkpoint a{3, std::nullopt, std::nullopt, 2.0};
    Checkpoint b{7, std::nullopt, Band{-3.0, 6.0}, 3.0};
    Checkpoint c{10, std::nullopt, std::nullopt, 2.5};
    if (r % 3 == 0) {
      a.inc_shift = 0.6;
      c.inc_shift = -1.3;
    }
    PathConstraint pc(10, {}, false, {a, b, c}, r % 2 ? std::optional<std::int64_t>(1) : std::nullopt);
    EXPECT_NEAR(event_prob(0, s, pc), brute_force_prob(0, s, pc), 1e-12);
  }
}

TEST(Engine, ReflectionOracle) {
  EXPECT_DOUBLE_EQ(reflection_oracle(1, 1, 2), 0.5);
  EXPECT_DOUBLE_EQ(reflection_oracle(0, 0, 2), 0.25);
  EXPECT_EQ(reflection_oracle(0, 10, 4), 0.0);
  EXPECT_THROW(reflection_oracle(0, 1, 2), Error);
  for (std::int64_t n = 1; n <= 24; ++n) {
    for (std::int64_t u = 0; u <= 8; ++u) {
      for (std::int64_t v = 0; v <= 8; ++v) {
        if ((n + v - u) % 2) continue;
        const double dp = event_prob(u, pm(n), PathConstraint::floor(n).with_endpoint(v));
        EXPECT_NEAR(dp, reflection_oracle(u, v, n), 1e-12);
      }
    }
  }
}

TEST(Engine, PartitionOverEndpoints) {
  std::mt19937_64 rng(8);
  auto s = random_schedule(rng, 12);
  auto c = PathConstraint::floor(12, -1.0);
  double sum = 0.0;
  for (std::int64_t v = s.min_reach(0, 12) - 2; v <= s.max_reach(0, 12) + 2; ++v) {
    sum += event_prob(1, s, c.with_endpoint(v));
  }
  EXPECT_NEAR(sum, event_prob(1, s, c), 1e-12);
  EXPECT_NEAR(event_prob(0, s, PathConstraint::none(12)), 1.0, 1e-12);
}

TEST(Engine, RelaxingBandNeverDecreases) {
  std::mt19937_64 rng(17);
  for (int r = 0; r < 50; ++r) {
    auto s = random_schedule(rng, 10);
    auto tight = PathConstraint::floor(10, 0.0);
    auto loose = PathConstraint::floor(10, -1.0);
    EXPECT_LE(event_prob(2, s, tight), event_prob(2, s, loose) + 1e-15);
  }
}

TEST(Engine, AllStartsMatchesPerStart) {
  auto s = lazy(40);
  auto c = PathConstraint::floor(40).with_endpoint(3);
  auto h = event_prob_all_starts(s, c, 0, 10);
  for (std::int64_t u = 0; u <= 10; ++u) EXPECT_NEAR(h.at(u), event_prob(u, s, c), 1e-15);
  auto free = event_prob_all_starts(s, PathConstraint::floor(40), 0, 10);
  for (std::int64_t u = 0; u <= 10; ++u) EXPECT_NEAR(free.at(u), event_prob(u, s, PathConstraint::floor(40)), 1e-15);
}

TEST(Engine, ForwardBackwardConditionalMean) {
  auto s = pm(2);
  auto c = PathConstraint::floor(2);
  EXPECT_NEAR(forward_backward(1, s, c, 1, [](std::int64_t x) { return static_cast<double>(x); }), 4.0 / 3, 1e-15);
  EXPECT_NEAR(forward_backward(1, s, c, 1, [](std::int64_t) { return 1.0; }), 1.0, 1e-15);
  EXPECT_THROW(forward_backward(0, pm(2), PathConstraint::floor(2).with_endpoint(1), 1,
                               [](std::int64_t) { return 1.0; }),
               Error);
}

TEST(Engine, ForwardBackwardIndicatorMatchesRatio) {
  auto s = lazy(20);
  auto c = PathConstraint::floor(20);
  const double p = forward_backward(1, s, c, 10, [](std::int64_t x) { return x >= 3 ? 1.0 : 0.0; });
  // P(S_10 >= 3, tau > 20) / P(tau > 20), with the extra band at time 10
  auto both = c.with_band(10, Band{3.0, kInf});
  EXPECT_NEAR(p, event_prob(1, s, both) / event_prob(1, s, c), 1e-12);
}

TEST(Engine, ConditionedWalkIsSubmartingale) {
  auto s = lazy(16);
  auto c = PathConstraint::floor(16);
  for (std::size_t i = 1; i < 16; ++i) {
    auto fwd = forward(1, s, c, i);
    auto h_next = backward(s, c, i + 1, fwd.lo() - 1, fwd.hi() + 1);
    for (std::int64_t x = fwd.lo(); x <= fwd.hi(); ++x) {
      double num = 0.0, den = 0.0;
      for (std::int64_t d = -1; d <= 1; ++d) {
        const double w = lazy_walk().prob_at(static_cast<double>(d)) * (x + d >= 0 ? h_next.at(x + d) : 0.0);
        num += w * static_cast<double>(x + d);
        den += w;
      }
      if (den > 0) EXPECT_GE(num / den, static_cast<double>(x) - 1e-12);
    }
  }
}

TEST(Engine, FkgInstance) {
  auto s = lazy(14);
  auto c = PathConstraint::floor(14);
  auto cond = conditional_marginal(1, s, c, 7);
  auto free = forward(1, s, PathConstraint::none(14), 7);
  for (std::int64_t a = -6; a <= 9; ++a) {
    double pc = 0, pf = 0;
    for (std::int64_t x = a; x <= 9; ++x) {
      pc += cond.at(x);
      pf += free.at(x);
    }
    EXPECT_GE(pc, pf - 1e-12);
  }
}

TEST(Engine, BlockKernel) {
  auto k1 = block_kernel(lazy(1), 0, 1, PathConstraint::none(1), 0, 0, -1, 1);
  EXPECT_DOUBLE_EQ(k1(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(k1(0, 1), 0.5);
  auto k2 = block_kernel(pm(2), 0, 2, PathConstraint::none(2), 0, 0, -2, 2);
  EXPECT_DOUBLE_EQ(k2(0, 2), 0.5);
  EXPECT_DOUBLE_EQ(k2(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(k2(0, 4), 0.25);
  auto kb = block_kernel(lazy(6), 0, 6, PathConstraint::floor(6), 0, 4, -6, 10);
  auto kf = block_kernel(lazy(6), 0, 6, PathConstraint::none(6), 0, 4, -6, 10);
  EXPECT_TRUE(((kf - kb).array() >= -1e-16).all());
  EXPECT_TRUE((kf.rowwise().sum().array() <= 1 + 1e-12).all());
}

TEST(Engine, ExitEventComplementsStay) {
  auto s = lazy(30);
  std::vector<std::optional<Band>> bands(30, Band{-4.0, 4.0});
  PathConstraint tube(30, bands, false, {}, std::nullopt);
  EXPECT_NEAR(exit_event_prob(0, s, tube) + event_prob(0, s, tube), 1.0, 1e-13);
  auto pinned = tube.with_endpoint(1);
  EXPECT_NEAR(exit_event_prob(0, s, pinned) + event_prob(0, s, pinned),
              event_prob(0, s, PathConstraint::none(30).with_endpoint(1)), 1e-13);
}

TEST(Engine, LogScaleTracksTinyProbabilities) {
  // Tube of width 0 around zero: each lazy step stays with probability 1/2.
  const std::size_t n = 2000;
  std::vector<std::optional<Band>> bands(n, Band{0.0, 0.0});
  PathConstraint c(n, bands, false, {}, std::nullopt);
  EXPECT_NEAR(event_log_prob(0, lazy(n), c), -static_cast<double>(n) * std::log(2.0), 1e-9);
  EXPECT_EQ(event_prob(0, lazy(n), c), 0.0);
  // Same tube, width 1, against one block repeated.
  std::vector<std::optional<Band>> b2(n, Band{0.0, 1.0});
  PathConstraint c2(n, b2, false, {}, std::nullopt);
  const double lp = event_log_prob(0, lazy(n), c2);
  // Transfer matrix on {0,1}: [[1/2,1/4],[1/4,1/2]] with top eigenvalue 3/4.
  EXPECT_NEAR(lp / n, std::log(0.75), 1e-3);
}

TEST(Engine, CenteredBandHelpers) {
  std::vector<IncrementLaw> laws(4, validate_law(std::vector<double>{0, 1}, std::vector<double>{1, 3}, true));
  StepSchedule s(laws);
  std::vector<std::optional<Band>> cb(4, Band{-0.75, kInf});
  auto c = centered_bands(s, cb);
  EXPECT_EQ(c.cells_at(1).first, 0);
  EXPECT_EQ(c.cells_at(4).first, 3);
  auto e = lattice_endpoint(s, 0.4);
  EXPECT_EQ(e.y, 3);
  EXPECT_NEAR(e.effective_v, 0.0, 1e-15);
}

TEST(Engine, BruteForceLimit) {
  EXPECT_THROW(brute_force_prob(0, lazy(20), PathConstraint::none(20)), Error);
  EXPECT_NEAR(brute_force_prob(0, lazy(8), PathConstraint::none(8)), 1.0, 1e-15);
}
