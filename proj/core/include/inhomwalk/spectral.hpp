#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "inhomwalk/schedule.hpp"

namespace inhomwalk {

// prod_i M_i(lambda + i theta) / M_i(lambda), accumulated as log-modulus and
// phase.
std::complex<double> charfn_product(const StepSchedule& schedule, double lambda, double theta);

// P(S_{1,n} = y) by numerical inversion of the characteristic function over
// [-pi, pi]. Throws QuadratureNonConvergence when the error estimate exceeds
// 1e-11.
double fourier_point_prob(const StepSchedule& schedule, std::int64_t y);

// exp(H_n(lambda) - lambda y) P(S^lambda_n = y) with H_n'(lambda) = y.
// Throws TargetOutOfRange unless y is strictly inside the reachable range.
double tilt_identity_prob(const StepSchedule& schedule, std::int64_t y);

struct LltReport {
  std::size_t n = 0;
  std::int64_t y = 0;
  double exact_prob = 0.0;
  double gauss_approx = 0.0;
  double ratio = 0.0;
  double log_ratio = 0.0;
  double alpha = 0.0;
  double envelope_exponent = 0.0;  // min(2 - 3 alpha, 1/3)
};

double llt_exponent(double alpha);

// Exact probability from the DP unless supplied. Throws OutOfRegime when
// |y - m_n| > n^alpha and ZeroProbability when P(S_n = y) = 0.
LltReport llt_ratio(const StepSchedule& schedule, std::int64_t y, double alpha,
                    std::optional<double> exact = std::nullopt);

struct LltSweep {
  std::vector<LltReport> rows;
  std::size_t skipped = 0;  // y in range with P = 0
};

// Every integer y with |y - m_n| <= n^alpha, from one unconstrained DP.
LltSweep llt_sweep(const StepSchedule& schedule, double alpha);

struct BerryEsseen {
  double ks_distance = 0.0;
  double third_moment = 0.0;  // A = max_i E|X_i - E X_i|^3
  double normalized = 0.0;    // ks * B_n^{3/2} / (A n)
  double bound = 0.0;         // C A n / B_n^{3/2}
};

// Kolmogorov distance between (S_{1,n} - m_n)/sqrt(B_n) and N(0,1), checked
// on both sides of every lattice jump.
BerryEsseen berry_esseen_distance(const StepSchedule& schedule, double C = 1.0);

// max |M(i theta)| over a grid of theta in [b, pi].
double charfn_gap(const IncrementLaw& law, double b, std::size_t grid = 2048);

double normal_cdf(double z);

}  // namespace inhomwalk
