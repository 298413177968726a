#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "inhomwalk/constraint.hpp"
#include "inhomwalk/schedule.hpp"

namespace inhomwalk {

// Scaled masses over the contiguous window [offset, offset + mass.size()).
// The represented value at x is mass[x - offset] * exp(log_scale). Used both
// for forward position laws and for backward survival weights.
struct PositionDistribution {
  std::int64_t offset = 0;
  std::vector<double> mass;
  double log_scale = 0.0;

  static PositionDistribution point(std::int64_t x);

  bool empty() const;  // no positive mass
  std::int64_t lo() const { return offset; }
  std::int64_t hi() const { return offset + static_cast<std::int64_t>(mass.size()) - 1; }
  double at(std::int64_t x) const;
  double log_at(std::int64_t x) const;  // -inf when zero
  double total() const;
  double log_total() const;

  // Peak mass becomes 1 (log_scale adjusted); no-op when empty.
  void normalize_peak();
  // Drop leading and trailing zero cells.
  void trim();
};

// Renormalization into log_scale happens when the peak cell drops below this.
inline constexpr double kRescaleThreshold = 1e-150;

// One step: convolve with the law, then zero every cell outside the band.
PositionDistribution propagate(const PositionDistribution& dist, const IncrementLaw& law,
                               const std::optional<Band>& band, bool strict);

// Law of S_k on the event that S_0 = u and every band/checkpoint set at
// times 1..k holds. The endpoint is not applied. Rejects increment caps.
PositionDistribution forward(std::int64_t u, const StepSchedule& schedule, const PathConstraint& constraint,
                             std::size_t k);
// Forward marginals at several increasing times in one pass.
std::vector<PositionDistribution> forward_marginals(std::int64_t u, const StepSchedule& schedule,
                                                    const PathConstraint& constraint,
                                                    const std::vector<std::size_t>& times);

// h_k(x) = P(constraints at times k+1..n and the endpoint | S_k = x) for x in
// [x_lo, x_hi]. The band at time k itself is not applied.
PositionDistribution backward(const StepSchedule& schedule, const PathConstraint& constraint, std::size_t k,
                              std::int64_t x_lo, std::int64_t x_hi);

// P_u(event) for every start u in [u_lo, u_hi] in one backward pass; the
// band at time 0 is applied.
PositionDistribution event_prob_all_starts(const StepSchedule& schedule, const PathConstraint& constraint,
                                           std::int64_t u_lo, std::int64_t u_hi);

// Exact P_u(bands, checkpoints, endpoint). Returns 0 for unreachable events.
// Throws InfeasibleConstraint when some band admits no lattice cell, or when
// u violates the band at time 0.
double event_prob(std::int64_t u, const StepSchedule& schedule, const PathConstraint& constraint);
double event_log_prob(std::int64_t u, const StepSchedule& schedule, const PathConstraint& constraint);

// P_u(the path leaves the bands at some time in 1..n, endpoint), computed
// directly with an absorbed layer rather than as 1 - P(stay).
double exit_event_prob(std::int64_t u, const StepSchedule& schedule, const PathConstraint& constraint);

// E_u(f(S_k) | event). Throws ZeroProbabilityEvent.
double forward_backward(std::int64_t u, const StepSchedule& schedule, const PathConstraint& constraint,
                        std::size_t k, const std::function<double(std::int64_t)>& f);

// Conditional law of S_k given the event: probabilities over x.
PositionDistribution conditional_marginal(std::int64_t u, const StepSchedule& schedule,
                                          const PathConstraint& constraint, std::size_t k);

// K(x, y) = P(S_to = y, bands at from+1..to | S_from = x), rows x_lo..x_hi,
// columns y_lo..y_hi.
Eigen::MatrixXd block_kernel(const StepSchedule& schedule, std::size_t from, std::size_t to,
                             const PathConstraint& constraint, std::int64_t x_lo, std::int64_t x_hi,
                             std::int64_t y_lo, std::int64_t y_hi);

// Exhaustive enumeration over all paths; independent of the DP. Throws
// TooLarge when the path count exceeds 1e8.
double brute_force_prob(std::int64_t u, const StepSchedule& schedule, const PathConstraint& constraint);

// Homogeneous +-1 walk from u to v in n steps with S_i >= 0:
// [C(n,(n+v-u)/2) - C(n,(n+v+u+2)/2)] / 2^n. Throws ParityViolation.
double reflection_oracle(std::int64_t u, std::int64_t v, std::int64_t n);

}  // namespace inhomwalk
