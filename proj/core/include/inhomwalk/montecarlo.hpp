#pragma once

#include <cstdint>
#include <vector>

#include "inhomwalk/constraint.hpp"
#include "inhomwalk/schedule.hpp"

namespace inhomwalk {

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;  // sample sd / sqrt(samples)
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  double accepted_fraction = 1.0;
};

// Inverse-CDF sampler over a schedule.
class PathSampler {
 public:
  explicit PathSampler(const StepSchedule& schedule);
  std::size_t length() const { return cdfs_.size(); }
  // path[0] = u, path[i] = S_i.
  template <class Rng>
  void sample(std::int64_t u, Rng& rng, std::vector<std::int64_t>& path) const;

 private:
  std::vector<std::vector<double>> cdfs_;
  std::vector<std::vector<std::int64_t>> atoms_;
};

std::vector<std::int64_t> sample_path(const StepSchedule& schedule, std::int64_t u, std::uint64_t seed);

// Bands, checkpoint sets and increment caps, and the endpoint.
bool path_satisfies(const std::vector<std::int64_t>& path, const PathConstraint& constraint);

// Indicator-mean estimate of P_u(event). With a pinned endpoint,
// accepted_fraction is the share of paths ending there; DegenerateAcceptance
// when it falls below 1e-5. Requires samples >= 1000.
McEstimate estimate_event(const StepSchedule& schedule, std::int64_t u, const PathConstraint& constraint,
                          std::size_t samples, std::uint64_t seed);

// Pinned-endpoint probability by sampling the lambda-tilted schedule with
// H_n'(lambda) = y - u and weighting by exp(H_n(lambda) - lambda (S_n - u)).
McEstimate importance_tilted_estimate(const StepSchedule& schedule, std::int64_t u, const PathConstraint& constraint,
                                      std::size_t samples, std::uint64_t seed);

// E_u(max_{i<=n} Sbar_i^2 | Sbar_i >= 0 for i <= n) by rejection, with
// Sbar_i = S_i - m_i the centered walk.
McEstimate conditioned_running_max(const StepSchedule& schedule, std::int64_t u, std::size_t samples,
                                   std::uint64_t seed);

}  // namespace inhomwalk
