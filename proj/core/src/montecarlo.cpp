#include "inhomwalk/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "inhomwalk/error.hpp"
#include "inhomwalk/rng.hpp"

namespace inhomwalk {

namespace {

constexpr double kMinAcceptance = 1e-5;
constexpr std::size_t kMinSamples = 1000;

McEstimate finish(double sum, double sum2, std::size_t n, std::uint64_t seed, double accepted) {
  McEstimate e;
  const double N = static_cast<double>(n);
  e.samples = n;
  e.seed = seed;
  e.value = sum / N;
  const double var = n > 1 ? std::max(0.0, (sum2 - sum * sum / N) / (N - 1)) : 0.0;
  e.std_error = std::sqrt(var / N);
  e.accepted_fraction = accepted;
  return e;
}

}  // namespace

PathSampler::PathSampler(const StepSchedule& schedule) {
  for (std::size_t i = 1; i <= schedule.length(); ++i) {
    const LatticeStep& s = schedule.step(i);
    std::vector<double> cdf(s.probs.size());
    std::partial_sum(s.probs.begin(), s.probs.end(), cdf.begin());
    cdf.back() = 1.0;
    cdfs_.push_back(std::move(cdf));
    atoms_.push_back(s.atoms);
  }
}

template <class Rng>
void PathSampler::sample(std::int64_t u, Rng& rng, std::vector<std::int64_t>& path) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  path.resize(cdfs_.size() + 1);
  path[0] = u;
  for (std::size_t i = 0; i < cdfs_.size(); ++i) {
    const double r = unif(rng);
    const auto& c = cdfs_[i];
    const std::size_t k = static_cast<std::size_t>(std::upper_bound(c.begin(), c.end(), r) - c.begin());
    path[i + 1] = path[i] + atoms_[i][std::min(k, c.size() - 1)];
  }
}

template void PathSampler::sample<std::mt19937_64>(std::int64_t, std::mt19937_64&, std::vector<std::int64_t>&) const;

std::vector<std::int64_t> sample_path(const StepSchedule& schedule, std::int64_t u, std::uint64_t seed) {
  auto rng = make_engine(seed);
  std::vector<std::int64_t> path;
  PathSampler(schedule).sample(u, rng, path);
  return path;
}

bool path_satisfies(const std::vector<std::int64_t>& path, const PathConstraint& constraint) {
  const std::size_t n = constraint.horizon();
  if (path.size() != n + 1) throw Error(ErrorCode::InvalidArgument, "path length differs from horizon");
  std::int64_t anchor = path[0];
  for (std::size_t i = 0; i <= n; ++i) {
    if (!constraint.admits(i, path[i])) return false;
    if (const Checkpoint* cp = constraint.checkpoint_at(i)) {
      if (cp->inc_cap && std::abs(static_cast<double>(path[i] - anchor) - cp->inc_shift) > *cp->inc_cap + 1e-9) return false;
      anchor = path[i];
    }
  }
  if (const auto& v = constraint.endpoint(); v && path[n] != *v) return false;
  return true;
}

McEstimate estimate_event(const StepSchedule& schedule, std::int64_t u, const PathConstraint& constraint,
                          std::size_t samples, std::uint64_t seed) {
  if (samples < kMinSamples) throw Error(ErrorCode::InvalidArgument, "need at least 1000 samples");
  const PathSampler sampler(schedule);
  auto rng = make_engine(seed);
  std::vector<std::int64_t> path;
  std::size_t hits = 0, at_end = 0;
  const auto& v = constraint.endpoint();
  for (std::size_t s = 0; s < samples; ++s) {
    sampler.sample(u, rng, path);
    if (v && path.back() == *v) ++at_end;
    hits += path_satisfies(path, constraint);
  }
  double accepted = 1.0;
  if (v) {
    accepted = static_cast<double>(at_end) / static_cast<double>(samples);
    if (accepted < kMinAcceptance) {
      throw Error(ErrorCode::DegenerateAcceptance,
                  "endpoint acceptance " + std::to_string(accepted) + " below 1e-5; use importance_tilted_estimate");
    }
  }
  const double h = static_cast<double>(hits);
  return finish(h, h, samples, seed, accepted);
}

McEstimate importance_tilted_estimate(const StepSchedule& schedule, std::int64_t u, const PathConstraint& constraint,
                                      std::size_t samples, std::uint64_t seed) {
  const auto& v = constraint.endpoint();
  if (!v) throw Error(ErrorCode::InvalidArgument, "importance sampling needs a pinned endpoint");
  if (samples < kMinSamples) throw Error(ErrorCode::InvalidArgument, "need at least 1000 samples");
  const double lambda = solve_tilt_for_mean(schedule, static_cast<double>(*v - u));
  double H = 0.0;
  for (std::size_t i = 1; i <= schedule.length(); ++i) H += log_mgf(schedule.law(i), lambda, 0);
  const StepSchedule tilted = lambda == 0.0 ? schedule : schedule.tilted(lambda);
  const PathSampler sampler(tilted);
  auto rng = make_engine(seed);
  std::vector<std::int64_t> path;
  double sum = 0.0, sum2 = 0.0;
  std::size_t at_end = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    sampler.sample(u, rng, path);
    if (path.back() == *v) ++at_end;
    if (!path_satisfies(path, constraint)) continue;
    const double w = std::exp(H - lambda * static_cast<double>(path.back() - u));
    sum += w;
    sum2 += w * w;
  }
  return finish(sum, sum2, samples, seed, static_cast<double>(at_end) / static_cast<double>(samples));
}

McEstimate conditioned_running_max(const StepSchedule& schedule, std::int64_t u, std::size_t samples,
                                   std::uint64_t seed) {
  if (u < 0) throw Error(ErrorCode::InvalidArgument, "start must be >= 0");
  const PathSampler sampler(schedule);
  auto rng = make_engine(seed);
  std::vector<std::int64_t> path;
  double sum = 0.0, sum2 = 0.0;
  std::size_t kept = 0, drawn = 0;
  // Draw until `samples` paths survive, with a cap on total draws.
  const std::size_t max_draws = samples * 100000;
  while (kept < samples && drawn < max_draws) {
    ++drawn;
    sampler.sample(u, rng, path);
    bool alive = true;
    double m = 0.0;
    for (std::size_t i = 0; i < path.size() && alive; ++i) {
      const double c = static_cast<double>(path[i]) - schedule.partial_mean(i);
      alive = c >= -1e-9;
      m = std::max(m, c);
    }
    if (!alive) continue;
    sum += m * m;
    sum2 += m * m * m * m;
    ++kept;
  }
  const double accepted = static_cast<double>(kept) / static_cast<double>(drawn);
  if (kept < 2 || accepted < kMinAcceptance) {
    throw Error(ErrorCode::DegenerateAcceptance, "too few surviving paths for the running maximum");
  }
  return finish(sum, sum2, kept, seed, accepted);
}

}  // namespace inhomwalk
