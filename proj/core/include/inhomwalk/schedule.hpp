#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "inhomwalk/laws.hpp"

namespace inhomwalk {

// Integer view of a lattice law used by the inner DP loops.
struct LatticeStep {
  std::vector<std::int64_t> atoms;
  std::vector<double> probs;
  std::int64_t min_atom() const { return atoms.front(); }
  std::int64_t max_atom() const { return atoms.back(); }
};

// Laws for steps 1..n with cached partial means m_i = E S_{1,i} and partial
// variances B_i = Var S_{1,i}; index 0 holds m_0 = B_0 = 0.
class StepSchedule {
 public:
  // Throws InvalidArgument on an empty list or a non-lattice law.
  explicit StepSchedule(std::vector<IncrementLaw> laws);

  static StepSchedule homogeneous(const IncrementLaw& law, std::size_t n);

  std::size_t length() const noexcept { return laws_.size(); }
  // Law of step i, 1 <= i <= n.
  const IncrementLaw& law(std::size_t i) const { return laws_.at(i - 1); }
  std::span<const IncrementLaw> laws() const noexcept { return laws_; }
  const LatticeStep& step(std::size_t i) const { return steps_.at(i - 1); }

  double partial_mean(std::size_t i) const { return means_.at(i); }
  double partial_var(std::size_t i) const { return vars_.at(i); }
  const std::vector<double>& partial_means() const noexcept { return means_; }
  const std::vector<double>& partial_vars() const noexcept { return vars_; }

  // Sum of min / max atoms over steps from+1..to.
  std::int64_t min_reach(std::size_t from, std::size_t to) const { return min_cum_[to] - min_cum_[from]; }
  std::int64_t max_reach(std::size_t from, std::size_t to) const { return max_cum_[to] - max_cum_[from]; }

  // Steps from+1..to as a schedule of length to-from.
  StepSchedule slice(std::size_t from, std::size_t to) const;
  // Every law tilted by the same lambda.
  StepSchedule tilted(double lambda) const;

  // max_i E|X_i - E X_i|^p
  double max_central_abs_moment(double p) const;

 private:
  std::vector<IncrementLaw> laws_;
  std::vector<LatticeStep> steps_;
  std::vector<double> means_;
  std::vector<double> vars_;
  std::vector<std::int64_t> min_cum_;
  std::vector<std::int64_t> max_cum_;
};

double solve_tilt_for_mean(const StepSchedule& schedule, double target, double tol = 1e-12);

}  // namespace inhomwalk
