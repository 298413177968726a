#include "inhomwalk/schedule.hpp"

#include <algorithm>
#include <string>

namespace inhomwalk {

StepSchedule::StepSchedule(std::vector<IncrementLaw> laws) : laws_(std::move(laws)) {
  if (laws_.empty()) throw Error(ErrorCode::InvalidArgument, "schedule needs at least one step");
  steps_.reserve(laws_.size());
  means_.assign(1, 0.0);
  vars_.assign(1, 0.0);
  min_cum_.assign(1, 0);
  max_cum_.assign(1, 0);
  for (std::size_t i = 0; i < laws_.size(); ++i) {
    const auto& law = laws_[i];
    if (!law.lattice()) {
      throw Error(ErrorCode::InvalidArgument, "step " + std::to_string(i + 1) + " is not a lattice law");
    }
    LatticeStep s;
    for (double a : law.atoms()) s.atoms.push_back(static_cast<std::int64_t>(a));
    s.probs = law.probs();
    means_.push_back(means_.back() + mean(law));
    vars_.push_back(vars_.back() + variance(law));
    min_cum_.push_back(min_cum_.back() + s.min_atom());
    max_cum_.push_back(max_cum_.back() + s.max_atom());
    steps_.push_back(std::move(s));
  }
}

StepSchedule StepSchedule::homogeneous(const IncrementLaw& law, std::size_t n) {
  return StepSchedule(std::vector<IncrementLaw>(n, law));
}

StepSchedule StepSchedule::slice(std::size_t from, std::size_t to) const {
  if (from >= to || to > length()) throw Error(ErrorCode::InvalidArgument, "bad slice bounds");
  return StepSchedule(std::vector<IncrementLaw>(laws_.begin() + static_cast<std::ptrdiff_t>(from),
                                                laws_.begin() + static_cast<std::ptrdiff_t>(to)));
}

StepSchedule StepSchedule::tilted(double lambda) const {
  std::vector<IncrementLaw> out;
  out.reserve(laws_.size());
  for (const auto& l : laws_) out.push_back(tilt(l, lambda));
  return StepSchedule(std::move(out));
}

double StepSchedule::max_central_abs_moment(double p) const {
  double m = 0.0;
  for (const auto& l : laws_) m = std::max(m, central_abs_moment(l, p));
  return m;
}

double solve_tilt_for_mean(const StepSchedule& schedule, double target, double tol) {
  return solve_tilt_for_mean(schedule.laws(), target, tol);
}

}  // namespace inhomwalk
