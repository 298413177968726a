#include "inhomwalk/constraint.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace inhomwalk {

namespace {

constexpr double kEdgeSlack = 1e-9;
constexpr double kCellClamp = 4e18;

std::int64_t clamp_cell(double v) {
  if (v > kCellClamp) return static_cast<std::int64_t>(kCellClamp);
  if (v < -kCellClamp) return -static_cast<std::int64_t>(kCellClamp);
  return static_cast<std::int64_t>(v);
}

}  // namespace

CellRange cells_of(const Band& band, bool strict_floor) {
  CellRange r;
  if (band.lo > -kInf) {
    const bool strict = band.lo_strict || strict_floor;
    r.first = strict ? clamp_cell(std::floor(band.lo + kEdgeSlack)) + 1 : clamp_cell(std::ceil(band.lo - kEdgeSlack));
  }
  if (band.hi < kInf) {
    r.last = band.hi_strict ? clamp_cell(std::ceil(band.hi - kEdgeSlack)) - 1 : clamp_cell(std::floor(band.hi + kEdgeSlack));
  }
  return r;
}

bool band_admits(const Band& band, bool strict_floor, std::int64_t x) {
  return cells_of(band, strict_floor).contains(x);
}

PathConstraint::PathConstraint(std::size_t n, std::vector<std::optional<Band>> bands, bool strict_floor,
                               std::vector<Checkpoint> checkpoints, std::optional<std::int64_t> endpoint)
    : n_(n), strict_floor_(strict_floor), checkpoints_(std::move(checkpoints)), endpoint_(endpoint) {
  if (bands.empty()) {
    bands_.assign(n + 1, std::nullopt);
  } else if (bands.size() == n) {
    bands_.reserve(n + 1);
    bands_.push_back(std::nullopt);
    for (auto& b : bands) bands_.push_back(b);
  } else if (bands.size() == n + 1) {
    bands_ = std::move(bands);
  } else {
    throw Error(ErrorCode::InvalidArgument, "band count " + std::to_string(bands.size()) +
                                                " must be 0, n or n+1 for n = " + std::to_string(n));
  }
  for (auto& c : checkpoints_) {
    if (c.set) {
      std::sort(c.set->begin(), c.set->end());
      c.set->erase(std::unique(c.set->begin(), c.set->end()), c.set->end());
    }
  }
  validate();
  index_checkpoints();
}

void PathConstraint::index_checkpoints() {
  checkpoint_index_.assign(n_ + 1, -1);
  for (std::size_t j = 0; j < checkpoints_.size(); ++j) checkpoint_index_[checkpoints_[j].time] = static_cast<int>(j);
}

PathConstraint PathConstraint::none(std::size_t n) { return PathConstraint(n, {}, false, {}, std::nullopt); }

PathConstraint PathConstraint::floor(std::size_t n, double level, bool strict) {
  std::vector<std::optional<Band>> bands(n, Band{level, kInf});
  return PathConstraint(n, std::move(bands), strict, {}, std::nullopt);
}

bool PathConstraint::has_increment_caps() const {
  return std::any_of(checkpoints_.begin(), checkpoints_.end(), [](const Checkpoint& c) { return c.inc_cap.has_value(); });
}

const Checkpoint* PathConstraint::checkpoint_at(std::size_t i) const {
  if (i >= checkpoint_index_.size() || checkpoint_index_[i] < 0) return nullptr;
  return &checkpoints_[static_cast<std::size_t>(checkpoint_index_[i])];
}

CellRange PathConstraint::cells_at(std::size_t i) const {
  CellRange r;
  if (i < bands_.size() && bands_[i]) r = cells_of(*bands_[i], strict_floor_);
  if (const Checkpoint* c = checkpoint_at(i)) {
    if (c->interval) r = r.intersect(cells_of(*c->interval, false));
    if (c->set) {
      if (c->set->empty()) return {1, 0};
      r = r.intersect({c->set->front(), c->set->back()});
    }
  }
  return r;
}

const std::vector<std::int64_t>* PathConstraint::set_at(std::size_t i) const {
  const Checkpoint* c = checkpoint_at(i);
  return c && c->set ? &*c->set : nullptr;
}

bool PathConstraint::admits(std::size_t i, std::int64_t x) const {
  if (!cells_at(i).contains(x)) return false;
  if (const auto* s = set_at(i)) return std::binary_search(s->begin(), s->end(), x);
  return true;
}

PathConstraint PathConstraint::with_endpoint(std::optional<std::int64_t> v) const {
  PathConstraint out = *this;
  out.endpoint_ = v;
  return out;
}

PathConstraint PathConstraint::with_band(std::size_t i, std::optional<Band> band) const {
  if (i > n_) throw Error(ErrorCode::InvalidArgument, "band index beyond horizon");
  PathConstraint out = *this;
  out.bands_[i] = band;
  return out;
}

void PathConstraint::validate() const {
  for (std::size_t i = 0; i < bands_.size(); ++i) {
    if (!bands_[i]) continue;
    const Band& b = *bands_[i];
    if (std::isnan(b.lo) || std::isnan(b.hi) || b.lo == kInf || b.hi == -kInf) {
      throw Error(ErrorCode::InvalidArgument, "band at step " + std::to_string(i) + " has an invalid edge");
    }
  }
  std::size_t prev = 0;
  for (const auto& c : checkpoints_) {
    if (c.time < 1 || c.time > n_ || c.time <= prev) {
      throw Error(ErrorCode::InvalidArgument, "checkpoint times must be strictly increasing within 1..n");
    }
    if (c.inc_cap && !(*c.inc_cap >= 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "increment cap must be >= 0");
    }
    prev = c.time;
  }
}

PathConstraint centered_bands(const StepSchedule& schedule, std::span<const std::optional<Band>> centered,
                              bool strict_floor) {
  const std::size_t n = schedule.length();
  if (centered.size() != n && centered.size() != n + 1) {
    throw Error(ErrorCode::InvalidArgument, "centered band count must be n or n+1");
  }
  const std::size_t shift = centered.size() == n ? 1 : 0;
  std::vector<std::optional<Band>> bands(n + 1);
  for (std::size_t j = 0; j < centered.size(); ++j) {
    if (!centered[j]) continue;
    const std::size_t i = j + shift;
    Band b = *centered[j];
    const double m = schedule.partial_mean(i);
    b.lo += m;
    b.hi += m;
    bands[i] = b;
  }
  return PathConstraint(n, std::move(bands), strict_floor, {}, std::nullopt);
}

LatticeEndpoint lattice_endpoint(const StepSchedule& schedule, double centered_v) {
  const double m = schedule.partial_mean(schedule.length());
  LatticeEndpoint e;
  e.y = static_cast<std::int64_t>(std::llround(centered_v + m));
  e.effective_v = static_cast<double>(e.y) - m;
  return e;
}

}  // namespace inhomwalk
