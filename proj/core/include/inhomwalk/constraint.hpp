#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "inhomwalk/schedule.hpp"

namespace inhomwalk {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Closed interval [lo, hi] on real edges; either side may be made strict.
// Edges are compared with a 1e-9 slack so that m_i + c computed in floating
// point still admits the lattice point it denotes.
struct Band {
  double lo = -kInf;
  double hi = kInf;
  bool lo_strict = false;
  bool hi_strict = false;

  friend bool operator==(const Band&, const Band&) = default;
};

// Integer cells admitted by a band: [first, last], empty when first > last.
struct CellRange {
  std::int64_t first = std::numeric_limits<std::int64_t>::min() / 4;
  std::int64_t last = std::numeric_limits<std::int64_t>::max() / 4;
  bool empty() const { return first > last; }
  bool contains(std::int64_t x) const { return x >= first && x <= last; }
  CellRange intersect(const CellRange& o) const {
    return {std::max(first, o.first), std::min(last, o.last)};
  }
};

CellRange cells_of(const Band& band, bool strict_floor);
bool band_admits(const Band& band, bool strict_floor, std::int64_t x);

struct Checkpoint {
  std::size_t time = 0;
  // Allowed values of S_time: an explicit set, an interval, or neither.
  std::optional<std::vector<std::int64_t>> set;
  std::optional<Band> interval;
  // |S_time - S_previous_checkpoint - inc_shift| <= inc_cap (previous is time 0
  // for the first). A shift of m_time - m_previous caps the centered increment.
  std::optional<double> inc_cap;
  double inc_shift = 0.0;
};

// Per-step bands, checkpoints and an optional pinned endpoint; encodes every
// path event used by the verifiers. bands[i] constrains S_i for i = 0..n.
class PathConstraint {
 public:
  PathConstraint() = default;
  // bands may have length n (steps 1..n) or n+1 (including S_0), or be empty.
  PathConstraint(std::size_t n, std::vector<std::optional<Band>> bands, bool strict_floor,
                 std::vector<Checkpoint> checkpoints, std::optional<std::int64_t> endpoint);

  static PathConstraint none(std::size_t n);
  // S_i >= level (strict: S_i > level) for i = 1..n.
  static PathConstraint floor(std::size_t n, double level = 0.0, bool strict = false);

  std::size_t horizon() const noexcept { return n_; }
  bool strict_floor() const noexcept { return strict_floor_; }
  const std::vector<std::optional<Band>>& bands() const noexcept { return bands_; }
  const std::vector<Checkpoint>& checkpoints() const noexcept { return checkpoints_; }
  const std::optional<std::int64_t>& endpoint() const noexcept { return endpoint_; }
  bool has_increment_caps() const;

  // Cells allowed at time i by the band and any checkpoint interval at i.
  CellRange cells_at(std::size_t i) const;
  // Explicit checkpoint set at time i, if any (sorted, unique).
  const std::vector<std::int64_t>* set_at(std::size_t i) const;
  const Checkpoint* checkpoint_at(std::size_t i) const;
  // Band and checkpoint membership of x at time i (ignores increment caps and the endpoint).
  bool admits(std::size_t i, std::int64_t x) const;

  PathConstraint with_endpoint(std::optional<std::int64_t> v) const;
  PathConstraint with_band(std::size_t i, std::optional<Band> band) const;

  // Throws InvalidArgument for non-finite edges where finite edges are
  // required, or checkpoints outside 1..n or not strictly increasing.
  void validate() const;

 private:
  std::size_t n_ = 0;
  std::vector<std::optional<Band>> bands_;  // size n+1
  bool strict_floor_ = false;
  std::vector<Checkpoint> checkpoints_;
  std::optional<std::int64_t> endpoint_;
  std::vector<int> checkpoint_index_;  // time -> checkpoint index or -1
  void index_checkpoints();
};

// Builders for events on the centered walk Sbar_i = S_i - m_i.
// Band [m_i + lo_c(i), m_i + hi_c(i)] for every step where the centered band is given.
PathConstraint centered_bands(const StepSchedule& schedule, std::span<const std::optional<Band>> centered,
                              bool strict_floor = false);

// Lattice endpoint S_n = y closest to the centered target v (Sbar_n = v);
// effective_v is y - m_n.
struct LatticeEndpoint {
  std::int64_t y = 0;
  double effective_v = 0.0;
};
LatticeEndpoint lattice_endpoint(const StepSchedule& schedule, double centered_v);

}  // namespace inhomwalk
