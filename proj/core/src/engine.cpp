#include "inhomwalk/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace inhomwalk {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kBruteForceLimit = 1e8;
constexpr double kCapSlack = 1e-9;

void rescale_if_small(PositionDistribution& d) {
  double peak = 0.0;
  for (double m : d.mass) peak = std::max(peak, m);
  if (peak > 0.0 && peak < kRescaleThreshold) d.normalize_peak();
}

void apply_set(PositionDistribution& d, const std::vector<std::int64_t>* set) {
  if (!set) return;
  for (std::size_t i = 0; i < d.mass.size(); ++i) {
    const std::int64_t x = d.offset + static_cast<std::int64_t>(i);
    if (!std::binary_search(set->begin(), set->end(), x)) d.mass[i] = 0.0;
  }
}

// Convolution with one step, restricted to `cells`.
PositionDistribution step_forward(const PositionDistribution& in, const LatticeStep& step, CellRange cells,
                                  const std::vector<std::int64_t>* set) {
  PositionDistribution out;
  out.log_scale = in.log_scale;
  if (in.mass.empty()) return out;
  const std::int64_t lo = std::max(in.lo() + step.min_atom(), cells.first);
  const std::int64_t hi = std::min(in.hi() + step.max_atom(), cells.last);
  if (lo > hi) return out;
  out.offset = lo;
  out.mass.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
  const std::int64_t in_size = static_cast<std::int64_t>(in.mass.size());
  const std::int64_t out_size = static_cast<std::int64_t>(out.mass.size());
  for (std::size_t a = 0; a < step.atoms.size(); ++a) {
    const std::int64_t shift = in.offset + step.atoms[a] - lo;  // out index = in index + shift
    const std::int64_t i0 = std::max<std::int64_t>(0, -shift);
    const std::int64_t i1 = std::min<std::int64_t>(in_size, out_size - shift);
    const double p = step.probs[a];
    const double* src = in.mass.data();
    double* dst = out.mass.data() + shift;
    for (std::int64_t i = i0; i < i1; ++i) dst[i] += p * src[i];
  }
  apply_set(out, set);
  out.trim();
  rescale_if_small(out);
  return out;
}

// h_{j-1}(x) = sum_d p(d) h_j(x + d) over x in `cells`.
PositionDistribution step_backward(const PositionDistribution& h, const LatticeStep& step, CellRange cells,
                                   const std::vector<std::int64_t>* set) {
  PositionDistribution out;
  out.log_scale = h.log_scale;
  if (h.mass.empty()) return out;
  const std::int64_t lo = std::max(h.lo() - step.max_atom(), cells.first);
  const std::int64_t hi = std::min(h.hi() - step.min_atom(), cells.last);
  if (lo > hi) return out;
  out.offset = lo;
  out.mass.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
  const std::int64_t h_size = static_cast<std::int64_t>(h.mass.size());
  const std::int64_t out_size = static_cast<std::int64_t>(out.mass.size());
  for (std::size_t a = 0; a < step.atoms.size(); ++a) {
    // out index i reads h index i + shift
    const std::int64_t shift = lo + step.atoms[a] - h.offset;
    const std::int64_t i0 = std::max<std::int64_t>(0, -shift);
    const std::int64_t i1 = std::min<std::int64_t>(out_size, h_size - shift);
    const double p = step.probs[a];
    const double* src = h.mass.data() + shift;
    double* dst = out.mass.data();
    for (std::int64_t i = i0; i < i1; ++i) dst[i] += p * src[i];
  }
  apply_set(out, set);
  out.trim();
  rescale_if_small(out);
  return out;
}

// dst += exp(log_weight) * src, aligning windows and scales.
void add_scaled(PositionDistribution& dst, const PositionDistribution& src, double log_weight) {
  if (src.empty() || log_weight == kNegInf) return;
  const double src_log = src.log_scale + log_weight;
  if (dst.mass.empty()) {
    dst = src;
    dst.log_scale = src_log;
    return;
  }
  const std::int64_t lo = std::min(dst.lo(), src.lo());
  const std::int64_t hi = std::max(dst.hi(), src.hi());
  const double ref = std::max(dst.log_scale, src_log);
  std::vector<double> mass(static_cast<std::size_t>(hi - lo + 1), 0.0);
  const double fd = std::exp(dst.log_scale - ref);
  const double fs = std::exp(src_log - ref);
  for (std::size_t i = 0; i < dst.mass.size(); ++i) mass[static_cast<std::size_t>(dst.offset - lo) + i] += fd * dst.mass[i];
  for (std::size_t i = 0; i < src.mass.size(); ++i) mass[static_cast<std::size_t>(src.offset - lo) + i] += fs * src.mass[i];
  dst.offset = lo;
  dst.mass = std::move(mass);
  dst.log_scale = ref;
}

void require_no_caps(const PathConstraint& c, const char* where) {
  if (c.has_increment_caps()) {
    throw Error(ErrorCode::InvalidArgument, std::string(where) + " does not support increment caps; use event_prob");
  }
}

void require_horizon(const StepSchedule& s, const PathConstraint& c) {
  if (c.horizon() != s.length()) {
    throw Error(ErrorCode::InvalidArgument, "constraint horizon " + std::to_string(c.horizon()) +
                                                " differs from schedule length " + std::to_string(s.length()));
  }
}

void require_feasible(const PathConstraint& c) {
  for (std::size_t i = 0; i <= c.horizon(); ++i) {
    if (c.cells_at(i).empty()) {
      throw Error(ErrorCode::InfeasibleConstraint, "no lattice cell admitted at time " + std::to_string(i));
    }
  }
}

PositionDistribution run_forward(PositionDistribution dist, const StepSchedule& schedule,
                                 const PathConstraint& constraint, std::size_t from, std::size_t to) {
  for (std::size_t i = from + 1; i <= to; ++i) {
    dist = step_forward(dist, schedule.step(i), constraint.cells_at(i), constraint.set_at(i));
    if (dist.mass.empty()) break;
  }
  return dist;
}

// Positions at the final time with checkpoints carrying increment caps,
// chaining one forward pass per start value between checkpoints.
PositionDistribution run_chained(std::int64_t u, const StepSchedule& schedule, const PathConstraint& constraint) {
  PositionDistribution cur = PositionDistribution::point(u);
  std::size_t prev = 0;
  for (const Checkpoint& cp : constraint.checkpoints()) {
    if (!cp.inc_cap) {
      cur = run_forward(std::move(cur), schedule, constraint, prev, cp.time);
    } else {
      PositionDistribution next;
      for (std::size_t i = 0; i < cur.mass.size(); ++i) {
        if (cur.mass[i] <= 0.0) continue;
        const std::int64_t x = cur.offset + static_cast<std::int64_t>(i);
        PositionDistribution row = run_forward(PositionDistribution::point(x), schedule, constraint, prev, cp.time);
        for (std::size_t j = 0; j < row.mass.size(); ++j) {
          const std::int64_t y = row.offset + static_cast<std::int64_t>(j);
          if (std::abs(static_cast<double>(y - x) - cp.inc_shift) > *cp.inc_cap + kCapSlack) row.mass[j] = 0.0;
        }
        row.trim();
        add_scaled(next, row, cur.log_scale + std::log(cur.mass[i]));
      }
      next.trim();
      if (!next.mass.empty()) next.normalize_peak();
      cur = std::move(next);
    }
    prev = cp.time;
    if (cur.mass.empty()) return cur;
  }
  return run_forward(std::move(cur), schedule, constraint, prev, schedule.length());
}

PositionDistribution final_positions(std::int64_t u, const StepSchedule& schedule, const PathConstraint& constraint) {
  require_horizon(schedule, constraint);
  require_feasible(constraint);
  if (!constraint.admits(0, u)) {
    throw Error(ErrorCode::InfeasibleConstraint, "start " + std::to_string(u) + " violates the band at time 0");
  }
  if (constraint.has_increment_caps()) return run_chained(u, schedule, constraint);
  return run_forward(PositionDistribution::point(u), schedule, constraint, 0, schedule.length());
}

}  // namespace

PositionDistribution PositionDistribution::point(std::int64_t x) {
  PositionDistribution d;
  d.offset = x;
  d.mass = {1.0};
  return d;
}

bool PositionDistribution::empty() const {
  return std::none_of(mass.begin(), mass.end(), [](double m) { return m > 0.0; });
}

double PositionDistribution::at(std::int64_t x) const {
  if (x < lo() || x > hi() || mass.empty()) return 0.0;
  const double m = mass[static_cast<std::size_t>(x - offset)];
  return m > 0.0 ? m * std::exp(log_scale) : 0.0;
}

double PositionDistribution::log_at(std::int64_t x) const {
  if (x < lo() || x > hi() || mass.empty()) return kNegInf;
  const double m = mass[static_cast<std::size_t>(x - offset)];
  return m > 0.0 ? std::log(m) + log_scale : kNegInf;
}

double PositionDistribution::total() const {
  double s = 0.0;
  for (double m : mass) s += m;
  return s > 0.0 ? s * std::exp(log_scale) : 0.0;
}

double PositionDistribution::log_total() const {
  double s = 0.0;
  for (double m : mass) s += m;
  return s > 0.0 ? std::log(s) + log_scale : kNegInf;
}

void PositionDistribution::normalize_peak() {
  double peak = 0.0;
  for (double m : mass) peak = std::max(peak, m);
  if (!(peak > 0.0)) return;
  for (double& m : mass) m /= peak;
  log_scale += std::log(peak);
}

void PositionDistribution::trim() {
  std::size_t first = 0;
  while (first < mass.size() && !(mass[first] > 0.0)) ++first;
  if (first == mass.size()) {
    mass.clear();
    return;
  }
  std::size_t last = mass.size() - 1;
  while (!(mass[last] > 0.0)) --last;
  if (first > 0 || last + 1 < mass.size()) {
    mass = std::vector<double>(mass.begin() + static_cast<std::ptrdiff_t>(first),
                               mass.begin() + static_cast<std::ptrdiff_t>(last) + 1);
    offset += static_cast<std::int64_t>(first);
  }
}

PositionDistribution propagate(const PositionDistribution& dist, const IncrementLaw& law,
                               const std::optional<Band>& band, bool strict) {
  if (!law.lattice()) throw Error(ErrorCode::InvalidArgument, "propagate needs a lattice law");
  LatticeStep step;
  for (double a : law.atoms()) step.atoms.push_back(static_cast<std::int64_t>(a));
  step.probs = law.probs();
  const CellRange cells = band ? cells_of(*band, strict) : CellRange{};
  return step_forward(dist, step, cells, nullptr);
}

PositionDistribution forward(std::int64_t u, const StepSchedule& schedule, const PathConstraint& constraint,
                             std::size_t k) {
  return forward_marginals(u, schedule, constraint, {k}).front();
}

std::vector<PositionDistribution> forward_marginals(std::int64_t u, const StepSchedule& schedule,
                                                    const PathConstraint& constraint,
                                                    const std::vector<std::size_t>& times) {
  require_horizon(schedule, constraint);
  require_no_caps(constraint, "forward");
  std::vector<PositionDistribution> out;
  PositionDistribution dist = PositionDistribution::point(u);
  if (!constraint.admits(0, u)) dist.mass.clear();
  std::size_t t = 0;
  for (std::size_t k : times) {
    if (k < t || k > schedule.length()) throw Error(ErrorCode::InvalidArgument, "times must be increasing within 0..n");
    dist = run_forward(std::move(dist), schedule, constraint, t, k);
    t = k;
    out.push_back(dist);
  }
  return out;
}

PositionDistribution backward(const StepSchedule& schedule, const PathConstraint& constraint, std::size_t k,
                              std::int64_t x_lo, std::int64_t x_hi) {
  require_horizon(schedule, constraint);
  require_no_caps(constraint, "backward");
  const std::size_t n = schedule.length();
  if (k > n) throw Error(ErrorCode::InvalidArgument, "backward time beyond horizon");
  auto window = [&](std::size_t j) {
    CellRange w{x_lo + schedule.min_reach(k, j), x_hi + schedule.max_reach(k, j)};
    if (const auto& v = constraint.endpoint()) {
      w = w.intersect({*v - schedule.max_reach(j, n), *v - schedule.min_reach(j, n)});
    }
    if (j > k) w = w.intersect(constraint.cells_at(j));
    return w;
  };
  PositionDistribution h;
  CellRange wn = window(n);
  if (!wn.empty() && k < n) {
    h.offset = wn.first;
    h.mass.assign(static_cast<std::size_t>(wn.last - wn.first + 1), 1.0);
    apply_set(h, constraint.set_at(n));
    if (const auto& v = constraint.endpoint()) {
      for (std::size_t i = 0; i < h.mass.size(); ++i) {
        if (h.offset + static_cast<std::int64_t>(i) != *v) h.mass[i] = 0.0;
      }
    }
    h.trim();
  } else if (!wn.empty()) {
    // k == n: weights are just the endpoint indicator.
    h.offset = wn.first;
    h.mass.assign(static_cast<std::size_t>(wn.last - wn.first + 1), 1.0);
    if (const auto& v = constraint.endpoint()) {
      for (std::size_t i = 0; i < h.mass.size(); ++i) {
        if (h.offset + static_cast<std::int64_t>(i) != *v) h.mass[i] = 0.0;
      }
    }
    h.trim();
    return h;
  }
  for (std::size_t j = n; j > k && !h.mass.empty(); --j) {
    h = step_backward(h, schedule.step(j), window(j - 1), j - 1 > k ? constraint.set_at(j - 1) : nullptr);
  }
  return h;
}

PositionDistribution event_prob_all_starts(const StepSchedule& schedule, const PathConstraint& constraint,
                                           std::int64_t u_lo, std::int64_t u_hi) {
  require_feasible(constraint);
  PositionDistribution h = backward(schedule, constraint, 0, u_lo, u_hi);
  for (std::size_t i = 0; i < h.mass.size(); ++i) {
    if (!constraint.admits(0, h.offset + static_cast<std::int64_t>(i))) h.mass[i] = 0.0;
  }
  h.trim();
  return h;
}

double event_prob(std::int64_t u, const StepSchedule& schedule, const PathConstraint& constraint) {
  const PositionDistribution d = final_positions(u, schedule, constraint);
  if (const auto& v = constraint.endpoint()) return d.at(*v);
  return d.total();
}

double event_log_prob(std::int64_t u, const StepSchedule& schedule, const PathConstraint& constraint) {
  const PositionDistribution d = final_positions(u, schedule, constraint);
  if (const auto& v = constraint.endpoint()) return d.log_at(*v);
  return d.log_total();
}

double exit_event_prob(std::int64_t u, const StepSchedule& schedule, const PathConstraint& constraint) {
  require_horizon(schedule, constraint);
  require_no_caps(constraint, "exit_event_prob");
  PositionDistribution inside = PositionDistribution::point(u);
  PositionDistribution exited;
  if (!constraint.admits(0, u)) {
    throw Error(ErrorCode::InfeasibleConstraint, "start violates the band at time 0");
  }
  for (std::size_t i = 1; i <= schedule.length(); ++i) {
    const LatticeStep& step = schedule.step(i);
    PositionDistribution all = step_forward(inside, step, CellRange{}, nullptr);
    exited = step_forward(exited, step, CellRange{}, nullptr);
    PositionDistribution out = all;
    for (std::size_t c = 0; c < all.mass.size(); ++c) {
      const bool ok = constraint.admits(i, all.offset + static_cast<std::int64_t>(c));
      (ok ? out.mass[c] : all.mass[c]) = 0.0;
    }
    out.trim();
    all.trim();
    add_scaled(exited, out, 0.0);
    inside = std::move(all);
    if (!exited.mass.empty()) rescale_if_small(exited);
  }
  if (const auto& v = constraint.endpoint()) return exited.at(*v);
  return exited.total();
}

PositionDistribution conditional_marginal(std::int64_t u, const StepSchedule& schedule,
                                          const PathConstraint& constraint, std::size_t k) {
  PositionDistribution fwd = forward(u, schedule, constraint, k);
  if (fwd.mass.empty()) throw Error(ErrorCode::ZeroProbabilityEvent, "event has probability 0");
  PositionDistribution bwd = backward(schedule, constraint, k, fwd.lo(), fwd.hi());
  fwd.normalize_peak();
  bwd.normalize_peak();
  PositionDistribution out;
  out.offset = fwd.offset;
  out.mass.assign(fwd.mass.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < fwd.mass.size(); ++i) {
    const std::int64_t x = fwd.offset + static_cast<std::int64_t>(i);
    if (x < bwd.lo() || x > bwd.hi()) continue;
    out.mass[i] = fwd.mass[i] * bwd.mass[static_cast<std::size_t>(x - bwd.offset)];
    total += out.mass[i];
  }
  if (!(total > 0.0)) throw Error(ErrorCode::ZeroProbabilityEvent, "event has probability 0");
  for (double& m : out.mass) m /= total;
  out.trim();
  return out;
}

double forward_backward(std::int64_t u, const StepSchedule& schedule, const PathConstraint& constraint,
                        std::size_t k, const std::function<double(std::int64_t)>& f) {
  const PositionDistribution cond = conditional_marginal(u, schedule, constraint, k);
  double s = 0.0;
  for (std::size_t i = 0; i < cond.mass.size(); ++i) {
    if (cond.mass[i] > 0.0) s += f(cond.offset + static_cast<std::int64_t>(i)) * cond.mass[i];
  }
  return s;
}

Eigen::MatrixXd block_kernel(const StepSchedule& schedule, std::size_t from, std::size_t to,
                             const PathConstraint& constraint, std::int64_t x_lo, std::int64_t x_hi,
                             std::int64_t y_lo, std::int64_t y_hi) {
  require_horizon(schedule, constraint);
  if (from >= to || to > schedule.length()) throw Error(ErrorCode::InvalidArgument, "bad block bounds");
  if (x_lo > x_hi || y_lo > y_hi) throw Error(ErrorCode::InvalidArgument, "empty kernel range");
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(x_hi - x_lo + 1, y_hi - y_lo + 1);
  for (std::int64_t x = x_lo; x <= x_hi; ++x) {
    const PositionDistribution row = run_forward(PositionDistribution::point(x), schedule, constraint, from, to);
    for (std::int64_t y = std::max(y_lo, row.lo()); y <= std::min(y_hi, row.hi()); ++y) {
      k(x - x_lo, y - y_lo) = row.at(y);
    }
  }
  return k;
}

namespace {

struct BruteForce {
  const StepSchedule& schedule;
  const PathConstraint& constraint;
  std::vector<std::int64_t> path;
  std::vector<std::size_t> prev_checkpoint;  // time -> previous checkpoint time

  long double run(std::size_t i, long double weight) {
    const std::size_t n = schedule.length();
    if (i == n) {
      if (const auto& v = constraint.endpoint(); v && path[n] != *v) return 0.0L;
      return weight;
    }
    const LatticeStep& step = schedule.step(i + 1);
    long double sum = 0.0L;
    for (std::size_t a = 0; a < step.atoms.size(); ++a) {
      const std::int64_t y = path[i] + step.atoms[a];
      if (!constraint.admits(i + 1, y)) continue;
      if (const Checkpoint* cp = constraint.checkpoint_at(i + 1); cp && cp->inc_cap) {
        const std::int64_t base = path[prev_checkpoint[i + 1]];
        if (std::abs(static_cast<double>(y - base) - cp->inc_shift) > *cp->inc_cap + kCapSlack) continue;
      }
      path[i + 1] = y;
      sum += run(i + 1, weight * static_cast<long double>(step.probs[a]));
    }
    return sum;
  }
};

}  // namespace

double brute_force_prob(std::int64_t u, const StepSchedule& schedule, const PathConstraint& constraint) {
  require_horizon(schedule, constraint);
  double count = 1.0;
  for (std::size_t i = 1; i <= schedule.length(); ++i) {
    count *= static_cast<double>(schedule.step(i).atoms.size());
    if (count > kBruteForceLimit) throw Error(ErrorCode::TooLarge, "more than 1e8 paths");
  }
  if (!constraint.admits(0, u)) return 0.0;
  BruteForce bf{schedule, constraint, std::vector<std::int64_t>(schedule.length() + 1, 0), {}};
  bf.path[0] = u;
  bf.prev_checkpoint.assign(schedule.length() + 1, 0);
  std::size_t last = 0;
  for (std::size_t t = 1; t <= schedule.length(); ++t) {
    bf.prev_checkpoint[t] = last;
    if (constraint.checkpoint_at(t)) last = t;
  }
  return static_cast<double>(bf.run(0, 1.0L));
}

namespace {

long double binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0.0L;
  if (n <= 64) {
    // Exact Pascal row in 128-bit integers.
    std::vector<unsigned __int128> row(static_cast<std::size_t>(n) + 1, 0);
    row[0] = 1;
    for (std::int64_t i = 1; i <= n; ++i) {
      for (std::int64_t j = i; j >= 1; --j) row[static_cast<std::size_t>(j)] += row[static_cast<std::size_t>(j - 1)];
    }
    return static_cast<long double>(row[static_cast<std::size_t>(k)]);
  }
  return std::exp(std::lgamma(static_cast<long double>(n) + 1) - std::lgamma(static_cast<long double>(k) + 1) -
                  std::lgamma(static_cast<long double>(n - k) + 1));
}

}  // namespace

double reflection_oracle(std::int64_t u, std::int64_t v, std::int64_t n) {
  if (u < 0 || v < 0 || n < 0) throw Error(ErrorCode::InvalidArgument, "u, v, n must be >= 0");
  if ((n + v - u) % 2 != 0) throw Error(ErrorCode::ParityViolation, "n + v - u must be even");
  const std::int64_t up = (n + v - u) / 2;
  const std::int64_t up_reflected = (n + v + u + 2) / 2;
  const long double paths = binomial(n, up) - binomial(n, up_reflected);
  return static_cast<double>(std::ldexp(paths, -static_cast<int>(n)));
}

}  // namespace inhomwalk
