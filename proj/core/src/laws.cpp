#include "inhomwalk/laws.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

namespace inhomwalk {

namespace {

constexpr double kCenteringTol = 1e-12;

bool is_integral(double v) { return std::isfinite(v) && std::floor(v) == v; }

std::int64_t gcd_of(const std::vector<std::int64_t>& values) {
  std::int64_t g = 0;
  for (std::int64_t v : values) g = std::gcd(g, v < 0 ? -v : v);
  return g;
}

Periodicity periodicity_of_support(const std::vector<std::int64_t>& support) {
  Periodicity out;
  if (support.empty()) return out;
  bool has_pos = false;
  bool has_neg = false;
  for (auto a : support) {
    has_pos |= a > 0;
    has_neg |= a < 0;
  }
  out.irreducible = has_pos && has_neg && gcd_of(support) == 1;
  std::vector<std::int64_t> diffs;
  for (std::size_t i = 1; i < support.size(); ++i) diffs.push_back(support[i] - support[0]);
  out.aperiodic = !diffs.empty() && gcd_of(diffs) == 1;
  return out;
}

// Weights p_a e^{z a - shift} with shift = max_a z a.
struct TiltedSums {
  double shift = 0.0;
  double total = 0.0;
  std::vector<double> weights;
};

TiltedSums tilted_weights(const IncrementLaw& law, double z) {
  TiltedSums out;
  const auto& atoms = law.atoms();
  const auto& probs = law.probs();
  out.shift = -std::numeric_limits<double>::infinity();
  for (double a : atoms) out.shift = std::max(out.shift, z * a);
  out.weights.resize(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    out.weights[i] = probs[i] * std::exp(z * atoms[i] - out.shift);
    out.total += out.weights[i];
  }
  return out;
}

}  // namespace

IncrementLaw IncrementLaw::from_weights(std::span<const double> atoms, std::span<const double> weights,
                                        bool lattice) {
  if (atoms.size() != weights.size()) {
    throw Error(ErrorCode::InvalidArgument, "atoms and weights differ in length");
  }
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!std::isfinite(atoms[i]) || !std::isfinite(weights[i])) {
      throw Error(ErrorCode::NonFiniteInput, "atom or weight at index " + std::to_string(i));
    }
    if (weights[i] < 0.0) {
      throw Error(ErrorCode::NegativeWeight, "weight at index " + std::to_string(i));
    }
    if (lattice && !is_integral(atoms[i])) {
      throw Error(ErrorCode::NonIntegerAtomOnLattice, "atom " + std::to_string(atoms[i]));
    }
    pairs.emplace_back(atoms[i], weights[i]);
  }
  std::sort(pairs.begin(), pairs.end());
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    if (pairs[i].first == pairs[i - 1].first) {
      throw Error(ErrorCode::DuplicateAtom, "atom " + std::to_string(pairs[i].first));
    }
  }
  double total = 0.0;
  for (const auto& [a, w] : pairs) total += w;
  if (!(total > 0.0)) throw Error(ErrorCode::EmptySupport, "no positive weight");

  std::vector<double> out_atoms;
  std::vector<double> out_probs;
  for (const auto& [a, w] : pairs) {
    if (w > 0.0) {
      out_atoms.push_back(a);
      out_probs.push_back(w / total);
    }
  }
  return IncrementLaw(std::move(out_atoms), std::move(out_probs), lattice);
}

double IncrementLaw::prob_at(double atom) const {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), atom);
  if (it == atoms_.end() || *it != atom) return 0.0;
  return probs_[static_cast<std::size_t>(it - atoms_.begin())];
}

IncrementLaw lazy_walk() {
  const double atoms[] = {-1.0, 0.0, 1.0};
  const double weights[] = {1.0, 2.0, 1.0};
  return IncrementLaw::from_weights(atoms, weights, true);
}

IncrementLaw simple_walk() {
  const double atoms[] = {-1.0, 1.0};
  const double weights[] = {1.0, 1.0};
  return IncrementLaw::from_weights(atoms, weights, true);
}

double mean(const IncrementLaw& law) {
  double m = 0.0;
  for (std::size_t i = 0; i < law.size(); ++i) m += law.atoms()[i] * law.probs()[i];
  return m;
}

double variance(const IncrementLaw& law) {
  const double m = mean(law);
  double v = 0.0;
  for (std::size_t i = 0; i < law.size(); ++i) {
    const double d = law.atoms()[i] - m;
    v += d * d * law.probs()[i];
  }
  return v;
}

double abs_moment(const IncrementLaw& law, double p) {
  if (!(p >= 0.0)) throw Error(ErrorCode::InvalidArgument, "moment order must be >= 0");
  double s = 0.0;
  for (std::size_t i = 0; i < law.size(); ++i) s += std::pow(std::abs(law.atoms()[i]), p) * law.probs()[i];
  return s;
}

double raw_moment(const IncrementLaw& law, int p) {
  if (p < 0) throw Error(ErrorCode::InvalidArgument, "moment order must be >= 0");
  double s = 0.0;
  for (std::size_t i = 0; i < law.size(); ++i) s += std::pow(law.atoms()[i], p) * law.probs()[i];
  return s;
}

double positive_part(const IncrementLaw& law) {
  double s = 0.0;
  for (std::size_t i = 0; i < law.size(); ++i) {
    if (law.atoms()[i] > 0.0) s += law.atoms()[i] * law.probs()[i];
  }
  return s;
}

double central_abs_moment(const IncrementLaw& law, double p) {
  const double m = mean(law);
  double s = 0.0;
  for (std::size_t i = 0; i < law.size(); ++i) s += std::pow(std::abs(law.atoms()[i] - m), p) * law.probs()[i];
  return s;
}

double moment(const IncrementLaw& law, MomentKind kind, double p) {
  switch (kind) {
    case MomentKind::Mean: return mean(law);
    case MomentKind::Variance: return variance(law);
    case MomentKind::AbsP: return abs_moment(law, p);
    case MomentKind::RawP:
      if (!is_integral(p)) throw Error(ErrorCode::InvalidArgument, "raw moment order must be an integer");
      return raw_moment(law, static_cast<int>(p));
    case MomentKind::PositivePart: return positive_part(law);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown moment kind");
}

double log_mgf(const IncrementLaw& law, double z, int order) {
  if (order < 0 || order > 2) throw Error(ErrorCode::InvalidArgument, "order must be 0, 1 or 2");
  const TiltedSums t = tilted_weights(law, z);
  if (order == 0) return t.shift + std::log(t.total);
  double m = 0.0;
  for (std::size_t i = 0; i < law.size(); ++i) m += law.atoms()[i] * t.weights[i];
  m /= t.total;
  if (order == 1) return m;
  double v = 0.0;
  for (std::size_t i = 0; i < law.size(); ++i) {
    const double d = law.atoms()[i] - m;
    v += d * d * t.weights[i];
  }
  return v / t.total;
}

IncrementLaw tilt(const IncrementLaw& law, double t) {
  if (t == 0.0) return law;
  TiltedSums s = tilted_weights(law, t);
  for (double& w : s.weights) w /= s.total;
  return IncrementLaw(law.atoms(), std::move(s.weights), law.lattice());
}

void ClassParams::validate() const {
  if (!(delta0 >= 0.0) || !std::isfinite(delta0)) throw Error(ErrorCode::InvalidArgument, "delta0 must be >= 0");
  if (!(c0 >= 1.0) || !std::isfinite(c0)) throw Error(ErrorCode::InvalidArgument, "c0 must be >= 1");
  for (const auto& [i, a] : minorant) {
    if (!(a >= 0.0 && a <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "minorant entry at " + std::to_string(i) + " outside [0,1]");
    }
  }
}

MembershipVerdict check_class_membership(const IncrementLaw& law, const ClassParams& params) {
  params.validate();
  if (!law.lattice()) throw Error(ErrorCode::InvalidArgument, "class membership needs a lattice law");
  MembershipVerdict v;
  v.mgf_minus = std::exp(log_mgf(law, -params.delta0, 0));
  v.mgf_plus = std::exp(log_mgf(law, params.delta0, 0));
  v.mgf_ok = true;
  if (v.mgf_minus > params.c0) {
    v.mgf_ok = false;
    v.failing_t = -params.delta0;
  } else if (v.mgf_plus > params.c0) {
    v.mgf_ok = false;
    v.failing_t = params.delta0;
  }
  v.minorant_ok = true;
  for (const auto& [i, a] : params.minorant) {
    if (law.prob_at(static_cast<double>(i)) < a) {
      v.minorant_ok = false;
      v.failing_atom = i;
      break;
    }
  }
  v.member = v.mgf_ok && v.minorant_ok;
  return v;
}

Periodicity check_periodicity(const IncrementLaw& law) {
  if (!law.lattice()) throw Error(ErrorCode::InvalidArgument, "periodicity needs a lattice law");
  std::vector<std::int64_t> support;
  for (double a : law.atoms()) support.push_back(static_cast<std::int64_t>(a));
  return periodicity_of_support(support);
}

Periodicity check_periodicity(const ClassParams& params) {
  std::vector<std::int64_t> support;
  for (const auto& [i, a] : params.minorant) {
    if (a > 0.0) support.push_back(i);
  }
  return periodicity_of_support(support);
}

std::vector<IncrementLaw> TiltSchedule::laws() const {
  if (base.empty()) throw Error(ErrorCode::InvalidArgument, "tilt schedule without base law");
  if (base.size() != 1 && base.size() != tilts.size()) {
    throw Error(ErrorCode::InvalidArgument, "base law count must be 1 or match the tilt count");
  }
  std::vector<IncrementLaw> out;
  out.reserve(tilts.size());
  for (std::size_t k = 0; k < tilts.size(); ++k) {
    const double t = tilts[k];
    if (!(t >= tilt_lo && t <= tilt_hi)) {
      throw Error(ErrorCode::InvalidArgument, "tilt " + std::to_string(t) + " at step " + std::to_string(k + 1) +
                                                  " outside [" + std::to_string(tilt_lo) + ", " +
                                                  std::to_string(tilt_hi) + "]");
    }
    out.push_back(tilt(base.size() == 1 ? base[0] : base[k], t));
  }
  return out;
}

double solve_tilt_for_mean(std::span<const IncrementLaw> laws, double target, double tol) {
  if (laws.empty()) throw Error(ErrorCode::DegenerateSchedule, "empty schedule");
  if (std::all_of(laws.begin(), laws.end(), [](const IncrementLaw& l) { return l.degenerate(); })) {
    throw Error(ErrorCode::DegenerateSchedule, "every law is a single atom");
  }
  double lo_sum = 0.0;
  double hi_sum = 0.0;
  for (const auto& l : laws) {
    lo_sum += l.min_atom();
    hi_sum += l.max_atom();
  }
  if (!(target > lo_sum && target < hi_sum)) {
    throw Error(ErrorCode::TargetOutOfRange, "target " + std::to_string(target) + " outside (" +
                                                 std::to_string(lo_sum) + ", " + std::to_string(hi_sum) + ")");
  }
  auto f = [&](double lambda) {
    double s = -target;
    for (const auto& l : laws) s += log_mgf(l, lambda, 1);
    return s;
  };
  auto fprime = [&](double lambda) {
    double s = 0.0;
    for (const auto& l : laws) s += log_mgf(l, lambda, 2);
    return s;
  };

  const double f0 = f(0.0);
  if (std::abs(f0) <= tol) return 0.0;

  // f is increasing; bracket the root on the side where f changes sign.
  const double dir = f0 < 0.0 ? 1.0 : -1.0;
  double a = 0.0;
  double b = dir;
  double fb = f(b);
  constexpr double kMaxLambda = 1e8;
  while ((dir > 0.0 && fb < 0.0) || (dir < 0.0 && fb > 0.0)) {
    a = b;
    b *= 2.0;
    if (std::abs(b) > kMaxLambda) {
      throw Error(ErrorCode::TargetOutOfRange, "target numerically unreachable by tilting");
    }
    fb = f(b);
  }
  double lo = std::min(a, b);
  double hi = std::max(a, b);
  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 500; ++iter) {
    const double fx = f(x);
    if (std::abs(fx) <= tol) return x;
    if (fx < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double d = fprime(x);
    double next = d > 0.0 ? x - fx / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) {
      return next;
    }
    x = next;
  }
  return x;
}

TruncationResult truncate_couple(const IncrementLaw& law, double K, double alpha, double A) {
  if (!(K >= 1.0) || !std::isfinite(K)) throw Error(ErrorCode::InvalidArgument, "K must be >= 1");
  if (!(alpha > 1.0) || !std::isfinite(alpha)) throw Error(ErrorCode::InvalidArgument, "alpha must be > 1");
  if (std::abs(mean(law)) > kCenteringTol) {
    throw Error(ErrorCode::NotCentered, "mean " + std::to_string(mean(law)));
  }
  if (abs_moment(law, alpha) > A) {
    throw Error(ErrorCode::MomentHypothesisViolated,
                "E|X|^alpha = " + std::to_string(abs_moment(law, alpha)) + " > A = " + std::to_string(A));
  }
  const double q = std::pow(K, -alpha);
  double tail_mean = 0.0;
  for (std::size_t i = 0; i < law.size(); ++i) {
    if (std::abs(law.atoms()[i]) > K) tail_mean += law.atoms()[i] * law.probs()[i];
  }
  const double x = std::pow(K, alpha) * tail_mean;

  std::map<double, double> merged;
  double mismatch = 0.0;
  for (std::size_t i = 0; i < law.size(); ++i) {
    const double a = law.atoms()[i];
    const double p = law.probs()[i];
    const double base = std::abs(a) <= K ? a : 0.0;
    merged[base] += p * (1.0 - q);
    merged[base + x] += p * q;
    if (base != a) mismatch += p * (1.0 - q);
    if (base + x != a) mismatch += p * q;
  }
  std::vector<double> atoms;
  std::vector<double> weights;
  bool integral = law.lattice();
  for (const auto& [a, w] : merged) {
    atoms.push_back(a);
    weights.push_back(w);
    integral = integral && is_integral(a);
  }
  TruncationResult out{IncrementLaw::from_weights(atoms, weights, integral), x, q, (A + 1.0) * q, mismatch};
  return out;
}

TruncationCheck check_truncation(const IncrementLaw& law, const TruncationResult& result, double K,
                                 double alpha, double A, std::span<const double> powers) {
  TruncationCheck c;
  const IncrementLaw& y = result.truncated;
  c.centered = std::abs(mean(y)) <= kCenteringTol;
  const double bound = (A + 1.0) * K;
  c.bounded = std::abs(y.min_atom()) <= bound && std::abs(y.max_atom()) <= bound;
  c.mismatch = result.mismatch_prob <= result.mismatch_bound * (1.0 + 1e-12);
  c.moment_upper = true;
  for (double p : powers) {
    const double lhs = abs_moment(y, p);
    const double rhs = std::pow(2.0, p - 1.0) * (abs_moment(law, p) + std::pow(K, p - alpha) * std::pow(A, p));
    c.moment_upper = c.moment_upper && lhs <= rhs * (1.0 + 1e-12);
  }
  if (alpha > 2.0) {
    const double lhs = raw_moment(y, 2);
    const double rhs = raw_moment(law, 2) - A * std::pow(K, 2.0 - alpha) - 2.0 * A * A * std::pow(K, 2.0 - 2.0 * alpha);
    c.second_moment_lower = lhs >= rhs - 1e-12 * std::max(1.0, std::abs(rhs));
  }
  return c;
}

}  // namespace inhomwalk
