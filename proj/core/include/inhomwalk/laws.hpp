#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "inhomwalk/error.hpp"

namespace inhomwalk {

// Finite-support probability mass function. Atoms are strictly increasing and
// every stored probability is positive: zero-weight atoms are dropped at
// construction. With the lattice flag set, every atom is an integer.
class IncrementLaw {
 public:
  // Normalizes the weights. Throws EmptySupport, NegativeWeight,
  // NonIntegerAtomOnLattice, NonFiniteInput or DuplicateAtom.
  static IncrementLaw from_weights(std::span<const double> atoms, std::span<const double> weights,
                                   bool lattice);

  const std::vector<double>& atoms() const noexcept { return atoms_; }
  const std::vector<double>& probs() const noexcept { return probs_; }
  bool lattice() const noexcept { return lattice_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  double min_atom() const noexcept { return atoms_.front(); }
  double max_atom() const noexcept { return atoms_.back(); }
  bool degenerate() const noexcept { return atoms_.size() == 1; }

  // Probability of an exact atom; 0 when absent.
  double prob_at(double atom) const;

  friend bool operator==(const IncrementLaw&, const IncrementLaw&) = default;

 private:
  IncrementLaw(std::vector<double> atoms, std::vector<double> probs, bool lattice)
      : atoms_(std::move(atoms)), probs_(std::move(probs)), lattice_(lattice) {}

  std::vector<double> atoms_;
  std::vector<double> probs_;
  bool lattice_ = false;

  friend IncrementLaw tilt(const IncrementLaw& law, double t);
};

inline IncrementLaw validate_law(std::span<const double> atoms, std::span<const double> weights,
                                 bool lattice) {
  return IncrementLaw::from_weights(atoms, weights, lattice);
}

// The lazy walk P(-1)=1/4, P(0)=1/2, P(1)=1/4 and the simple walk P(+-1)=1/2.
IncrementLaw lazy_walk();
IncrementLaw simple_walk();

enum class MomentKind { Mean, Variance, AbsP, RawP, PositivePart };

// Exact finite sums. AbsP is E|X|^p, RawP is E X^p (p must be integral when
// the law has negative atoms), PositivePart is E(X 1{X>0}).
double moment(const IncrementLaw& law, MomentKind kind, double p = 1.0);

double mean(const IncrementLaw& law);
double variance(const IncrementLaw& law);
double abs_moment(const IncrementLaw& law, double p);
double raw_moment(const IncrementLaw& law, int p);
double positive_part(const IncrementLaw& law);
// E|X - EX|^p.
double central_abs_moment(const IncrementLaw& law, double p);

// H(z) = ln M(z) for order 0, H'(z) (mean of the z-tilted law) for order 1,
// H''(z) (its variance) for order 2. Exponents are shifted by max(z*atom).
double log_mgf(const IncrementLaw& law, double z, int order);

// Reweights p(l) -> p(l) e^{t l} / M(t). t == 0 returns the law unchanged.
IncrementLaw tilt(const IncrementLaw& law, double t);

struct ClassParams {
  double delta0 = 0.0;
  double c0 = 1.0;
  // Pointwise lower bound a_i, finitely supported.
  std::map<std::int64_t, double> minorant;

  // Throws InvalidArgument on delta0 < 0, c0 < 1 or minorant entries outside [0,1].
  void validate() const;
};

struct MembershipVerdict {
  bool member = false;
  bool mgf_ok = false;
  bool minorant_ok = false;
  double mgf_minus = 1.0;  // M(-delta0)
  double mgf_plus = 1.0;   // M(+delta0)
  std::optional<double> failing_t;
  std::optional<std::int64_t> failing_atom;
};

// sup_{|t|<=delta0} M(t) <= c0 is checked at t = +-delta0 (M is convex), and
// p(i) >= a_i on the minorant support.
MembershipVerdict check_class_membership(const IncrementLaw& law, const ClassParams& params);

struct Periodicity {
  bool irreducible = false;
  bool aperiodic = false;
};

// Irreducible: the atoms have both signs and gcd 1. Aperiodic: gcd of the
// atom differences is 1.
Periodicity check_periodicity(const IncrementLaw& law);
// Same test on the support of the positive minorant entries.
Periodicity check_periodicity(const ClassParams& params);

// Laws obtained by tilting base laws by t_k in [tilt_lo, tilt_hi].
struct TiltSchedule {
  std::vector<IncrementLaw> base;  // one law, or one per step
  std::vector<double> tilts;
  double tilt_lo = 0.0;
  double tilt_hi = 0.0;

  // Throws InvalidArgument when a tilt leaves [tilt_lo, tilt_hi] or when the
  // base count is neither 1 nor tilts.size().
  std::vector<IncrementLaw> laws() const;
};

// lambda with |sum_i H_i'(lambda) - target| <= tol, by safeguarded Newton on a
// bracket. Throws DegenerateSchedule when every law is a single atom and
// TargetOutOfRange unless sum(min atoms) < target < sum(max atoms).
double solve_tilt_for_mean(std::span<const IncrementLaw> laws, double target, double tol = 1e-12);

// Law of Y = X 1{|X|<=K} + x xi with x = K^alpha E(X 1{|X|>K}) and xi an
// independent Bernoulli(K^-alpha).
struct TruncationResult {
  IncrementLaw truncated;
  double atom_value = 0.0;
  double bernoulli_param = 0.0;
  double mismatch_bound = 0.0;
  // Exact Q(X != Y) under the product coupling.
  double mismatch_prob = 0.0;
};

// Requires |E X| <= 1e-12 (NotCentered), E|X|^alpha <= A
// (MomentHypothesisViolated), K >= 1 and alpha > 1 (InvalidArgument).
TruncationResult truncate_couple(const IncrementLaw& law, double K, double alpha, double A);

struct TruncationCheck {
  bool centered = false;
  bool bounded = false;
  bool mismatch = false;
  bool moment_upper = false;  // E|Y|^p <= 2^{p-1}(E|X|^p + K^{p-alpha} A^p) for every p given
  bool second_moment_lower = true;  // only tested when alpha > 2
  bool all() const { return centered && bounded && mismatch && moment_upper && second_moment_lower; }
};

TruncationCheck check_truncation(const IncrementLaw& law, const TruncationResult& result, double K,
                                 double alpha, double A, std::span<const double> powers);

}  // namespace inhomwalk
