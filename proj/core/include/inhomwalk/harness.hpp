#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "inhomwalk/family.hpp"

namespace inhomwalk {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Grid coordinates of a report row; NaN marks an unused input.
struct GridInputs {
  double n = kNaN, u = kNaN, v = kNaN, k = kNaN, lambda = kNaN, s = kNaN, t = kNaN, K = kNaN, x = kNaN,
         alpha = kNaN, y = kNaN, strict = kNaN;
};

struct ReportRow {
  std::string member;
  std::string part;
  GridInputs in;
  double value = kNaN;       // exact quantity (may underflow; see log_value)
  double log_value = kNaN;
  double normalized = kNaN;  // value divided by the bound's prefactor
  double log_normalized = kNaN;
  double envelope_x = kNaN;  // variable inside the exponential, when the shape has one
  bool skipped = false;
  std::string note;
};

struct FittedConstant {
  std::string name;
  double value = 0.0;
};

struct VerificationReport {
  std::string theorem_id;
  std::string family;
  std::vector<ReportRow> rows;
  std::vector<FittedConstant> constants;
  bool pass = false;
  double spread = kNaN;  // c_+ / c_-; NaN for one-sided statements
  double spread_cap = 10.0;
  std::size_t grid_points = 0;
  std::size_t skipped = 0;
  std::vector<std::string> notes;

  double constant(const std::string& name) const;  // NaN when absent
  bool has_constant(const std::string& name) const;
};

// Lines ln C - c x with c >= 0 through the points (x, ln q): the lower line
// stays below every point and has the largest mean over the points, the upper
// one stays above and has the smallest mean. Candidate slopes are 0 and the
// hull edges, so the result does not depend on the point order.
struct Envelope {
  double log_c_lower = kNaN;
  double rate_lower = 0.0;
  double log_c_upper = kNaN;
  double rate_upper = 0.0;
  std::size_t points = 0;
  double spread() const { return std::exp(log_c_upper - log_c_lower); }
};

Envelope fit_envelope(std::span<const std::pair<double, double>> points, bool with_rate);

// Runs fn(i) for i in [0, count) on `threads` workers; rethrows the exception
// of the lowest failing index.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn);

struct HarnessOptions {
  double spread_cap = 10.0;
  std::size_t parallelism = 1;
  std::uint64_t seed = 1;
};

using Verifier = VerificationReport (*)(const FamilySpec&, const HarnessOptions&);

VerificationReport verify_ballot(const FamilySpec& family, const HarnessOptions& opt = {});
VerificationReport verify_smallball_free(const FamilySpec& family, const HarnessOptions& opt = {});
VerificationReport verify_llt(const FamilySpec& family, const HarnessOptions& opt = {});
VerificationReport verify_berry_esseen(const FamilySpec& family, const HarnessOptions& opt = {});
VerificationReport verify_bridge_positivity(const FamilySpec& family, const HarnessOptions& opt = {});
VerificationReport verify_smallball_bridge(const FamilySpec& family, const HarnessOptions& opt = {});
VerificationReport verify_excursion(const FamilySpec& family, const HarnessOptions& opt = {});
VerificationReport verify_ceiling(const FamilySpec& family, const HarnessOptions& opt = {});
VerificationReport verify_tails(const FamilySpec& family, const HarnessOptions& opt = {});
VerificationReport verify_coarse_grain(const FamilySpec& family, const HarnessOptions& opt = {});
VerificationReport verify_gaussian_swap(const FamilySpec& family, const HarnessOptions& opt = {});
VerificationReport verify_moment_lemmas(const FamilySpec& family, const HarnessOptions& opt = {});
VerificationReport verify_truncation(const FamilySpec& family, const HarnessOptions& opt = {});
VerificationReport verify_theta(const FamilySpec& family, const HarnessOptions& opt = {});

struct RegistryEntry {
  const char* id;
  Verifier fn;
};
// Fixed order: ballot, smallball_free, llt, berry_esseen, bridge_positivity,
// smallball_bridge, excursion, ceiling, tails, coarse_grain, gaussian_swap,
// moment_lemmas, truncation, theta.
std::span<const RegistryEntry> verifier_registry();
bool is_verifier(const std::string& id);
// Throws InvalidArgument for an unknown id.
VerificationReport run_verifier(const std::string& id, const FamilySpec& family, const HarnessOptions& opt = {});

// Serialization. JSON holds one report or an array; CSV has the fixed columns
// theorem,member,part,n,u,v,k,lambda,s,t,K,x,alpha,y,strict,value,log_value,
// normalized,log_normalized,envelope_x,skipped,note.
nlohmann::json report_json(const VerificationReport& report);
VerificationReport report_from_json(const nlohmann::json& j);
std::string reports_to_json(const std::vector<VerificationReport>& reports);
std::string reports_to_csv(const std::vector<VerificationReport>& reports);
std::string csv_header();

// Seeded random centered lattice laws with 2 to 6 atoms in [-8, 8].
std::vector<IncrementLaw> random_centered_laws(std::size_t count, std::uint64_t seed);

}  // namespace inhomwalk
