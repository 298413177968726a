#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "inhomwalk/json_util.hpp"
#include "inhomwalk/laws.hpp"
#include "inhomwalk/schedule.hpp"

namespace inhomwalk {

// floor(scale * n^power); a plain number is scale with power 0.
struct GridValue {
  double scale = 0.0;
  double power = 0.0;
  std::int64_t at(std::size_t n) const;
  friend bool operator==(const GridValue&, const GridValue&) = default;
};

// A named schedule generator: base laws repeated cyclically, each step
// optionally tilted. Tilts are either a cyclic list or the sinusoid
// amplitude * sin(2 pi (i + phase) / period).
struct MemberSpec {
  std::string name;
  std::vector<IncrementLaw> laws;
  std::vector<double> tilts;
  double amplitude = 0.0;
  double period = 0.0;  // 0: no sinusoid
  double phase = 0.0;

  IncrementLaw law_at(std::size_t i) const;  // step i >= 1
  StepSchedule schedule(std::size_t n) const;
  bool centered() const;  // every generated law has mean zero
};

struct FamilyGrids {
  // Overrides every verifier's default n list when non-empty.
  std::vector<std::size_t> n;
  // Per-verifier n lists, by verifier id.
  std::map<std::string, std::vector<std::size_t>> n_for;
  std::vector<GridValue> uv{{0, 0}, {1, 0}, {0.5, 0.5}, {1, 0.5}, {1, 0.6}};
  double lambda0 = 4.0;
  std::vector<double> s{0.25, 0.5, 0.75};
  std::vector<double> t{1.0, 1.5, 2.0, 2.5, 3.0, 3.5};
  std::vector<double> K{0.5, 1.0, 2.0, 3.0};  // multiples of sqrt(n)
  std::vector<double> alphas{0.5};            // LLT windows
  double bridge_alpha = 0.6;                  // 0 <= u, v <= n^alpha
  double tail_beta = 0.16;                    // t <= n^beta
  double epsilon = 0.25;
  double a_prime = 2.5;                       // ballot starts u <= a_prime sqrt(n)
  std::vector<std::size_t> swap_blocks{16, 64, 256};
  double swap_alpha = 0.55;
  std::size_t mc_samples = 4000;
  std::size_t theta_samples = 100000;
  std::size_t random_laws = 500;

  std::vector<std::size_t> ns(const std::string& id, const std::vector<std::size_t>& fallback) const;
};

struct FamilySpec {
  std::string name;
  ClassParams class_params;
  std::vector<MemberSpec> members;
  FamilyGrids grids;
};

// Lazy, skewed, alternating and sinusoidally tilted lazy members.
FamilySpec standard_family();
// The lazy walk alone.
FamilySpec lazy_family();

// {"delta0", "c0", "minorant": {"atom": weight}}.
ClassParams class_params_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json class_params_json(const ClassParams& params);

// Law literal {"atoms": [...], "probs": [...], "lattice": true}.
IncrementLaw law_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json law_to_json(const IncrementLaw& law);
// Member literal {"name", "base" | "laws", "tilts": [...] | {"amplitude", "period", "phase"}}.
MemberSpec member_from_json(const nlohmann::json& j, const std::string& path);
FamilySpec family_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json family_json(const FamilySpec& family);

// Strict parsing: unknown fields, wrong types and invalid laws throw
// ConfigError naming the offending field.
FamilySpec family_from_json(const std::string& text);
std::string family_to_json(const FamilySpec& family);

}  // namespace inhomwalk
