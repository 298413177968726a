#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "inhomwalk/constraint.hpp"
#include "inhomwalk/family.hpp"

namespace inhomwalk::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitConfig = 2;

// Event for `prob` and `sample`: a family member (or an inline schedule) run
// for n steps from u under a constraint literal.
struct Query {
  std::string member;
  std::optional<MemberSpec> schedule;
  std::size_t n = 0;
  std::int64_t u = 0;
  PathConstraint constraint;
  std::size_t samples = 10000;
  bool importance = false;
};

struct ScenarioConfig {
  FamilySpec family;
  std::string task;        // prob | sample | verify, empty when not given
  std::string theorem_id;  // registry id or "all"
  std::optional<Query> query;
  std::string out_path;
  std::string format;  // csv | json, empty when not given
  std::uint64_t seed = 1;
  std::size_t parallelism = 1;
  double spread_cap = 10.0;
};

// {"bands": [{"lo", "hi", "loStrict", "hiStrict"} | null, ...], "strictFloor",
//  "checkpoints": [{"t", "set": [...] | {"lo", "hi"}, "incCap", "incShift"}],
//  "endpoint": v | null}
// bands holds one entry per step 1..n, one per time 0..n, or a single entry
// applied at every step.
PathConstraint constraint_from_json(const nlohmann::json& j, std::size_t n, const std::string& path);

// Strict: unknown fields and bad values throw ConfigError naming the field.
ScenarioConfig config_from_json(const nlohmann::json& j, const std::string& path = "");
ScenarioConfig load_config(const std::string& file);

// Full command line without the program name. Writes reports to the output
// path or to out; diagnostics go to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace inhomwalk::cli
