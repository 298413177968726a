#include <filesystem>
#include <fstream>
#include <sstream>

#include "inhomwalk/cli.hpp"
#include "inhomwalk/harness.hpp"
#include "inhomwalk/json_util.hpp"

namespace inhomwalk::cli {

using json_util::fail;
using json_util::Fields;
using nlohmann::json;

namespace {

std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

double edge(Fields& f, const std::string& key, double fallback) {
  const json* v = f.find(key);
  if (!v || v->is_null()) return fallback;
  if (!v->is_number()) fail(f.sub(key), "expected a number or null");
  return v->get<double>();
}

Band band_from_json(const json& j, const std::string& path) {
  Fields f(j, path);
  Band b;
  b.lo = edge(f, "lo", -kInf);
  b.hi = edge(f, "hi", kInf);
  b.lo_strict = f.boolean_or("loStrict", false);
  b.hi_strict = f.boolean_or("hiStrict", false);
  f.finish();
  if (b.lo > b.hi) fail(path, "lo exceeds hi");
  return b;
}

std::int64_t as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<std::int64_t>();
}

Query query_from_json(const json& j, const std::string& path, const FamilySpec& family) {
  Fields f(j, path);
  Query q;
  const long long n = f.integer("n");
  if (n < 1) fail(f.sub("n"), "must be at least 1");
  q.n = static_cast<std::size_t>(n);
  q.u = f.integer_or("u", 0);
  if (f.has("schedule")) {
    if (f.has("member")) fail(path, "give either member or schedule, not both");
    q.schedule = member_from_json(f.at("schedule"), f.sub("schedule"));
    q.member = q.schedule->name;
  } else {
    q.member = f.string_or("member", family.members.front().name);
    bool found = false;
    for (const auto& m : family.members) found = found || m.name == q.member;
    if (!found) fail(f.sub("member"), "no member named '" + q.member + "'");
  }
  q.constraint = f.has("constraint") ? constraint_from_json(f.at("constraint"), q.n, f.sub("constraint"))
                                     : PathConstraint::none(q.n);
  const long long samples = f.integer_or("samples", 10000);
  if (samples < 1000) fail(f.sub("samples"), "must be at least 1000");
  q.samples = static_cast<std::size_t>(samples);
  q.importance = f.boolean_or("importance", false);
  if (q.importance && !q.constraint.endpoint()) fail(f.sub("importance"), "needs a pinned endpoint");
  f.finish();
  return q;
}

}  // namespace

PathConstraint constraint_from_json(const json& j, std::size_t n, const std::string& path) {
  Fields f(j, path);
  std::vector<std::optional<Band>> bands;
  if (const json* bs = f.find("bands")) {
    if (!bs->is_array()) fail(f.sub("bands"), "expected an array");
    if (bs->size() > 1 && bs->size() != n && bs->size() != n + 1) {
      fail(f.sub("bands"), "expected 1, n or n+1 entries");
    }
    for (std::size_t i = 0; i < bs->size(); ++i) {
      if ((*bs)[i].is_null()) {
        bands.emplace_back();
      } else {
        bands.emplace_back(band_from_json((*bs)[i], index(f.sub("bands"), i)));
      }
    }
  }
  if (bands.size() == 1 && n > 1) bands.assign(n, bands.front());
  const bool strict = f.boolean_or("strictFloor", false);
  std::vector<Checkpoint> cps;
  if (const json* cs = f.find("checkpoints")) {
    if (!cs->is_array()) fail(f.sub("checkpoints"), "expected an array");
    for (std::size_t i = 0; i < cs->size(); ++i) {
      const std::string where = index(f.sub("checkpoints"), i);
      Fields c((*cs)[i], where);
      Checkpoint cp;
      const long long t = c.integer("t");
      if (t < 1 || static_cast<std::size_t>(t) > n) fail(c.sub("t"), "must lie in 1..n");
      cp.time = static_cast<std::size_t>(t);
      if (const json* s = c.find("set")) {
        if (s->is_array()) {
          std::vector<std::int64_t> xs;
          for (std::size_t k = 0; k < s->size(); ++k) xs.push_back(as_int((*s)[k], index(c.sub("set"), k)));
          cp.set = std::move(xs);
        } else {
          cp.interval = band_from_json(*s, c.sub("set"));
        }
      }
      if (c.has("incCap")) {
        cp.inc_cap = c.number("incCap");
        if (!(*cp.inc_cap >= 0.0)) fail(c.sub("incCap"), "must be non-negative");
      }
      cp.inc_shift = c.number_or("incShift", 0.0);
      c.finish();
      cps.push_back(std::move(cp));
    }
  }
  std::optional<std::int64_t> endpoint;
  if (const json* e = f.find("endpoint"); e && !e->is_null()) endpoint = as_int(*e, f.sub("endpoint"));
  f.finish();
  try {
    PathConstraint pc(n, std::move(bands), strict, std::move(cps), endpoint);
    pc.validate();
    return pc;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    fail(path, e.what());
  }
}

ScenarioConfig config_from_json(const json& j, const std::string& path) {
  Fields f(j, path);
  ScenarioConfig c;
  const json& fam = f.at("family");
  if (fam.is_string()) {
    const std::string name = fam.get<std::string>();
    if (name == "standard") {
      c.family = standard_family();
    } else if (name == "lazy") {
      c.family = lazy_family();
    } else {
      fail(f.sub("family"), "unknown built-in family '" + name + "' (standard, lazy)");
    }
  } else {
    c.family = family_from_json(fam, f.sub("family"));
  }
  c.task = f.string_or("task", "");
  if (!c.task.empty() && c.task != "prob" && c.task != "sample" && c.task != "verify") {
    fail(f.sub("task"), "expected prob, sample or verify");
  }
  c.theorem_id = f.string_or("theoremId", "");
  if (!c.theorem_id.empty() && c.theorem_id != "all" && !is_verifier(c.theorem_id)) {
    fail(f.sub("theoremId"), "not a registered verifier");
  }
  if (f.has("query")) c.query = query_from_json(f.at("query"), f.sub("query"), c.family);
  if (f.has("output")) {
    Fields o(f.at("output"), f.sub("output"));
    c.out_path = o.string_or("path", "");
    c.format = o.string_or("format", "");
    if (!c.format.empty() && c.format != "csv" && c.format != "json") fail(o.sub("format"), "expected csv or json");
    o.finish();
  }
  if (f.has("seed")) {
    const json& s = f.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      fail(f.sub("seed"), "expected a non-negative integer");
    }
    c.seed = s.get<std::uint64_t>();
  }
  const long long par = f.integer_or("parallelism", 1);
  if (par < 1) fail(f.sub("parallelism"), "must be at least 1");
  c.parallelism = static_cast<std::size_t>(par);
  c.spread_cap = f.number_or("spreadCap", 10.0);
  if (!(c.spread_cap >= 1.0)) fail(f.sub("spreadCap"), "must be at least 1");
  f.finish();
  return c;
}

ScenarioConfig load_config(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read " + file);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(json_util::parse(ss.str(), file));
}

}  // namespace inhomwalk::cli
