#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "inhomwalk/cli.hpp"
#include "inhomwalk/engine.hpp"
#include "inhomwalk/harness.hpp"
#include "inhomwalk/json_util.hpp"
#include "inhomwalk/montecarlo.hpp"

namespace inhomwalk::cli {

using nlohmann::json;

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::string format;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> parallelism;
  std::optional<double> spread_cap;
};

std::string read_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read " + file);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ScenarioConfig configure(const Flags& flags, const std::string& task) {
  if (flags.config.empty()) throw Error(ErrorCode::ConfigError, task + " needs --config");
  ScenarioConfig c = load_config(flags.config);
  if (!c.task.empty() && c.task != task) {
    throw Error(ErrorCode::ConfigError, "config task '" + c.task + "' does not match subcommand '" + task + "'");
  }
  if (flags.seed) c.seed = *flags.seed;
  if (flags.parallelism) c.parallelism = *flags.parallelism;
  if (flags.spread_cap) c.spread_cap = *flags.spread_cap;
  if (!flags.out.empty()) c.out_path = flags.out;
  if (!flags.format.empty()) c.format = flags.format;
  if (c.format.empty()) {
    c.format = std::filesystem::path(c.out_path).extension() == ".csv" ? "csv" : "json";
  }
  if (!c.out_path.empty()) {
    const auto dir = std::filesystem::absolute(c.out_path).parent_path();
    if (!std::filesystem::is_directory(dir)) {
      throw Error(ErrorCode::ConfigError, "field 'output.path': directory " + dir.string() + " does not exist");
    }
  }
  if (c.parallelism < 1) throw Error(ErrorCode::ConfigError, "--parallelism must be at least 1");
  if (!(c.spread_cap >= 1.0)) throw Error(ErrorCode::ConfigError, "--spread-cap must be at least 1");
  return c;
}

void emit(const std::vector<VerificationReport>& reports, const std::string& path, const std::string& format,
          std::ostream& out) {
  const std::string text = format == "csv" ? reports_to_csv(reports) : reports_to_json(reports) + "\n";
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::ConfigError, "cannot write " + path);
  f << text;
}

std::string summary(const VerificationReport& r) {
  std::ostringstream o;
  o << r.theorem_id << ' ' << (r.pass ? "PASS" : "FAIL") << " points=" << r.grid_points << " skipped=" << r.skipped;
  if (std::isfinite(r.spread)) o << " spread=" << r.spread << " cap=" << r.spread_cap;
  for (const auto& n : r.notes) o << "\n  note: " << n;
  return o.str();
}

int finish_reports(const std::vector<VerificationReport>& reports, const ScenarioConfig& c, std::ostream& out,
                   std::ostream& err) {
  emit(reports, c.out_path, c.format, out);
  std::ostream& log = c.out_path.empty() ? err : out;
  bool ok = true;
  for (const auto& r : reports) {
    log << summary(r) << '\n';
    ok = ok && r.pass;
  }
  return ok ? kExitPass : kExitFail;
}

VerificationReport query_report(const ScenarioConfig& c, const std::string& id) {
  VerificationReport r;
  r.theorem_id = id;
  r.family = c.family.name;
  r.spread_cap = c.spread_cap;
  r.pass = true;
  r.grid_points = 1;
  return r;
}

StepSchedule query_schedule(const ScenarioConfig& c, const Query& q) {
  if (q.schedule) return q.schedule->schedule(q.n);
  for (const auto& m : c.family.members) {
    if (m.name == q.member) return m.schedule(q.n);
  }
  throw Error(ErrorCode::ConfigError, "field 'query.member': no member named '" + q.member + "'");
}

ReportRow query_row(const Query& q, const std::string& part) {
  ReportRow row;
  row.member = q.member;
  row.part = part;
  row.in.n = static_cast<double>(q.n);
  row.in.u = static_cast<double>(q.u);
  if (q.constraint.endpoint()) row.in.y = static_cast<double>(*q.constraint.endpoint());
  return row;
}

const Query& need_query(const ScenarioConfig& c) {
  if (!c.query) throw Error(ErrorCode::ConfigError, "field 'query': missing");
  return *c.query;
}

int cmd_prob(const Flags& flags, std::ostream& out, std::ostream& err) {
  const ScenarioConfig c = configure(flags, "prob");
  const Query& q = need_query(c);
  const StepSchedule s = query_schedule(c, q);
  ReportRow row = query_row(q, "prob");
  try {
    row.log_value = event_log_prob(q.u, s, q.constraint);
    row.value = std::exp(row.log_value);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InfeasibleConstraint) throw;
    row.value = 0.0;
    row.log_value = -std::numeric_limits<double>::infinity();
    row.note = "infeasible constraint";
  }
  if (row.value == 0.0 && row.note.empty()) row.note = "zero probability";
  VerificationReport r = query_report(c, "prob");
  r.rows.push_back(row);
  return finish_reports({r}, c, out, err);
}

int cmd_sample(const Flags& flags, std::ostream& out, std::ostream& err) {
  const ScenarioConfig c = configure(flags, "sample");
  const Query& q = need_query(c);
  const StepSchedule s = query_schedule(c, q);
  const McEstimate mc = q.importance ? importance_tilted_estimate(s, q.u, q.constraint, q.samples, c.seed)
                                     : estimate_event(s, q.u, q.constraint, q.samples, c.seed);
  ReportRow row = query_row(q, q.importance ? "importance" : "mc");
  row.value = mc.value;
  row.log_value = std::log(mc.value);
  std::ostringstream note;
  note.precision(17);
  note << "stderr=" << mc.std_error << " samples=" << mc.samples << " accepted=" << mc.accepted_fraction;
  row.note = note.str();
  VerificationReport r = query_report(c, "sample");
  r.rows.push_back(row);
  r.constants.push_back({"std_error", mc.std_error});
  return finish_reports({r}, c, out, err);
}

int cmd_verify(const Flags& flags, std::string id, std::ostream& out, std::ostream& err) {
  ScenarioConfig c = configure(flags, "verify");
  if (id.empty()) id = c.theorem_id;
  if (id.empty()) throw Error(ErrorCode::ConfigError, "verify needs a theorem id or 'all'");
  if (!c.theorem_id.empty() && c.theorem_id != id) {
    throw Error(ErrorCode::ConfigError, "config theoremId '" + c.theorem_id + "' does not match '" + id + "'");
  }
  if (id != "all" && !is_verifier(id)) throw Error(ErrorCode::ConfigError, "unknown theorem id '" + id + "'");
  HarnessOptions opt;
  opt.seed = c.seed;
  opt.parallelism = c.parallelism;
  opt.spread_cap = c.spread_cap;
  std::vector<VerificationReport> reports;
  for (const auto& e : verifier_registry()) {
    if (id == "all" || id == e.id) reports.push_back(e.fn(c.family, opt));
  }
  return finish_reports(reports, c, out, err);
}

int cmd_report(const Flags& flags, const std::vector<std::string>& files, std::ostream& out, std::ostream& err) {
  std::vector<VerificationReport> reports;
  for (const auto& file : files) {
    const json j = json_util::parse(read_file(file), file);
    try {
      if (j.is_array()) {
        for (const auto& r : j) reports.push_back(report_from_json(r));
      } else {
        reports.push_back(report_from_json(j));
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ConfigError, file + ": not a report: " + e.what());
    }
  }
  ScenarioConfig c;
  c.out_path = flags.out;
  c.format = flags.format.empty() ? (std::filesystem::path(flags.out).extension() == ".csv" ? "csv" : "json")
                                  : flags.format;
  return finish_reports(reports, c, out, err);
}

int cmd_law_check(const std::string& file, std::ostream& out) {
  const json j = json_util::parse(read_file(file), file);
  IncrementLaw law = lazy_walk();
  ClassParams params = standard_family().class_params;
  if (j.is_object() && j.contains("law")) {
    json_util::Fields f(j, "");
    law = law_from_json(f.at("law"), "law");
    if (f.has("classParams")) params = class_params_from_json(f.at("classParams"), "classParams");
    f.finish();
  } else {
    law = law_from_json(j, "");
  }
  const MembershipVerdict v = check_class_membership(law, params);
  const Periodicity per = check_periodicity(law);
  json r{{"law", law_to_json(law)},
         {"mean", mean(law)},
         {"variance", variance(law)},
         {"lattice", law.lattice()},
         {"irreducible", per.irreducible},
         {"aperiodic", per.aperiodic},
         {"classParams", class_params_json(params)},
         {"member", v.member},
         {"mgfOk", v.mgf_ok},
         {"minorantOk", v.minorant_ok},
         {"mgfMinus", v.mgf_minus},
         {"mgfPlus", v.mgf_plus}};
  if (v.failing_t) r["failingT"] = *v.failing_t;
  if (v.failing_atom) r["failingAtom"] = *v.failing_atom;
  out << r.dump(2) << '\n';
  return v.member ? kExitPass : kExitFail;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact and verified estimates for inhomogeneous lattice random walks", "inhomwalk"};
  app.require_subcommand(1);
  Flags flags;
  auto add_common = [&](CLI::App* sub, bool config) {
    if (config) sub->add_option("--config", flags.config, "scenario config (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--out", flags.out, "output file (default stdout)");
    sub->add_option("--format", flags.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    if (config) {
      sub->add_option("--seed", flags.seed, "override the config seed");
      sub->add_option("--parallelism", flags.parallelism, "worker threads")->check(CLI::PositiveNumber);
      sub->add_option("--spread-cap", flags.spread_cap, "maximum envelope spread");
    }
  };

  auto* law = app.add_subcommand("law", "increment law utilities");
  law->require_subcommand(1);
  std::string law_file;
  auto* check = law->add_subcommand("check", "validate a law literal and test class membership");
  check->add_option("file", law_file, "law JSON")->required()->check(CLI::ExistingFile);

  auto* prob = app.add_subcommand("prob", "exact constrained-path probability");
  add_common(prob, true);
  auto* sample = app.add_subcommand("sample", "Monte Carlo estimate of the same event");
  add_common(sample, true);
  std::string theorem;
  auto* verify = app.add_subcommand("verify", "run one verifier or all of them");
  verify->add_option("theorem", theorem, "registry id or 'all'");
  add_common(verify, true);
  std::vector<std::string> merge;
  auto* report = app.add_subcommand("report", "merge report files");
  report->add_option("--merge", merge, "JSON report files")->required()->check(CLI::ExistingFile);
  add_common(report, false);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitPass;
    }
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (check->parsed()) return cmd_law_check(law_file, out);
    if (prob->parsed()) return cmd_prob(flags, out, err);
    if (sample->parsed()) return cmd_sample(flags, out, err);
    if (verify->parsed()) return cmd_verify(flags, theorem, out, err);
    if (report->parsed()) return cmd_report(flags, merge, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::ConfigError:
      case ErrorCode::EmptySupport:
      case ErrorCode::NegativeWeight:
      case ErrorCode::NonIntegerAtomOnLattice:
      case ErrorCode::NonFiniteInput:
      case ErrorCode::DuplicateAtom:
      case ErrorCode::InvalidArgument:
        return kExitConfig;
      default:
        return kExitFail;
    }
  }
  return kExitConfig;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace inhomwalk::cli
