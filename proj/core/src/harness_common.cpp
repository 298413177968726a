#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "harness_detail.hpp"
#include "inhomwalk/error.hpp"
#include "inhomwalk/rng.hpp"

namespace inhomwalk {

using nlohmann::json;

double VerificationReport::constant(const std::string& name) const {
  for (const auto& c : constants) {
    if (c.name == name) return c.value;
  }
  return kNaN;
}

bool VerificationReport::has_constant(const std::string& name) const {
  return std::any_of(constants.begin(), constants.end(), [&](const FittedConstant& c) { return c.name == name; });
}

namespace {

using Pt = std::pair<double, double>;

double cross(const Pt& o, const Pt& a, const Pt& b) {
  return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
}

// Monotone chain over points sorted by (x, y).
std::vector<Pt> hull(const std::vector<Pt>& pts, bool lower) {
  std::vector<Pt> h;
  for (const Pt& p : pts) {
    while (h.size() >= 2 && (lower ? cross(h[h.size() - 2], h.back(), p) <= 0 : cross(h[h.size() - 2], h.back(), p) >= 0)) {
      h.pop_back();
    }
    h.push_back(p);
  }
  return h;
}

std::vector<double> candidate_rates(const std::vector<Pt>& h) {
  std::vector<double> rates{0.0};
  for (std::size_t i = 1; i < h.size(); ++i) {
    const double dx = h[i].first - h[i - 1].first;
    if (dx <= 0.0) continue;
    const double c = -(h[i].second - h[i - 1].second) / dx;
    if (c > 0.0 && std::isfinite(c)) rates.push_back(c);
  }
  std::sort(rates.begin(), rates.end());
  return rates;
}

}  // namespace

Envelope fit_envelope(std::span<const std::pair<double, double>> points, bool with_rate) {
  Envelope env;
  std::vector<Pt> pts;
  for (const auto& p : points) {
    if (std::isfinite(p.second) && std::isfinite(p.first)) pts.push_back(p);
  }
  env.points = pts.size();
  if (pts.empty()) return env;
  std::sort(pts.begin(), pts.end());
  double xbar = 0.0;
  for (const auto& p : pts) xbar += p.first;
  xbar /= static_cast<double>(pts.size());

  auto lower_at = [&](double c) {
    double m = kInf;
    for (const auto& p : pts) m = std::min(m, p.second + c * p.first);
    return m;
  };
  auto upper_at = [&](double c) {
    double m = -kInf;
    for (const auto& p : pts) m = std::max(m, p.second + c * p.first);
    return m;
  };

  if (!with_rate) {
    env.log_c_lower = lower_at(0.0);
    env.log_c_upper = upper_at(0.0);
    return env;
  }
  double best = -kInf;
  for (double c : candidate_rates(hull(pts, true))) {
    const double lc = lower_at(c);
    const double obj = lc - c * xbar;
    if (obj > best) {
      best = obj;
      env.log_c_lower = lc;
      env.rate_lower = c;
    }
  }
  best = kInf;
  for (double c : candidate_rates(hull(pts, false))) {
    const double uc = upper_at(c);
    const double obj = uc - c * xbar;
    if (obj < best) {
      best = obj;
      env.log_c_upper = uc;
      env.rate_upper = c;
    }
  }
  return env;
}

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace detail {

VerificationReport begin(const std::string& id, const FamilySpec& family, const HarnessOptions& opt,
                         std::size_t n_max) {
  VerificationReport r;
  r.theorem_id = id;
  r.family = family.name;
  r.spread_cap = opt.spread_cap;
  for (const auto& m : family.members) {
    for (std::size_t i = 1; i <= n_max; ++i) {
      const IncrementLaw law = m.law_at(i);
      const MembershipVerdict v = check_class_membership(law, family.class_params);
      if (!v.member) {
        r.notes.push_back("member " + m.name + " step " + std::to_string(i) + " lies outside the class");
        break;
      }
      if (!check_periodicity(law).aperiodic && i == 1) {
        r.notes.push_back("member " + m.name + " is periodic; parity points are skipped");
      }
    }
  }
  return r;
}

std::vector<ReportRow> run_tasks(std::size_t count, const HarnessOptions& opt,
                                 const std::function<std::vector<ReportRow>(std::size_t)>& task) {
  std::vector<std::vector<ReportRow>> slots(count);
  parallel_for(count, opt.parallelism, [&](std::size_t i) { slots[i] = task(i); });
  std::vector<ReportRow> rows;
  for (auto& s : slots) {
    for (auto& r : s) rows.push_back(std::move(r));
  }
  return rows;
}

double row_sort_key_nan(double v) { return std::isnan(v) ? -kInf : v; }

bool settle_rows(VerificationReport& report) {
  auto key = [](const ReportRow& r) {
    const GridInputs& g = r.in;
    auto k = row_sort_key_nan;
    return std::make_tuple(r.member, r.part, k(g.n), k(g.alpha), k(g.strict), k(g.lambda), k(g.s), k(g.K), k(g.k),
                           k(g.t), k(g.u), k(g.v), k(g.x), k(g.y));
  };
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [&](const ReportRow& a, const ReportRow& b) { return key(a) < key(b); });
  report.grid_points = report.rows.size();
  report.skipped = static_cast<std::size_t>(
      std::count_if(report.rows.begin(), report.rows.end(), [](const ReportRow& r) { return r.skipped; }));
  if (report.skipped > 0) report.notes.push_back(std::to_string(report.skipped) + " grid points skipped");
  return 2 * report.skipped <= report.grid_points;
}

void add_constant(VerificationReport& report, const std::string& name, double value) {
  report.constants.push_back({name, value});
}

Envelope fit_rows(const std::vector<ReportRow>& rows, const std::function<bool(const ReportRow&)>& filter,
                  bool with_rate) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows) {
    if (r.skipped || !filter(r)) continue;
    pts.emplace_back(std::isnan(r.envelope_x) ? 0.0 : r.envelope_x, r.log_normalized);
  }
  return fit_envelope(pts, with_rate);
}

bool record_envelope(VerificationReport& report, const std::string& prefix, const Envelope& env,
                     bool need_upper_decay) {
  add_constant(report, prefix + "c_minus", std::exp(env.log_c_lower));
  add_constant(report, prefix + "c_plus", std::exp(env.log_c_upper));
  add_constant(report, prefix + "rate_minus", env.rate_lower);
  add_constant(report, prefix + "rate_plus", env.rate_upper);
  add_constant(report, prefix + "spread", env.spread());
  if (env.points == 0) return true;
  const double cm = std::exp(env.log_c_lower);
  const double cp = std::exp(env.log_c_upper);
  bool ok = cm > 0.0 && std::isfinite(cm) && std::isfinite(cp) && std::isfinite(env.rate_lower) &&
            std::isfinite(env.rate_upper);
  if (need_upper_decay && !(env.rate_upper > 0.0)) {
    report.notes.push_back(prefix + "upper envelope does not decay");
    ok = false;
  }
  if (!ok) report.notes.push_back(prefix + "envelope not finite and positive");
  return ok;
}

void finish(VerificationReport& report, bool verdict, bool skips_ok) {
  bool membership = true;
  for (const auto& n : report.notes) {
    if (n.find("outside the class") != std::string::npos) membership = false;
  }
  if (!skips_ok) report.notes.push_back("more than half of the grid was skipped");
  if (report.rows.empty()) {
    report.notes.push_back("empty grid: passes vacuously");
    report.pass = membership;
    return;
  }
  report.pass = verdict && skips_ok && membership;
}

std::vector<std::int64_t> uv_values(const FamilyGrids& grids, std::size_t n, double limit) {
  std::set<std::int64_t> out;
  for (const auto& g : grids.uv) {
    const std::int64_t v = g.at(n);
    if (v >= 0 && static_cast<double>(v) <= limit + 1e-9) out.insert(v);
  }
  return {out.begin(), out.end()};
}

std::vector<std::int64_t> lambdas(const FamilyGrids& grids, std::size_t n) {
  std::vector<std::int64_t> out;
  const double root = std::sqrt(static_cast<double>(n));
  for (double l = grids.lambda0; l <= root + 1e-9; l *= 2.0) out.push_back(static_cast<std::int64_t>(std::floor(l)));
  return out;
}

bool endpoint_in(const StepSchedule& schedule, double v, double lo, double hi, LatticeEndpoint& out) {
  const double m = schedule.partial_mean(schedule.length());
  const double first = std::ceil(lo + m - 1e-9);
  const double last = std::floor(hi + m + 1e-9);
  if (first > last) return false;
  const double y = std::clamp(std::round(v + m), first, last);
  out.y = static_cast<std::int64_t>(y);
  out.effective_v = y - m;
  return true;
}

PathConstraint centered_tube(const StepSchedule& schedule, double lo, double hi, bool lo_strict, bool hi_strict) {
  std::vector<std::optional<Band>> b(schedule.length(), Band{lo, hi, lo_strict, hi_strict});
  return centered_bands(schedule, b, false);
}

void set_log_value(ReportRow& row, double log_value, double log_prefactor) {
  row.log_value = log_value;
  row.value = std::exp(log_value);
  if (!std::isfinite(log_value)) {
    row.skipped = true;
    if (row.note.empty()) row.note = "zero probability";
    row.normalized = 0.0;
    return;
  }
  row.log_normalized = log_value - log_prefactor;
  row.normalized = std::exp(row.log_normalized);
}

}  // namespace detail

std::span<const RegistryEntry> verifier_registry() {
  static const RegistryEntry entries[] = {
      {"ballot", &verify_ballot},
      {"smallball_free", &verify_smallball_free},
      {"llt", &verify_llt},
      {"berry_esseen", &verify_berry_esseen},
      {"bridge_positivity", &verify_bridge_positivity},
      {"smallball_bridge", &verify_smallball_bridge},
      {"excursion", &verify_excursion},
      {"ceiling", &verify_ceiling},
      {"tails", &verify_tails},
      {"coarse_grain", &verify_coarse_grain},
      {"gaussian_swap", &verify_gaussian_swap},
      {"moment_lemmas", &verify_moment_lemmas},
      {"truncation", &verify_truncation},
      {"theta", &verify_theta},
  };
  return entries;
}

bool is_verifier(const std::string& id) {
  for (const auto& e : verifier_registry()) {
    if (id == e.id) return true;
  }
  return false;
}

VerificationReport run_verifier(const std::string& id, const FamilySpec& family, const HarnessOptions& opt) {
  for (const auto& e : verifier_registry()) {
    if (id == e.id) return e.fn(family, opt);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown verifier '" + id + "'");
}

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double from_num(const json& j) { return j.is_number() ? j.get<double>() : kNaN; }

const std::pair<const char*, double GridInputs::*> kInputs[] = {
    {"n", &GridInputs::n},         {"u", &GridInputs::u},      {"v", &GridInputs::v},
    {"k", &GridInputs::k},         {"lambda", &GridInputs::lambda}, {"s", &GridInputs::s},
    {"t", &GridInputs::t},         {"K", &GridInputs::K},      {"x", &GridInputs::x},
    {"alpha", &GridInputs::alpha}, {"y", &GridInputs::y},      {"strict", &GridInputs::strict},
};

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

json report_json(const VerificationReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json in = json::object();
    for (const auto& [name, field] : kInputs) {
      if (!std::isnan(row.in.*field)) in[name] = row.in.*field;
    }
    rows.push_back(json{{"member", row.member},
                        {"part", row.part},
                        {"inputs", in},
                        {"value", num(row.value)},
                        {"logValue", num(row.log_value)},
                        {"normalized", num(row.normalized)},
                        {"logNormalized", num(row.log_normalized)},
                        {"envelopeX", num(row.envelope_x)},
                        {"skipped", row.skipped},
                        {"note", row.note}});
  }
  json constants = json::array();
  for (const auto& c : r.constants) constants.push_back(json{{"name", c.name}, {"value", num(c.value)}});
  return json{{"theoremId", r.theorem_id}, {"family", r.family},       {"pass", r.pass},
              {"spread", num(r.spread)},   {"spreadCap", r.spread_cap}, {"gridPoints", r.grid_points},
              {"skipped", r.skipped},      {"notes", r.notes},         {"constants", constants},
              {"rows", rows}};
}

VerificationReport report_from_json(const json& j) {
  try {
    VerificationReport r;
    r.theorem_id = j.at("theoremId").get<std::string>();
    r.family = j.at("family").get<std::string>();
    r.pass = j.at("pass").get<bool>();
    r.spread = from_num(j.at("spread"));
    r.spread_cap = from_num(j.at("spreadCap"));
    r.grid_points = j.at("gridPoints").get<std::size_t>();
    r.skipped = j.at("skipped").get<std::size_t>();
    r.notes = j.at("notes").get<std::vector<std::string>>();
    for (const auto& c : j.at("constants")) r.constants.push_back({c.at("name").get<std::string>(), from_num(c.at("value"))});
    for (const auto& rj : j.at("rows")) {
      ReportRow row;
      row.member = rj.at("member").get<std::string>();
      row.part = rj.at("part").get<std::string>();
      const json& in = rj.at("inputs");
      for (const auto& [name, field] : kInputs) {
        if (in.contains(name)) row.in.*field = in.at(name).get<double>();
      }
      row.value = from_num(rj.at("value"));
      row.log_value = from_num(rj.at("logValue"));
      row.normalized = from_num(rj.at("normalized"));
      row.log_normalized = from_num(rj.at("logNormalized"));
      row.envelope_x = from_num(rj.at("envelopeX"));
      row.skipped = rj.at("skipped").get<bool>();
      row.note = rj.at("note").get<std::string>();
      r.rows.push_back(std::move(row));
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("report: ") + e.what());
  }
}

std::string reports_to_json(const std::vector<VerificationReport>& reports) {
  json arr = json::array();
  for (const auto& r : reports) arr.push_back(report_json(r));
  return arr.dump(2) + "\n";
}

std::string csv_header() {
  return "theorem,member,part,n,u,v,k,lambda,s,t,K,x,alpha,y,strict,value,log_value,normalized,log_normalized,"
         "envelope_x,skipped,note\n";
}

std::string reports_to_csv(const std::vector<VerificationReport>& reports) {
  std::ostringstream out;
  out << csv_header();
  for (const auto& r : reports) {
    for (const auto& row : r.rows) {
      out << r.theorem_id << ',' << csv_escape(row.member) << ',' << csv_escape(row.part);
      for (const auto& [name, field] : kInputs) out << ',' << fmt(row.in.*field);
      out << ',' << fmt(row.value) << ',' << fmt(row.log_value) << ',' << fmt(row.normalized) << ','
          << fmt(row.log_normalized) << ',' << fmt(row.envelope_x) << ',' << (row.skipped ? 1 : 0) << ','
          << csv_escape(row.note) << '\n';
    }
  }
  return out.str();
}

std::vector<IncrementLaw> random_centered_laws(std::size_t count, std::uint64_t seed) {
  auto rng = make_engine(seed, 0x1a55);
  std::uniform_int_distribution<int> natoms(2, 6), atom(-8, 8);
  std::uniform_real_distribution<double> w(0.05, 1.0);
  std::vector<IncrementLaw> out;
  while (out.size() < count) {
    std::set<int> support;
    const int k = natoms(rng);
    while (static_cast<int>(support.size()) < k) support.insert(atom(rng));
    std::vector<double> atoms(support.begin(), support.end()), weights;
    for (std::size_t i = 0; i < atoms.size(); ++i) weights.push_back(w(rng));
    // Rebalance: shift weight between the most negative and most positive
    // atoms until the mean is zero.
    if (atoms.front() >= 0 || atoms.back() <= 0) continue;
    double total = 0.0, m = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      total += weights[i];
      m += weights[i] * atoms[i];
    }
    m /= total;
    const std::size_t fix = m > 0 ? 0 : atoms.size() - 1;
    // Extra weight e at atoms[fix] zeroes the mean: (m total + e a) / (total + e) = 0.
    const double e = -m * total / atoms[fix];
    if (e < 0.0) continue;
    weights[fix] += e;
    IncrementLaw law = validate_law(atoms, weights, true);
    if (std::abs(mean(law)) > 1e-12) continue;  // rounding miss; draw again
    out.push_back(std::move(law));
  }
  return out;
}

}  // namespace inhomwalk
