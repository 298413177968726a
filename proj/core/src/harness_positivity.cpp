#include <algorithm>
#include <cmath>
#include <set>

#include "harness_detail.hpp"
#include "inhomwalk/engine.hpp"

namespace inhomwalk {

using namespace detail;

namespace {

const std::vector<std::size_t> kFullN{64, 128, 256, 512, 1024, 4096};
const std::vector<std::size_t> kMidN{256, 1024, 4096};

std::size_t max_of(const std::vector<std::size_t>& v) { return v.empty() ? 0 : *std::max_element(v.begin(), v.end()); }

double ln(double x) { return std::log(x); }

// Two-sided envelope with rates; pass needs finite positive constants, a
// decaying upper line and spread within the cap.
bool two_sided(VerificationReport& rep, const Envelope& env, const std::string& prefix = "") {
  const bool ok = record_envelope(rep, prefix, env, true);
  const double spread = env.points ? env.spread() : kNaN;
  if (prefix.empty()) rep.spread = spread;
  if (env.points && !(spread <= rep.spread_cap)) {
    rep.notes.push_back(prefix + "spread " + std::to_string(spread) + " exceeds the cap");
    return false;
  }
  return ok;
}

struct MemberN {
  std::size_t member;
  std::size_t n;
};

std::vector<MemberN> member_n_tasks(const FamilySpec& fam, const std::vector<std::size_t>& ns) {
  std::vector<MemberN> out;
  for (std::size_t m = 0; m < fam.members.size(); ++m) {
    for (std::size_t n : ns) out.push_back({m, n});
  }
  return out;
}

}  // namespace

VerificationReport verify_ballot(const FamilySpec& fam, const HarnessOptions& opt) {
  const auto ns = fam.grids.ns("ballot", kFullN);
  auto rep = begin("ballot", fam, opt, max_of(ns));
  std::vector<std::pair<MemberN, bool>> tasks;
  for (const auto& t : member_n_tasks(fam, ns)) {
    tasks.push_back({t, false});
    tasks.push_back({t, true});
  }
  rep.rows = run_tasks(tasks.size(), opt, [&](std::size_t i) {
    const auto [mn, strict] = tasks[i];
    const MemberSpec& m = fam.members[mn.member];
    const StepSchedule s = m.schedule(mn.n);
    const double root = std::sqrt(static_cast<double>(mn.n));
    const auto us = uv_values(fam.grids, mn.n, fam.grids.a_prime * root);
    std::vector<ReportRow> rows;
    if (us.empty()) return rows;
    const PathConstraint floor = centered_tube(s, 0.0, kInf, strict);
    const PositionDistribution all = event_prob_all_starts(s, floor, 0, us.back());
    for (std::int64_t u : us) {
      ReportRow r = make_row(m.name, strict ? "strict" : "weak");
      r.in.n = static_cast<double>(mn.n);
      r.in.u = static_cast<double>(u);
      r.in.strict = strict ? 1.0 : 0.0;
      set_log_value(r, all.log_at(u), ln((static_cast<double>(u) + 1.0) / root));
      rows.push_back(std::move(r));
    }
    return rows;
  });
  const bool skips_ok = settle_rows(rep);
  const Envelope env = fit_rows(rep.rows, [](const ReportRow&) { return true; }, false);
  bool ok = record_envelope(rep, "", env, false);
  rep.spread = env.points ? env.spread() : kNaN;
  if (env.points && !(rep.spread <= rep.spread_cap)) {
    rep.notes.push_back("spread exceeds the cap");
    ok = false;
  }
  finish(rep, ok, skips_ok);
  return rep;
}

VerificationReport verify_bridge_positivity(const FamilySpec& fam, const HarnessOptions& opt) {
  const auto ns = fam.grids.ns("bridge_positivity", kFullN);
  auto rep = begin("bridge_positivity", fam, opt, max_of(ns));
  struct Task {
    MemberN mn;
    std::int64_t v;
  };
  std::vector<Task> tasks;
  for (const auto& t : member_n_tasks(fam, ns)) {
    for (std::int64_t v : uv_values(fam.grids, t.n, std::pow(static_cast<double>(t.n), fam.grids.bridge_alpha))) {
      tasks.push_back({t, v});
    }
  }
  rep.rows = run_tasks(tasks.size(), opt, [&](std::size_t i) {
    const Task& t = tasks[i];
    const MemberSpec& m = fam.members[t.mn.member];
    const std::size_t n = t.mn.n;
    const double nd = static_cast<double>(n);
    const double root = std::sqrt(nd);
    const StepSchedule s = m.schedule(n);
    const auto us = uv_values(fam.grids, n, std::pow(nd, fam.grids.bridge_alpha));
    std::vector<ReportRow> rows;
    LatticeEndpoint e;
    if (!endpoint_in(s, static_cast<double>(t.v), 0.0, kInf, e)) return rows;
    const PathConstraint pc = centered_tube(s, 0.0, kInf).with_endpoint(e.y);
    const PositionDistribution all = event_prob_all_starts(s, pc, 0, us.back());
    for (std::int64_t u : us) {
      const double ud = static_cast<double>(u);
      ReportRow r = make_row(m.name, "bridge");
      r.in.n = nd;
      r.in.u = ud;
      r.in.v = e.effective_v;
      r.in.y = static_cast<double>(e.y);
      r.envelope_x = (ud - e.effective_v) * (ud - e.effective_v) / nd;
      set_log_value(r, all.log_at(u),
                    ln(std::min(ud + 1.0, root)) + ln(std::min(e.effective_v + 1.0, root)) - 1.5 * ln(nd));
      rows.push_back(std::move(r));
    }
    return rows;
  });
  const bool skips_ok = settle_rows(rep);
  const Envelope env = fit_rows(rep.rows, [](const ReportRow&) { return true; }, true);
  finish(rep, two_sided(rep, env), skips_ok);
  return rep;
}

namespace {

// Floor at 0 and ceiling at lambda, pinned endpoints, all starts per endpoint.
std::vector<ReportRow> strip_rows(const MemberSpec& m, std::size_t n, std::int64_t lambda,
                                  const std::vector<std::int64_t>& values, double max_gap, bool wide) {
  const StepSchedule s = m.schedule(n);
  const double nd = static_cast<double>(n);
  const double root = std::sqrt(nd);
  const double lam = static_cast<double>(lambda);
  std::vector<ReportRow> rows;
  const PathConstraint tube = centered_tube(s, 0.0, lam);
  auto factor = [&](double w) {
    const double edge = std::min(w, lam - w);
    return std::max(0.0, wide ? std::min(edge, root) : edge) + 1.0;
  };
  for (std::int64_t v : values) {
    LatticeEndpoint e;
    if (!endpoint_in(s, static_cast<double>(v), 0.0, lam, e)) continue;
    const PositionDistribution all = event_prob_all_starts(s, tube.with_endpoint(e.y), 0, lambda);
    for (std::int64_t u : values) {
      const double ud = static_cast<double>(u);
      if (std::abs(ud - e.effective_v) > max_gap + 1e-9) continue;
      ReportRow r = make_row(m.name, wide ? "ceiling" : "excursion");
      r.in.n = nd;
      r.in.lambda = lam;
      r.in.u = ud;
      r.in.v = e.effective_v;
      r.in.y = static_cast<double>(e.y);
      double log_pre = ln(factor(ud)) + ln(factor(e.effective_v));
      if (wide) {
        r.envelope_x = (ud - e.effective_v) * (ud - e.effective_v) / nd;
        log_pre -= 1.5 * ln(nd);
      } else {
        r.envelope_x = nd / (lam * lam);
        log_pre -= 3.0 * ln(lam);
      }
      set_log_value(r, all.log_at(u), log_pre);
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

}  // namespace

VerificationReport verify_excursion(const FamilySpec& fam, const HarnessOptions& opt) {
  const auto ns = fam.grids.ns("excursion", kMidN);
  auto rep = begin("excursion", fam, opt, max_of(ns));
  struct Task {
    MemberN mn;
    std::int64_t lambda;
  };
  std::vector<Task> tasks;
  for (const auto& t : member_n_tasks(fam, ns)) {
    for (std::int64_t l : lambdas(fam.grids, t.n)) tasks.push_back({t, l});
  }
  rep.rows = run_tasks(tasks.size(), opt, [&](std::size_t i) {
    const Task& t = tasks[i];
    const std::int64_t l = t.lambda;
    std::set<std::int64_t> vals{0, 1, l / 2, l - 1, l};
    return strip_rows(fam.members[t.mn.member], t.mn.n, l, {vals.begin(), vals.end()}, kInf, false);
  });
  const bool skips_ok = settle_rows(rep);
  const Envelope env = fit_rows(rep.rows, [](const ReportRow&) { return true; }, true);
  finish(rep, two_sided(rep, env), skips_ok);
  return rep;
}

VerificationReport verify_ceiling(const FamilySpec& fam, const HarnessOptions& opt) {
  const auto ns = fam.grids.ns("ceiling", kMidN);
  auto rep = begin("ceiling", fam, opt, max_of(ns));
  struct Task {
    MemberN mn;
    std::int64_t lambda;
  };
  std::vector<Task> tasks;
  for (const auto& t : member_n_tasks(fam, ns)) {
    const auto r = static_cast<std::int64_t>(std::ceil(std::sqrt(static_cast<double>(t.n)) - 1e-9));
    for (std::int64_t mult : {1, 2, 4}) tasks.push_back({t, mult * r});
  }
  rep.rows = run_tasks(tasks.size(), opt, [&](std::size_t i) {
    const Task& t = tasks[i];
    const std::int64_t l = t.lambda;
    const double gap = std::pow(static_cast<double>(t.mn.n), fam.grids.bridge_alpha);
    auto base = uv_values(fam.grids, t.mn.n, static_cast<double>(l));
    std::set<std::int64_t> vals(base.begin(), base.end());
    vals.insert(l - 1);
    vals.insert(l);
    return strip_rows(fam.members[t.mn.member], t.mn.n, l, {vals.begin(), vals.end()}, gap, true);
  });
  const bool skips_ok = settle_rows(rep);
  const Envelope env = fit_rows(rep.rows, [](const ReportRow&) { return true; }, true);
  finish(rep, two_sided(rep, env), skips_ok);
  return rep;
}

VerificationReport verify_tails(const FamilySpec& fam, const HarnessOptions& opt) {
  const auto ns = fam.grids.ns("tails", kMidN);
  auto rep = begin("tails", fam, opt, max_of(ns));
  const auto tasks = member_n_tasks(fam, ns);
  rep.rows = run_tasks(tasks.size(), opt, [&](std::size_t i) {
    const MemberSpec& m = fam.members[tasks[i].member];
    const std::size_t n = tasks[i].n;
    const double nd = static_cast<double>(n);
    const double root = std::sqrt(nd);
    std::vector<double> ts;
    for (double t : fam.grids.t) {
      if (t <= std::pow(nd, fam.grids.tail_beta) + 1e-12) ts.push_back(t);
    }
    std::vector<ReportRow> rows;
    if (ts.empty()) return rows;
    const double tmax = *std::max_element(ts.begin(), ts.end());
    const auto values = uv_values(fam.grids, n, tmax * root / 2.0);
    const std::vector<std::size_t> ks{(n + 2) / 3, n / 2, 2 * n / 3};
    const StepSchedule s = m.schedule(n);
    const PathConstraint floor = centered_tube(s, 0.0, kInf);

    std::vector<std::vector<PositionDistribution>> fwd;
    for (std::int64_t u : values) fwd.push_back(forward_marginals(u, s, floor, ks));
    for (std::int64_t v : values) {
      LatticeEndpoint e;
      if (!endpoint_in(s, static_cast<double>(v), 0.0, kInf, e)) continue;
      const PathConstraint pinned = floor.with_endpoint(e.y);
      for (std::size_t ki = 0; ki < ks.size(); ++ki) {
        const std::size_t k = ks[ki];
        std::int64_t lo = fwd[0][ki].lo(), hi = fwd[0][ki].hi();
        for (const auto& f : fwd) {
          lo = std::min(lo, f[ki].lo());
          hi = std::max(hi, f[ki].hi());
        }
        const PositionDistribution h = backward(s, pinned, k, lo, hi);
        const double mk = s.partial_mean(k);
        for (std::size_t ui = 0; ui < values.size(); ++ui) {
          const double ud = static_cast<double>(values[ui]);
          const PositionDistribution& f = fwd[ui][ki];
          for (double t : ts) {
            if (ud > t * root / 2.0 + 1e-9 || e.effective_v > t * root / 2.0 + 1e-9) continue;
            const auto first = static_cast<std::int64_t>(std::ceil(mk + t * root - 1e-9));
            double sum = 0.0;
            for (std::int64_t x = std::max(first, f.lo()); x <= f.hi(); ++x) {
              if (x < h.lo() || x > h.hi()) continue;
              sum += f.mass[static_cast<std::size_t>(x - f.offset)] * h.mass[static_cast<std::size_t>(x - h.offset)];
            }
            ReportRow r = make_row(m.name, "tail");
            r.in.n = nd;
            r.in.u = ud;
            r.in.v = e.effective_v;
            r.in.k = static_cast<double>(k);
            r.in.t = t;
            r.in.y = static_cast<double>(e.y);
            r.envelope_x = t * t;
            const double log_p = sum > 0.0 ? std::log(sum) + f.log_scale + h.log_scale : -kInf;
            set_log_value(r, log_p,
                          ln(std::min(ud + 1.0, root)) + ln(std::min(e.effective_v + 1.0, root)) - ln(t) -
                              1.5 * ln(nd));
            rows.push_back(std::move(r));
          }
        }
      }
    }
    return rows;
  });
  const bool skips_ok = settle_rows(rep);
  const Envelope env = fit_rows(rep.rows, [](const ReportRow&) { return true; }, true);
  finish(rep, two_sided(rep, env), skips_ok);
  return rep;
}

}  // namespace inhomwalk
