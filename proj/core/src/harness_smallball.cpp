#include <algorithm>
#include <cmath>
#include <numbers>

#include "harness_detail.hpp"
#include "inhomwalk/engine.hpp"
#include "inhomwalk/gaussian.hpp"

namespace inhomwalk {

using namespace detail;

namespace {

std::size_t max_of(const std::vector<std::size_t>& v) { return v.empty() ? 0 : *std::max_element(v.begin(), v.end()); }

// log of the summed mass over [lo, hi].
double log_mass_between(const PositionDistribution& d, double lo, double hi) {
  const auto first = std::max(d.lo(), static_cast<std::int64_t>(std::ceil(lo - 1e-9)));
  const auto last = std::min(d.hi(), static_cast<std::int64_t>(std::floor(hi + 1e-9)));
  double sum = 0.0;
  for (std::int64_t x = first; x <= last; ++x) sum += d.mass[static_cast<std::size_t>(x - d.offset)];
  return sum > 0.0 ? std::log(sum) + d.log_scale : -kInf;
}

// Smallest z with Theta_J(z) >= q; +inf when q is at least Theta_J(8) (= 1
// to double precision).
double theta_inverse(double q) {
  if (!(q > 0.0)) return 0.0;
  const double target = std::log(q);
  double lo = 1e-3, hi = 8.0;
  if (target >= log_jacobi_theta(hi)) return kInf;
  if (target <= log_jacobi_theta(lo)) return lo;
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    (log_jacobi_theta(mid) < target ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace

VerificationReport verify_smallball_free(const FamilySpec& fam, const HarnessOptions& opt) {
  const auto ns = fam.grids.ns("smallball_free", {1024, 4096});
  auto rep = begin("smallball_free", fam, opt, max_of(ns));
  struct Task {
    std::size_t member, n;
  };
  std::vector<Task> tasks;
  for (std::size_t m = 0; m < fam.members.size(); ++m) {
    for (std::size_t n : ns) tasks.push_back({m, n});
  }
  rep.rows = run_tasks(tasks.size(), opt, [&](std::size_t i) {
    const MemberSpec& m = fam.members[tasks[i].member];
    const std::size_t n = tasks[i].n;
    const double nd = static_cast<double>(n);
    const StepSchedule s = m.schedule(n);
    const double mn = s.partial_mean(n);
    std::vector<ReportRow> rows;
    for (std::int64_t l : lambdas(fam.grids, n)) {
      const double lam = static_cast<double>(l);
      const PositionDistribution d = forward(0, s, centered_tube(s, -lam, lam), n);
      const double log_p[2] = {log_mass_between(d, mn - lam / 2.0, mn + lam / 2.0), d.log_total()};
      for (int part = 0; part < 2; ++part) {
        ReportRow r = make_row(m.name, part == 0 ? "lower" : "upper");
        r.in.n = nd;
        r.in.lambda = lam;
        r.log_value = log_p[part];
        r.value = std::exp(log_p[part]);
        if (!std::isfinite(log_p[part])) {
          r.skipped = true;
          r.note = "zero probability";
        } else {
          r.normalized = -lam * lam * log_p[part] / nd;
          r.log_normalized = std::log(r.normalized);
        }
        rows.push_back(std::move(r));
      }
    }
    return rows;
  });
  const bool skips_ok = settle_rows(rep);
  double lb_rate = 0.0, ub_rate = kInf, lo = kInf, hi = 0.0;
  for (const auto& r : rep.rows) {
    if (r.skipped) continue;
    if (r.part == "lower") {
      lb_rate = std::max(lb_rate, r.normalized);
    } else {
      ub_rate = std::min(ub_rate, r.normalized);
    }
    lo = std::min(lo, r.normalized);
    hi = std::max(hi, r.normalized);
  }
  add_constant(rep, "c_lower_bound", lb_rate);
  add_constant(rep, "c_upper_bound", ub_rate);
  rep.spread = hi / lo;
  add_constant(rep, "spread", rep.spread);
  bool ok = true;
  if (rep.rows.size() > rep.skipped) {
    ok = ub_rate > 0.0 && std::isfinite(lb_rate);
    if (!(rep.spread <= rep.spread_cap)) {
      rep.notes.push_back("rate spread exceeds the cap");
      ok = false;
    }
  }
  finish(rep, ok, skips_ok);
  return rep;
}

VerificationReport verify_smallball_bridge(const FamilySpec& fam, const HarnessOptions& opt) {
  const auto ns = fam.grids.ns("smallball_bridge", {256, 1024, 4096});
  auto rep = begin("smallball_bridge", fam, opt, max_of(ns));
  const double eps = fam.grids.epsilon;
  struct Task {
    std::size_t member, n;
  };
  std::vector<Task> tasks;
  for (std::size_t m = 0; m < fam.members.size(); ++m) {
    for (std::size_t n : ns) tasks.push_back({m, n});
  }
  rep.rows = run_tasks(tasks.size(), opt, [&](std::size_t i) {
    const MemberSpec& m = fam.members[tasks[i].member];
    const std::size_t n = tasks[i].n;
    const double nd = static_cast<double>(n);
    const double root = std::sqrt(nd);
    const StepSchedule s = m.schedule(n);
    const double B = s.partial_var(n);
    std::vector<ReportRow> rows;
    // Tube of width s sqrt(n) around [0, x] against the Gaussian density.
    for (std::int64_t x : uv_values(fam.grids, n, root)) {
      LatticeEndpoint e;
      if (!endpoint_in(s, static_cast<double>(x), -kInf, kInf, e)) continue;
      const double xe = e.effective_v;
      const double log_gauss = -0.5 * std::log(2.0 * std::numbers::pi * B) - xe * xe / (2.0 * B);
      for (double sw : fam.grids.s) {
        const PathConstraint tube = centered_tube(s, std::min(0.0, xe) - sw * root, std::max(0.0, xe) + sw * root);
        const PositionDistribution d = forward(0, s, tube, n);
        ReportRow r = make_row(m.name, "tube");
        r.in.n = nd;
        r.in.x = xe;
        r.in.s = sw;
        r.in.y = static_cast<double>(e.y);
        set_log_value(r, d.log_at(e.y), log_gauss);
        rows.push_back(std::move(r));
      }
    }
    // Tube of half-width lambda with a pinned endpoint.
    for (std::int64_t l : lambdas(fam.grids, n)) {
      const double lam = static_cast<double>(l);
      const PositionDistribution d = forward(0, s, centered_tube(s, -lam, lam), n);
      for (double target : {0.0, std::floor(lam / 2.0), std::floor((1.0 - eps) * lam), lam}) {
        LatticeEndpoint e;
        if (!endpoint_in(s, target, -lam, lam, e)) continue;
        const bool inner = std::abs(e.effective_v) <= (1.0 - eps) * lam + 1e-9;
        ReportRow r = make_row(m.name, inner ? "lambda_inner" : "lambda_edge");
        r.in.n = nd;
        r.in.lambda = lam;
        r.in.x = e.effective_v;
        r.in.y = static_cast<double>(e.y);
        r.envelope_x = nd / (lam * lam);
        set_log_value(r, d.log_at(e.y), -std::log(lam));
        rows.push_back(std::move(r));
      }
    }
    return rows;
  });
  const bool skips_ok = settle_rows(rep);

  // Fitted c' = min Theta_J^{-1}(q) / s; the (1 - c n^-delta) factor is kept at c = 0.
  double c_prime = kInf;
  std::size_t tube_rows = 0;
  for (const auto& r : rep.rows) {
    if (r.part != "tube" || r.skipped) continue;
    ++tube_rows;
    c_prime = std::min(c_prime, theta_inverse(r.normalized) / r.in.s);
  }
  add_constant(rep, "tube_c", 0.0);
  add_constant(rep, "tube_c_prime", c_prime);
  bool ok = tube_rows == 0 || (c_prime > 0.0 && std::isfinite(c_prime));
  if (!ok) rep.notes.push_back("no positive finite c' for the tube bound");

  Envelope inner = fit_rows(rep.rows, [](const ReportRow& r) { return r.part == "lambda_inner"; }, true);
  const Envelope all = fit_rows(
      rep.rows, [](const ReportRow& r) { return r.part == "lambda_inner" || r.part == "lambda_edge"; }, true);
  inner.log_c_upper = all.log_c_upper;
  inner.rate_upper = all.rate_upper;
  ok = record_envelope(rep, "", inner, true) && ok;
  if (inner.points) {
    rep.spread = inner.spread();
    if (!(rep.spread <= rep.spread_cap)) {
      rep.notes.push_back("spread exceeds the cap");
      ok = false;
    }
  }
  finish(rep, ok, skips_ok);
  return rep;
}

VerificationReport verify_coarse_grain(const FamilySpec& fam, const HarnessOptions& opt) {
  const auto ns = fam.grids.ns("coarse_grain", {64, 256, 1024});
  auto rep = begin("coarse_grain", fam, opt, max_of(ns));
  const double eps = fam.grids.epsilon;
  struct Task {
    std::size_t member, n;
  };
  std::vector<Task> tasks;
  for (std::size_t m = 0; m < fam.members.size(); ++m) {
    for (std::size_t n : ns) tasks.push_back({m, n});
  }
  rep.rows = run_tasks(tasks.size(), opt, [&](std::size_t i) {
    const MemberSpec& m = fam.members[tasks[i].member];
    const std::size_t n = tasks[i].n;
    const double nd = static_cast<double>(n);
    const double root = std::sqrt(nd);
    const StepSchedule s = m.schedule(n);
    const PositionDistribution free = forward(0, s, PathConstraint::none(n), n);
    std::vector<ReportRow> rows;
    for (std::int64_t x : uv_values(fam.grids, n, root)) {
      LatticeEndpoint e;
      if (!endpoint_in(s, static_cast<double>(x), -kInf, kInf, e)) continue;
      const double xe = e.effective_v;
      const double log_bridge = free.log_at(e.y);
      for (double kk : fam.grids.K) {
        const double K = kk * root;
        if (K > eps * nd + 1e-9) continue;
        ReportRow r = make_row(m.name, "deviation");
        r.in.n = nd;
        r.in.x = xe;
        r.in.K = K;
        r.in.y = static_cast<double>(e.y);
        r.envelope_x = K * K / nd;
        if (!std::isfinite(log_bridge)) {
          r.skipped = true;
          r.note = "parity: endpoint unreachable";
          rows.push_back(std::move(r));
          continue;
        }
        const PathConstraint tube =
            centered_tube(s, std::min(0.0, xe) - K, std::max(0.0, xe) + K, true, true).with_endpoint(e.y);
        const double dev = exit_event_prob(0, s, tube);
        if (dev <= 0.0) {
          r.value = 0.0;
          r.log_value = -kInf;
          r.normalized = 0.0;
          r.note = "no deviation possible";
        } else {
          set_log_value(r, std::log(dev) - log_bridge, 1.5 * std::log(nd));
        }
        rows.push_back(std::move(r));
      }
    }
    return rows;
  });
  const bool skips_ok = settle_rows(rep);

  // Upper line in K^2/n after removing c' x^2/n, with c' chosen on a grid to
  // make the line tightest.
  double best_obj = kInf, best_cp = 0.0;
  Envelope best;
  for (int j = 0; j <= 60; ++j) {
    const double cp = 0.05 * j;
    std::vector<std::pair<double, double>> pts;
    double mean_y = 0.0, mean_x = 0.0;
    for (const auto& r : rep.rows) {
      if (r.skipped || !std::isfinite(r.log_normalized)) continue;
      const double y = r.log_normalized - cp * r.in.x * r.in.x / r.in.n;
      pts.emplace_back(r.envelope_x, y);
      mean_y += y;
      mean_x += r.envelope_x;
    }
    if (pts.empty()) break;
    const Envelope env = fit_envelope(pts, true);
    const double np = static_cast<double>(pts.size());
    const double obj = env.log_c_upper - env.rate_upper * mean_x / np - mean_y / np;
    if (obj < best_obj - 1e-12) {
      best_obj = obj;
      best_cp = cp;
      best = env;
    }
  }
  add_constant(rep, "C", std::exp(best.log_c_upper));
  add_constant(rep, "c", best.rate_upper);
  add_constant(rep, "c_prime", best_cp);
  bool ok = true;
  if (best.points) {
    ok = std::isfinite(best.log_c_upper) && best.rate_upper > 0.0;
    if (!ok) rep.notes.push_back("no decaying upper envelope");
  }
  finish(rep, ok, skips_ok);
  return rep;
}

VerificationReport verify_gaussian_swap(const FamilySpec& fam, const HarnessOptions& opt) {
  const auto& blocks = fam.grids.swap_blocks;
  const double alpha = fam.grids.swap_alpha;
  const double beta = std::min(2.0 - 3.0 * alpha, 1.0 / 3.0);
  auto rep = begin("gaussian_swap", fam, opt, 3 * (blocks.empty() ? 0 : *std::max_element(blocks.begin(), blocks.end())));
  struct Task {
    std::size_t member, block;
  };
  std::vector<Task> tasks;
  for (std::size_t m = 0; m < fam.members.size(); ++m) {
    for (std::size_t b : blocks) tasks.push_back({m, b});
  }
  rep.rows = run_tasks(tasks.size(), opt, [&](std::size_t i) {
    const MemberSpec& m = fam.members[tasks[i].member];
    const std::size_t L = tasks[i].block;
    const std::size_t n = 3 * L;
    const StepSchedule s = m.schedule(n);
    const double cap = std::pow(static_cast<double>(L), alpha);
    const double r = std::sqrt(static_cast<double>(L));

    // Checkpoint sets: a window, every other lattice point of a window, a wider window.
    std::vector<std::vector<std::int64_t>> sets(3);
    const double halfwidth[3] = {r, r, 1.5 * r};
    for (int j = 0; j < 3; ++j) {
      const double mj = s.partial_mean((j + 1) * L);
      const auto lo = static_cast<std::int64_t>(std::ceil(mj - halfwidth[j] - 1e-9));
      const auto hi = static_cast<std::int64_t>(std::floor(mj + halfwidth[j] + 1e-9));
      const auto anchor = static_cast<std::int64_t>(std::llround(mj));
      for (std::int64_t y = lo; y <= hi; ++y) {
        if (j == 1 && (y - anchor) % 2 != 0) continue;
        sets[j].push_back(y);
      }
    }

    // Lattice side: chained block kernels with caps on the centered increments.
    const PathConstraint none = PathConstraint::none(n);
    std::vector<double> prev{1.0};
    std::vector<std::int64_t> prev_pts{0};
    for (int j = 0; j < 3; ++j) {
      const std::size_t from = j * L, to = (j + 1) * L;
      const double shift = s.partial_mean(to) - s.partial_mean(from);
      const auto& ys = sets[j];
      const Eigen::MatrixXd K =
          block_kernel(s, from, to, none, prev_pts.front(), prev_pts.back(), ys.front(), ys.back());
      std::vector<double> next(ys.size(), 0.0);
      for (std::size_t a = 0; a < prev_pts.size(); ++a) {
        for (std::size_t b = 0; b < ys.size(); ++b) {
          if (std::abs(static_cast<double>(ys[b] - prev_pts[a]) - shift) > cap + 1e-9) continue;
          next[b] += prev[a] * K(prev_pts[a] - prev_pts.front(), ys[b] - ys.front());
        }
      }
      prev = std::move(next);
      prev_pts = ys;
    }
    double lattice = 0.0;
    for (double p : prev) lattice += p;

    // Gaussian side: unit cells around the centered set points.
    GaussianSchedule g;
    double vmax = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      g.variances.push_back(variance(s.law(k)));
      vmax = std::max(vmax, g.variances.back());
    }
    g.sigma_plus = std::sqrt(vmax);
    std::vector<GaussCheckpoint> cps;
    for (int j = 0; j < 3; ++j) {
      const double mj = s.partial_mean((j + 1) * L);
      auto cells = unit_cells(sets[j]);
      for (auto& c : cells) {
        c.first -= mj;
        c.second -= mj;
      }
      cps.push_back({(j + 1) * L, cells, cap});
    }
    const GaussProb gp = gaussian_checkpoint_prob(g, cps);

    ReportRow row = make_row(m.name, "swap");
    row.in.n = static_cast<double>(n);
    row.in.k = static_cast<double>(L);
    row.in.alpha = alpha;
    row.envelope_x = 3.0 * std::pow(static_cast<double>(L), -beta);
    row.value = lattice;
    row.log_value = std::log(lattice);
    if (lattice > 0.0 && gp.value > 0.0) {
      row.normalized = lattice / gp.value;
      row.log_normalized = std::log(row.normalized);
    } else {
      row.skipped = true;
      row.note = "zero probability";
    }
    return std::vector<ReportRow>{row};
  });
  const bool skips_ok = settle_rows(rep);
  double c = 0.0;
  bool monotone = true;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& r = rep.rows[i];
    if (r.skipped) continue;
    c = std::max(c, std::abs(r.log_normalized) / r.envelope_x);
    if (i > 0 && rep.rows[i - 1].member == r.member && !rep.rows[i - 1].skipped &&
        std::abs(r.log_normalized) > std::abs(rep.rows[i - 1].log_normalized)) {
      monotone = false;
      rep.notes.push_back("member " + r.member + ": |ln ratio| grows at block " + std::to_string(r.in.k) +
                          " (diagnostic only)");
    }
  }
  add_constant(rep, "c", c);
  add_constant(rep, "beta", beta);
  add_constant(rep, "monotone", monotone ? 1.0 : 0.0);
  finish(rep, std::isfinite(c), skips_ok);
  return rep;
}

}  // namespace inhomwalk
