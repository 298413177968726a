#include "inhomwalk/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "inhomwalk/error.hpp"
#include "inhomwalk/rng.hpp"
#include "inhomwalk/spectral.hpp"

namespace inhomwalk {

namespace {

constexpr double kTermCut = 1e-16;
constexpr double kDualBelow = 0.8;
constexpr double kQuadRelTol = 1e-7;
constexpr std::size_t kMaxQuadratureCheckpoints = 8;

void require_positive(double z) {
  if (!(z > 0.0)) throw Error(ErrorCode::NonPositiveArgument, "theta needs z > 0");
}

}  // namespace

double jacobi_theta_alternating(double z) {
  require_positive(z);
  double s = 0.0;
  for (int k = 1;; ++k) {
    const double term = std::exp(-2.0 * z * z * k * k);
    s += (k % 2 ? -term : term);
    if (term < kTermCut) break;
  }
  return 1.0 + 2.0 * s;
}

double jacobi_theta_dual(double z) {
  require_positive(z);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  double s = 0.0;
  for (int k = 1;; k += 2) {
    const double term = std::exp(-pi2 * k * k / (8.0 * z * z));
    s += term;
    if (term < kTermCut * s || term == 0.0) break;
  }
  return std::sqrt(2.0 * std::numbers::pi) / z * s;
}

double log_jacobi_theta(double z) {
  require_positive(z);
  if (z >= kDualBelow) return std::log(jacobi_theta_alternating(z));
  // log of (sqrt(2 pi)/z) e^{-a} (1 + sum_{k odd >= 3} e^{-a (k^2 - 1)}), a = pi^2/(8 z^2)
  const double a = std::numbers::pi * std::numbers::pi / (8.0 * z * z);
  double rest = 0.0;
  for (int k = 3;; k += 2) {
    const double term = std::exp(-a * (k * k - 1));
    rest += term;
    if (term < kTermCut) break;
  }
  return 0.5 * std::log(2.0 * std::numbers::pi) - std::log(z) - a + std::log1p(rest);
}

double jacobi_theta(double z) {
  require_positive(z);
  if (z >= kDualBelow) return jacobi_theta_alternating(z);
  return std::exp(log_jacobi_theta(z));
}

bool theta_small_z_check(double z, double epsilon) {
  const double rhs = -(1.0 + epsilon) * std::numbers::pi * std::numbers::pi / (8.0 * z * z);
  return log_jacobi_theta(z) >= rhs;
}

double theta_threshold(double epsilon, double z_lo, double z_hi, std::size_t grid) {
  double last = 0.0;
  for (std::size_t k = 0; k <= grid; ++k) {
    const double z = z_lo + (z_hi - z_lo) * static_cast<double>(k) / static_cast<double>(grid);
    if (!theta_small_z_check(z, epsilon)) break;
    last = z;
  }
  return last;
}

double bridge_covariance(const std::vector<double>& B, std::size_t i, std::size_t j) {
  if (i > j) std::swap(i, j);
  if (B.empty() || j >= B.size()) throw Error(ErrorCode::InvalidArgument, "index beyond B_n");
  const double Bn = B.back();
  if (!(Bn > 0.0)) throw Error(ErrorCode::InvalidArgument, "B_n must be positive");
  return B[i] * (Bn - B[j]) / Bn;
}

void GaussianSchedule::validate() const {
  if (variances.empty()) throw Error(ErrorCode::InvalidArgument, "empty Gaussian schedule");
  for (std::size_t i = 0; i < variances.size(); ++i) {
    if (!(variances[i] > 0.0) || variances[i] > sigma_plus * sigma_plus * (1 + 1e-12)) {
      throw Error(ErrorCode::InvalidArgument, "variance at step " + std::to_string(i + 1) + " outside (0, sigma_plus^2]");
    }
  }
}

std::vector<double> GaussianSchedule::partial_vars() const {
  std::vector<double> B(variances.size() + 1, 0.0);
  for (std::size_t i = 0; i < variances.size(); ++i) B[i + 1] = B[i] + variances[i];
  return B;
}

std::vector<std::pair<double, double>> unit_cells(const std::vector<std::int64_t>& xs, double eps) {
  std::vector<std::int64_t> v = xs;
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  std::vector<std::pair<double, double>> out;
  for (std::int64_t x : v) {
    const double a = static_cast<double>(x) - eps / 2, b = static_cast<double>(x) + eps / 2;
    if (!out.empty() && a <= out.back().second) {
      out.back().second = std::max(out.back().second, b);
    } else {
      out.emplace_back(a, b);
    }
  }
  return out;
}

namespace {

struct Rule {
  std::vector<double> t, w, bary;  // nodes and weights on [-1, 1], barycentric weights
};

template <std::size_t N>
Rule make_rule() {
  using G = boost::math::quadrature::gauss<double, N>;
  Rule r;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  for (std::size_t k = x.size(); k-- > 0;) {
    if (x[k] == 0.0) continue;
    r.t.push_back(-x[k]);
    r.w.push_back(w[k]);
  }
  for (std::size_t k = 0; k < x.size(); ++k) {
    r.t.push_back(x[k]);
    r.w.push_back(w[k]);
  }
  r.bary.resize(r.t.size());
  for (std::size_t k = 0; k < r.t.size(); ++k) {
    double p = 1.0;
    for (std::size_t m = 0; m < r.t.size(); ++m) {
      if (m != k) p *= (r.t[k] - r.t[m]);
    }
    r.bary[k] = 1.0 / p;
  }
  return r;
}

struct Panel {
  double a = 0.0, b = 0.0;
  std::vector<double> x, w, g;  // nodes, weights (scaled), density values
};

double normal_pdf(double d, double var) {
  return std::exp(-d * d / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
}

// Density of a panel at an arbitrary point, by barycentric interpolation.
double interpolate(const Panel& p, const Rule& rule, double x) {
  const double t = (2.0 * x - p.a - p.b) / (p.b - p.a);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < rule.t.size(); ++k) {
    const double d = t - rule.t[k];
    if (d == 0.0) return p.g[k];
    const double c = rule.bary[k] / d;
    num += c * p.g[k];
    den += c;
  }
  return num / den;
}

using Intervals = std::vector<std::pair<double, double>>;

Intervals intersect(const Intervals& a, double lo, double hi) {
  Intervals out;
  for (auto [x, y] : a) {
    x = std::max(x, lo);
    y = std::min(y, hi);
    if (x < y) out.emplace_back(x, y);
  }
  return out;
}

Intervals normalized(Intervals v) {
  std::sort(v.begin(), v.end());
  Intervals out;
  for (auto [a, b] : v) {
    if (!(a < b)) continue;
    if (!out.empty() && a <= out.back().second) {
      out.back().second = std::max(out.back().second, b);
    } else {
      out.emplace_back(a, b);
    }
  }
  return out;
}

// Gaussian mass of `set` for N(center, var), restricted to [center - cap, center + cap].
double mass_in(const Intervals& set, double center, double var, std::optional<double> cap) {
  const double sd = std::sqrt(var);
  double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
  if (cap) {
    lo = center - *cap;
    hi = center + *cap;
  }
  double m = 0.0;
  for (auto [a, b] : set) {
    a = std::max(a, lo);
    b = std::min(b, hi);
    if (a < b) m += normal_cdf((b - center) / sd) - normal_cdf((a - center) / sd);
  }
  return std::max(m, 0.0);
}

struct Level {
  Intervals set;
  double var = 0.0;  // variance of the increment into this level
  std::optional<double> cap;
};

double chained(const std::vector<Level>& levels, const Rule& rule) {
  // Prior: point mass at 0.
  std::vector<Panel> prev;
  bool point = true;
  for (std::size_t j = 0; j + 1 < levels.size(); ++j) {
    const Level& L = levels[j];
    const double sd = std::sqrt(L.var);
    // Domain: allowed set within reach of the previous support.
    double reach_lo, reach_hi;
    if (point) {
      reach_lo = reach_hi = 0.0;
    } else {
      reach_lo = prev.front().a;
      reach_hi = prev.back().b;
    }
    const double spread = L.cap ? std::min(*L.cap, 13.0 * sd) : 13.0 * sd;
    Intervals dom = intersect(L.set, reach_lo - spread, reach_hi + spread);
    if (dom.empty()) return 0.0;
    // Breakpoints: domain edges and kinks at previous panel edges +- cap.
    std::vector<double> cuts;
    for (auto [a, b] : dom) {
      cuts.push_back(a);
      cuts.push_back(b);
    }
    if (L.cap) {
      if (point) {
        cuts.push_back(-*L.cap);
        cuts.push_back(*L.cap);
      } else {
        for (const Panel& p : prev) {
          for (double e : {p.a, p.b}) {
            cuts.push_back(e - *L.cap);
            cuts.push_back(e + *L.cap);
          }
        }
      }
    }
    // The closing mass has kinks where x +- cap meets an edge of the last set.
    if (j + 2 == levels.size() && levels.back().cap) {
      const double c = *levels.back().cap;
      for (auto [a, b] : levels.back().set) {
        for (double e : {a, b}) {
          cuts.push_back(e - c);
          cuts.push_back(e + c);
        }
      }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::vector<Panel> cur;
    const double hmax = 0.5 * sd;
    for (auto [a, b] : dom) {
      std::vector<double> pts{a};
      for (double c : cuts) {
        if (c > a && c < b) pts.push_back(c);
      }
      pts.push_back(b);
      for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
        const double len = pts[s + 1] - pts[s];
        if (len <= 0.0) continue;
        const int pieces = std::max(1, static_cast<int>(std::ceil(len / hmax)));
        for (int q = 0; q < pieces; ++q) {
          Panel p;
          p.a = pts[s] + len * q / pieces;
          p.b = pts[s] + len * (q + 1) / pieces;
          const double half = (p.b - p.a) / 2, mid = (p.a + p.b) / 2;
          for (std::size_t k = 0; k < rule.t.size(); ++k) {
            p.x.push_back(mid + half * rule.t[k]);
            p.w.push_back(half * rule.w[k]);
          }
          cur.push_back(std::move(p));
        }
      }
    }
    for (Panel& p : cur) {
      p.g.assign(p.x.size(), 0.0);
      for (std::size_t k = 0; k < p.x.size(); ++k) {
        const double x = p.x[k];
        if (point) {
          if (!L.cap || std::abs(x) <= *L.cap) p.g[k] = normal_pdf(x, L.var);
          continue;
        }
        double s = 0.0;
        const double lo = L.cap ? x - *L.cap : -std::numeric_limits<double>::infinity();
        const double hi = L.cap ? x + *L.cap : std::numeric_limits<double>::infinity();
        for (const Panel& q : prev) {
          if (q.b <= lo || q.a >= hi) continue;
          if (q.a >= lo && q.b <= hi) {
            for (std::size_t m = 0; m < q.x.size(); ++m) s += q.w[m] * q.g[m] * normal_pdf(x - q.x[m], L.var);
          } else {
            const double a = std::max(q.a, lo), b = std::min(q.b, hi);
            const double half = (b - a) / 2, mid = (a + b) / 2;
            for (std::size_t m = 0; m < rule.t.size(); ++m) {
              const double xp = mid + half * rule.t[m];
              s += half * rule.w[m] * interpolate(q, rule, xp) * normal_pdf(x - xp, L.var);
            }
          }
        }
        p.g[k] = s;
      }
    }
    prev = std::move(cur);
    point = false;
  }
  const Level& last = levels.back();
  if (point) return mass_in(last.set, 0.0, last.var, last.cap);
  double total = 0.0;
  for (const Panel& q : prev) {
    for (std::size_t m = 0; m < q.x.size(); ++m) total += q.w[m] * q.g[m] * mass_in(last.set, q.x[m], last.var, last.cap);
  }
  return total;
}

std::vector<Level> build_levels(const GaussianSchedule& g, const std::vector<GaussCheckpoint>& cps) {
  g.validate();
  const std::vector<double> B = g.partial_vars();
  std::vector<Level> levels;
  std::size_t prev = 0;
  for (const auto& c : cps) {
    if (c.time <= prev || c.time > g.length()) {
      throw Error(ErrorCode::InvalidArgument, "checkpoint times must be strictly increasing within 1..n");
    }
    Level L;
    L.var = B[c.time] - B[prev];
    L.cap = c.inc_cap;
    const double big = 1e300;
    L.set = c.intervals.empty() ? Intervals{{-big, big}} : normalized(c.intervals);
    levels.push_back(std::move(L));
    prev = c.time;
  }
  return levels;
}

}  // namespace

GaussProb gaussian_checkpoint_mc(const GaussianSchedule& g, const std::vector<GaussCheckpoint>& checkpoints,
                                 std::size_t samples, std::uint64_t seed) {
  const std::vector<Level> levels = build_levels(g, checkpoints);
  auto rng = make_engine(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::size_t hits = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    double x = 0.0;
    bool ok = true;
    for (const Level& L : levels) {
      const double d = std::sqrt(L.var) * z(rng);
      if (L.cap && std::abs(d) > *L.cap) {
        ok = false;
        break;
      }
      x += d;
      bool in = false;
      for (auto [a, b] : L.set) {
        if (x >= a && x <= b) {
          in = true;
          break;
        }
      }
      if (!in) {
        ok = false;
        break;
      }
    }
    hits += ok;
  }
  GaussProb r;
  r.quadrature = false;
  r.samples = samples;
  r.value = static_cast<double>(hits) / static_cast<double>(samples);
  r.std_error = std::sqrt(r.value * (1 - r.value) / static_cast<double>(samples));
  return r;
}

GaussProb gaussian_checkpoint_prob(const GaussianSchedule& g, std::vector<GaussCheckpoint> checkpoints,
                                   std::size_t mc_samples, std::uint64_t seed) {
  if (checkpoints.empty()) return GaussProb{1.0, 0.0, true, 0};
  if (checkpoints.size() > kMaxQuadratureCheckpoints) return gaussian_checkpoint_mc(g, checkpoints, mc_samples, seed);
  const std::vector<Level> levels = build_levels(g, checkpoints);
  static const Rule coarse = make_rule<10>();
  static const Rule fine = make_rule<20>();
  const double p1 = chained(levels, coarse);
  const double p2 = chained(levels, fine);
  if (std::abs(p1 - p2) > kQuadRelTol * std::abs(p2) + 1e-300) {
    throw Error(ErrorCode::QuadratureNonConvergence, "checkpoint quadrature disagrees: " + std::to_string(p1) +
                                                         " vs " + std::to_string(p2));
  }
  return GaussProb{std::max(p2, 0.0), 0.0, true, 0};
}

namespace {

double dist_to_segment(double y, double x) {
  const double lo = std::min(0.0, x), hi = std::max(0.0, x);
  return std::max({0.0, lo - y, y - hi});
}

}  // namespace

McBridge mc_gaussian_bridge_smallball(const GaussianSchedule& g, double x, double s, std::size_t samples,
                                      std::uint64_t seed) {
  g.validate();
  const std::size_t n = g.length();
  const std::vector<double> B = g.partial_vars();
  const double tube = s * std::sqrt(static_cast<double>(n));
  // Per-step conditional coefficients: S_i = a + k_i (x - a) + sd_i Z.
  std::vector<double> k(n + 1), sd(n + 1);
  for (std::size_t i = 1; i < n; ++i) {
    const double rem = B[n] - B[i - 1];
    k[i] = g.variances[i - 1] / rem;
    sd[i] = std::sqrt(std::max(0.0, g.variances[i - 1] * (B[n] - B[i]) / rem));
  }
  auto rng = make_engine(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::size_t hits = 0;
  for (std::size_t r = 0; r < samples; ++r) {
    double a = 0.0;
    bool ok = true;
    for (std::size_t i = 1; i < n; ++i) {
      a = a + k[i] * (x - a) + sd[i] * z(rng);
      if (dist_to_segment(a, x) > tube) {
        ok = false;
        break;
      }
    }
    hits += ok;
  }
  McBridge out;
  out.samples = samples;
  out.value = static_cast<double>(hits) / static_cast<double>(samples);
  out.std_error = std::sqrt(out.value * (1 - out.value) / static_cast<double>(samples));
  return out;
}

std::pair<double, double> mc_bridge_variance(const GaussianSchedule& g, double x, std::size_t i, std::size_t samples,
                                             std::uint64_t seed) {
  g.validate();
  const std::size_t n = g.length();
  if (i > n) throw Error(ErrorCode::InvalidArgument, "index beyond n");
  const std::vector<double> B = g.partial_vars();
  auto rng = make_engine(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
  std::vector<double> vals(samples);
  for (std::size_t r = 0; r < samples; ++r) {
    double a = 0.0;
    for (std::size_t t = 1; t <= i && t < n; ++t) {
      const double rem = B[n] - B[t - 1];
      a = a + g.variances[t - 1] / rem * (x - a) +
          std::sqrt(std::max(0.0, g.variances[t - 1] * (B[n] - B[t]) / rem)) * z(rng);
    }
    if (i == n) a = x;
    vals[r] = a;
    sum += a;
  }
  const double mean = sum / static_cast<double>(samples);
  for (double v : vals) {
    const double d = (v - mean) * (v - mean);
    sum2 += d;
    sum4 += d * d;
  }
  const double N = static_cast<double>(samples);
  const double var = sum2 / (N - 1);
  // standard error of the sample variance from the fourth central moment
  const double m4 = sum4 / N;
  const double se = std::sqrt(std::max(0.0, (m4 - var * var * (N - 3) / (N - 1)) / N));
  return {var, se};
}

}  // namespace inhomwalk
