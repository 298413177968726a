#include "inhomwalk/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "inhomwalk/engine.hpp"
#include "inhomwalk/error.hpp"

namespace inhomwalk {

namespace {

// Run-length compressed steps with their (shift-normalized) tilted weights.
struct CharFn {
  struct Run {
    std::vector<double> atoms;
    std::vector<double> weights;  // sum to 1
    double count = 0.0;
  };
  std::vector<Run> runs;

  CharFn(const StepSchedule& s, double lambda) {
    for (std::size_t i = 1; i <= s.length(); ++i) {
      const IncrementLaw& law = s.law(i);
      if (i > 1 && law == s.law(i - 1)) {
        runs.back().count += 1.0;
        continue;
      }
      Run r;
      r.atoms = law.atoms();
      const IncrementLaw t = tilt(law, lambda);
      r.weights = t.probs();
      r.count = 1.0;
      runs.push_back(std::move(r));
    }
  }

  // log|phi(theta)| and arg phi(theta); log-modulus -inf when phi vanishes.
  std::pair<double, double> eval(double theta) const {
    double logmod = 0.0, phase = 0.0;
    for (const Run& r : runs) {
      double re = 0.0, im = 0.0;
      for (std::size_t a = 0; a < r.atoms.size(); ++a) {
        re += r.weights[a] * std::cos(theta * r.atoms[a]);
        im += r.weights[a] * std::sin(theta * r.atoms[a]);
      }
      const double m2 = re * re + im * im;
      if (m2 == 0.0) return {-std::numeric_limits<double>::infinity(), 0.0};
      logmod += 0.5 * r.count * std::log(m2);
      phase += r.count * std::atan2(im, re);
    }
    return {logmod, phase};
  }
};

constexpr double kQuadTol = 1e-11;
constexpr double kQuadFail = 1e-11;

double invert(const StepSchedule& schedule, double lambda, std::int64_t y) {
  const CharFn cf(schedule, lambda);
  double center = 0.0, var = 0.0;
  for (std::size_t i = 1; i <= schedule.length(); ++i) {
    center += log_mgf(schedule.law(i), lambda, 1);
    var += log_mgf(schedule.law(i), lambda, 2);
  }
  const double yd = static_cast<double>(y);
  auto f = [&](double theta) {
    const auto [logmod, phase] = cf.eval(theta);
    if (logmod < -745.0) return 0.0;
    return std::exp(logmod) * std::cos(phase - theta * yd);
  };
  const double pi = std::numbers::pi;
  double h = std::min(pi / 8, pi / (std::abs(yd - center) + 1.0));
  if (var > 0) h = std::min(h, 2.0 / std::sqrt(var));
  const int panels = static_cast<int>(std::ceil(pi / h));
  double total = 0.0, err_total = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double a = pi * k / panels, b = pi * (k + 1) / panels;
    double err = 0.0;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 8, kQuadTol, &err);
    err_total += err;
  }
  if (!(err_total <= kQuadFail * pi)) {
    throw Error(ErrorCode::QuadratureNonConvergence,
                "inversion error estimate " + std::to_string(err_total / pi) + " at y = " + std::to_string(y));
  }
  return std::max(0.0, total / pi);
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

std::complex<double> charfn_product(const StepSchedule& schedule, double lambda, double theta) {
  const auto [logmod, phase] = CharFn(schedule, lambda).eval(theta);
  if (logmod == -std::numeric_limits<double>::infinity()) return {0.0, 0.0};
  return std::polar(std::exp(logmod), phase);
}

double fourier_point_prob(const StepSchedule& schedule, std::int64_t y) { return invert(schedule, 0.0, y); }

double tilt_identity_prob(const StepSchedule& schedule, std::int64_t y) {
  const double lambda = solve_tilt_for_mean(schedule, static_cast<double>(y));
  if (lambda == 0.0) return invert(schedule, 0.0, y);
  double H = 0.0;
  for (std::size_t i = 1; i <= schedule.length(); ++i) H += log_mgf(schedule.law(i), lambda, 0);
  const double p = invert(schedule, lambda, y);
  if (p == 0.0) return 0.0;
  return std::exp(H - lambda * static_cast<double>(y) + std::log(p));
}

double llt_exponent(double alpha) { return std::min(2.0 - 3.0 * alpha, 1.0 / 3.0); }

namespace {

LltReport fill_report(const StepSchedule& schedule, std::int64_t y, double alpha, double exact) {
  const double m = schedule.partial_mean(schedule.length());
  const double B = schedule.partial_var(schedule.length());
  const double d = static_cast<double>(y) - m;
  LltReport r;
  r.n = schedule.length();
  r.y = y;
  r.exact_prob = exact;
  r.alpha = alpha;
  r.envelope_exponent = llt_exponent(alpha);
  r.gauss_approx = std::exp(-d * d / (2 * B)) / std::sqrt(2 * std::numbers::pi * B);
  r.log_ratio = std::log(exact) + d * d / (2 * B) + 0.5 * std::log(2 * std::numbers::pi * B);
  r.ratio = std::exp(r.log_ratio);
  return r;
}

}  // namespace

LltReport llt_ratio(const StepSchedule& schedule, std::int64_t y, double alpha, std::optional<double> exact) {
  const std::size_t n = schedule.length();
  const double m = schedule.partial_mean(n);
  if (std::abs(static_cast<double>(y) - m) > std::pow(static_cast<double>(n), alpha) + 1e-9) {
    throw Error(ErrorCode::OutOfRegime, "|y - m_n| exceeds n^alpha for y = " + std::to_string(y));
  }
  const double p = exact ? *exact : event_prob(0, schedule, PathConstraint::none(n).with_endpoint(y));
  if (!(p > 0.0)) throw Error(ErrorCode::ZeroProbability, "P(S_n = " + std::to_string(y) + ") = 0");
  return fill_report(schedule, y, alpha, p);
}

LltSweep llt_sweep(const StepSchedule& schedule, double alpha) {
  const std::size_t n = schedule.length();
  const double m = schedule.partial_mean(n);
  const double w = std::pow(static_cast<double>(n), alpha) + 1e-9;
  const PositionDistribution d = forward(0, schedule, PathConstraint::none(n), n);
  LltSweep out;
  for (auto y = static_cast<std::int64_t>(std::ceil(m - w)); static_cast<double>(y) <= m + w; ++y) {
    const double p = d.at(y);
    if (p > 0.0) {
      out.rows.push_back(fill_report(schedule, y, alpha, p));
    } else {
      ++out.skipped;
    }
  }
  return out;
}

BerryEsseen berry_esseen_distance(const StepSchedule& schedule, double C) {
  const std::size_t n = schedule.length();
  const double m = schedule.partial_mean(n);
  const double B = schedule.partial_var(n);
  if (!(B > 0.0)) throw Error(ErrorCode::DegenerateSchedule, "zero variance");
  const PositionDistribution d = forward(0, schedule, PathConstraint::none(n), n);
  const double sd = std::sqrt(B);
  double below = 0.0, ks = 0.0;
  for (std::int64_t x = d.lo(); x <= d.hi(); ++x) {
    const double p = d.at(x);
    if (p <= 0.0) continue;
    const double phi = normal_cdf((static_cast<double>(x) - m) / sd);
    ks = std::max({ks, std::abs(below - phi), std::abs(below + p - phi)});
    below += p;
  }
  BerryEsseen r;
  r.ks_distance = std::min(ks, 1.0);
  r.third_moment = schedule.max_central_abs_moment(3.0);
  const double scale = r.third_moment * static_cast<double>(n) / std::pow(B, 1.5);
  r.normalized = r.ks_distance / scale;
  r.bound = C * scale;
  return r;
}

double charfn_gap(const IncrementLaw& law, double b, std::size_t grid) {
  double worst = 0.0;
  for (std::size_t k = 0; k <= grid; ++k) {
    const double theta = b + (std::numbers::pi - b) * static_cast<double>(k) / static_cast<double>(grid);
    double re = 0.0, im = 0.0;
    for (std::size_t a = 0; a < law.size(); ++a) {
      re += law.probs()[a] * std::cos(theta * law.atoms()[a]);
      im += law.probs()[a] * std::sin(theta * law.atoms()[a]);
    }
    worst = std::max(worst, std::hypot(re, im));
  }
  return worst;
}

}  // namespace inhomwalk
