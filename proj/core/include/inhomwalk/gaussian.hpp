#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace inhomwalk {

// Theta_J(z) = sum_k (-1)^k exp(-2 z^2 k^2), the law of sup |Brownian bridge|.
// Uses the alternating series for z >= 0.8 and the dual series
// (sqrt(2 pi)/z) sum_{k odd} exp(-pi^2 k^2 / (8 z^2)) below. Throws
// NonPositiveArgument for z <= 0.
double jacobi_theta(double z);
double log_jacobi_theta(double z);
// The two series on their own, summed until the term drops below 1e-16.
double jacobi_theta_alternating(double z);
double jacobi_theta_dual(double z);

// Theta_J(z) >= exp(-(1 + eps) pi^2 / (8 z^2)).
bool theta_small_z_check(double z, double epsilon);

// Largest grid point z0 in [z_lo, z_hi] such that the check holds at every
// grid point z <= z0; 0 when it already fails at z_lo.
double theta_threshold(double epsilon, double z_lo, double z_hi, std::size_t grid = 400);

// Cov(S_i, S_j | S_n) = B_i (B_n - B_j) / B_n for i <= j; B holds B_0..B_n.
double bridge_covariance(const std::vector<double>& B, std::size_t i, std::size_t j);

struct GaussianSchedule {
  std::vector<double> variances;  // sigma_i^2, steps 1..n
  double sigma_plus = 0.0;

  // Throws InvalidArgument unless 0 < sigma_i^2 <= sigma_plus^2.
  void validate() const;
  std::size_t length() const { return variances.size(); }
  // B_0..B_n
  std::vector<double> partial_vars() const;
};

struct GaussCheckpoint {
  std::size_t time = 0;
  // Union of closed intervals allowed for S_time; empty means the whole line.
  std::vector<std::pair<double, double>> intervals;
  std::optional<double> inc_cap;
};

struct GaussProb {
  double value = 0.0;
  double std_error = 0.0;  // 0 for quadrature
  bool quadrature = true;
  std::size_t samples = 0;
};

// P(S_{L_j} in I_j and |S_{L_j} - S_{L_{j-1}}| <= c_j for all j), S_0 = 0, by
// chained Gauss-Legendre integration for up to 8 checkpoints and Monte Carlo
// beyond. Throws QuadratureNonConvergence when two node counts disagree.
GaussProb gaussian_checkpoint_prob(const GaussianSchedule& g, std::vector<GaussCheckpoint> checkpoints,
                                   std::size_t mc_samples = 1000000, std::uint64_t seed = 1);
GaussProb gaussian_checkpoint_mc(const GaussianSchedule& g, const std::vector<GaussCheckpoint>& checkpoints,
                                 std::size_t samples, std::uint64_t seed);

// Unit intervals [x - 1/2, x + 1/2] around each integer x, merged.
std::vector<std::pair<double, double>> unit_cells(const std::vector<std::int64_t>& xs, double eps = 1.0);

struct McBridge {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

// P(max_i d(S_i, [0, x]) <= s sqrt(n) | S_n = x) for the Gaussian walk, by
// exact sequential sampling of the pinned bridge.
McBridge mc_gaussian_bridge_smallball(const GaussianSchedule& g, double x, double s, std::size_t samples,
                                      std::uint64_t seed);

// Sample variance of S_i under the pinned bridge, with its standard error.
std::pair<double, double> mc_bridge_variance(const GaussianSchedule& g, double x, std::size_t i, std::size_t samples,
                                             std::uint64_t seed);

}  // namespace inhomwalk
