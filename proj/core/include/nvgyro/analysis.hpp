#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nvgyro::analysis {

struct FitResult {
  std::vector<double> params;
  // One-sigma errors from the scaled covariance RSS/(n-p) (J^T J)^-1. Infinite
  // for a parameter the data cannot identify.
  std::vector<double> std_errors;
  double residual_norm = 0.0;
  bool converged = false;
  int iterations = 0;
  // Non-empty when the fit is degenerate or did not converge; estimates are
  // still returned.
  std::vector<std::string> warnings;

  bool degenerate() const { return !warnings.empty(); }
};

struct LmOptions {
  double step_tolerance = 1e-10;
  int max_iterations = 200;
};

// Residuals r(p) and Jacobian dr/dp written into the outputs.
using ResidualFn =
    std::function<void(const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& jac)>;

// Damped Gauss-Newton (Levenberg-Marquardt) with Marquardt diagonal scaling
// and multiplicative damping. Standard errors use the model parametrization.
FitResult levenberg_marquardt(const ResidualFn& residuals, std::size_t n_residuals,
                              Eigen::VectorXd initial, const LmOptions& options = {});

// S(phi) = c0 + c cos(phi - phi0); params = [c0, c, phi0], c >= 0 and phi0
// wrapped into (-pi, pi].
namespace sinusoid {
inline constexpr std::size_t kOffset = 0;
inline constexpr std::size_t kContrast = 1;
inline constexpr std::size_t kPhase = 2;
double model(double phi, const Eigen::Vector3d& p);
Eigen::Vector3d gradient(double phi, const Eigen::Vector3d& p);
}  // namespace sinusoid

// Needs >= 6 points spanning >= 1.5 pi. Flat data returns c ~ 0 with an
// infinite phase error and a warning.
FitResult fit_sinusoid(const std::vector<double>& phi, const std::vector<double>& y,
                       const LmOptions& options = {});

// y(t) = a exp(-t / T), fitted in (a, u = ln T). Reported params are [a, T];
// std_errors[1] is the delta-method error T * sigma_u.
namespace exponential {
inline constexpr std::size_t kAmplitude = 0;
inline constexpr std::size_t kTime = 1;
double model(double t, const Eigen::Vector2d& a_u);
Eigen::Vector2d gradient(double t, const Eigen::Vector2d& a_u);
}  // namespace exponential

// Needs >= 4 points. Throws FitError on all-zero input or data that do not
// decay.
FitResult fit_exponential(const std::vector<double>& t, const std::vector<double>& y,
                          const LmOptions& options = {});

// Ordinary least squares y = slope x + intercept; params = [slope, intercept].
namespace linear {
inline constexpr std::size_t kSlope = 0;
inline constexpr std::size_t kIntercept = 1;
}  // namespace linear
FitResult fit_linear(const std::vector<double>& x, const std::vector<double>& y);

struct SummaryStats {
  double mean = 0.0;
  double std = 0.0;  // unbiased
  std::size_t count = 0;
};
SummaryStats summary_stats(const std::vector<double>& samples);

}  // namespace nvgyro::analysis
