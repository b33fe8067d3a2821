#include "nvgyro/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nvgyro/errors.hpp"
#include "nvgyro/units.hpp"

namespace nvgyro::analysis {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_length(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw InvalidArgument("x and y lengths differ");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw InvalidArgument("fit input contains a non-finite value");
    }
  }
}

double wrap_phase(double phi) {
  double w = std::remainder(phi, kTwoPi);
  if (w <= -kPi) w += kTwoPi;
  return w;
}

// Scaled covariance diagonal; columns with no leverage get an infinite error.
std::vector<double> standard_errors(const Eigen::MatrixXd& jac, double rss,
                                    std::size_t n, std::vector<std::string>& warnings) {
  const auto p = static_cast<std::size_t>(jac.cols());
  const double sigma2 = n > p ? rss / static_cast<double>(n - p) : 0.0;
  std::vector<double> errors(p, 0.0);

  const Eigen::MatrixXd jtj = jac.transpose() * jac;
  const double scale = std::max(jtj.diagonal().maxCoeff(), 1e-300);
  std::vector<bool> dead(p, false);
  for (std::size_t k = 0; k < p; ++k) {
    dead[k] = jtj(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) <= 1e-24 * scale;
  }

  // Invert on the identifiable columns only.
  std::vector<Eigen::Index> live;
  for (std::size_t k = 0; k < p; ++k) {
    if (!dead[k]) live.push_back(static_cast<Eigen::Index>(k));
  }
  Eigen::MatrixXd sub(live.size(), live.size());
  for (std::size_t a = 0; a < live.size(); ++a) {
    for (std::size_t b = 0; b < live.size(); ++b) sub(a, b) = jtj(live[a], live[b]);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
  Eigen::MatrixXd cov;
  if (!live.empty() && lu.isInvertible()) {
    cov = lu.inverse();
  } else if (!live.empty()) {
    warnings.emplace_back("singular normal matrix; standard errors undefined");
    std::fill(errors.begin(), errors.end(), kInf);
    return errors;
  }
  for (std::size_t a = 0; a < live.size(); ++a) {
    errors[static_cast<std::size_t>(live[a])] =
        std::sqrt(std::max(0.0, sigma2 * cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a))));
  }
  for (std::size_t k = 0; k < p; ++k) {
    if (dead[k]) {
      errors[k] = kInf;
      warnings.emplace_back("parameter " + std::to_string(k) + " is not identifiable");
    }
  }
  return errors;
}

}  // namespace

FitResult levenberg_marquardt(const ResidualFn& residuals, std::size_t n_residuals,
                              Eigen::VectorXd p, const LmOptions& options) {
  const Eigen::Index n_params = p.size();
  Eigen::VectorXd r(static_cast<Eigen::Index>(n_residuals));
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(n_residuals), n_params);
  residuals(p, r, jac);
  double cost = r.squaredNorm();
  if (!std::isfinite(cost)) throw FitError("non-finite residuals at the initial guess");

  FitResult result;
  double lambda = -1.0;
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * r;
    if (cost == 0.0 || grad.lpNorm<Eigen::Infinity>() == 0.0) {
      result.converged = true;
      break;
    }
    Eigen::VectorXd diag = jtj.diagonal();
    for (Eigen::Index k = 0; k < n_params; ++k) {
      if (diag(k) <= 0.0) diag(k) = 1.0;
    }
    if (lambda < 0.0) lambda = 1e-3;

    bool accepted = false;
    bool small_step = false;
    for (int tries = 0; tries < 60 && !accepted; ++tries) {
      Eigen::MatrixXd a = jtj;
      a.diagonal() += lambda * diag;
      const Eigen::VectorXd step = a.ldlt().solve(-grad);
      const Eigen::VectorXd trial = p + step;
      Eigen::VectorXd r_trial(r.size());
      Eigen::MatrixXd j_trial(jac.rows(), jac.cols());
      residuals(trial, r_trial, j_trial);
      const double trial_cost = r_trial.squaredNorm();
      small_step = step.norm() <= options.step_tolerance * (p.norm() + options.step_tolerance);
      if (std::isfinite(trial_cost) && trial_cost <= cost) {
        p = trial;
        r = r_trial;
        jac = j_trial;
        cost = trial_cost;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
      } else {
        lambda *= 4.0;
      }
      if (small_step) break;
    }
    if (small_step || !accepted) {
      result.converged = small_step || accepted;
      if (!accepted && !small_step) {
        result.warnings.emplace_back("damping exhausted without a decrease in cost");
      }
      ++it;
      break;
    }
  }
  if (it >= options.max_iterations && !result.converged) {
    result.warnings.emplace_back("iteration limit reached");
  }
  result.iterations = it;
  result.params.assign(p.data(), p.data() + p.size());
  result.residual_norm = std::sqrt(cost);
  result.std_errors = standard_errors(jac, cost, n_residuals, result.warnings);
  return result;
}

namespace sinusoid {
double model(double phi, const Eigen::Vector3d& p) {
  return p(0) + p(1) * std::cos(phi - p(2));
}
Eigen::Vector3d gradient(double phi, const Eigen::Vector3d& p) {
  return {1.0, std::cos(phi - p(2)), p(1) * std::sin(phi - p(2))};
}
}  // namespace sinusoid

FitResult fit_sinusoid(const std::vector<double>& phi, const std::vector<double>& y,
                       const LmOptions& options) {
  require_same_length(phi, y);
  if (phi.size() < 6) throw FitError("sinusoid fit needs at least 6 points");
  const auto [lo, hi] = std::minmax_element(phi.begin(), phi.end());
  if (*hi - *lo < 1.5 * kPi - 1e-12) {
    throw FitError("sinusoid fit needs a phase span of at least 1.5 pi");
  }

  // Projection onto {1, cos, sin} at the known unit frequency.
  const auto n = static_cast<Eigen::Index>(phi.size());
  Eigen::MatrixXd basis(n, 3);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ph = phi[static_cast<std::size_t>(i)];
    basis(i, 0) = 1.0;
    basis(i, 1) = std::cos(ph);
    basis(i, 2) = std::sin(ph);
    rhs(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector3d lin = basis.colPivHouseholderQr().solve(rhs);
  Eigen::VectorXd init(3);
  init << lin(0), std::hypot(lin(1), lin(2)), std::atan2(lin(2), lin(1));

  const ResidualFn residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r,
                                   Eigen::MatrixXd& jac) {
    const Eigen::Vector3d q = p;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double ph = phi[static_cast<std::size_t>(i)];
      r(i) = sinusoid::model(ph, q) - y[static_cast<std::size_t>(i)];
      jac.row(i) = sinusoid::gradient(ph, q).transpose();
    }
  };
  FitResult fit = levenberg_marquardt(residuals, phi.size(), init, options);
  if (fit.params[sinusoid::kContrast] < 0.0) {
    fit.params[sinusoid::kContrast] = -fit.params[sinusoid::kContrast];
    fit.params[sinusoid::kPhase] += kPi;
  }
  fit.params[sinusoid::kPhase] = wrap_phase(fit.params[sinusoid::kPhase]);
  return fit;
}

namespace exponential {
double model(double t, const Eigen::Vector2d& a_u) {
  return a_u(0) * std::exp(-t * std::exp(-a_u(1)));
}
Eigen::Vector2d gradient(double t, const Eigen::Vector2d& a_u) {
  const double rate = std::exp(-a_u(1));
  const double e = std::exp(-t * rate);
  return {e, a_u(0) * e * t * rate};
}
}  // namespace exponential

FitResult fit_exponential(const std::vector<double>& t, const std::vector<double>& y,
                          const LmOptions& options) {
  require_same_length(t, y);
  if (t.size() < 4) throw FitError("exponential fit needs at least 4 points");
  if (std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; })) {
    throw FitError("degenerate fit: all-zero signal");
  }

  // Log-linear regression on the positive samples, weighted by y^2 so the
  // noisy tail does not dominate.
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  std::size_t positive = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (y[i] <= 0.0) continue;
    const double w = y[i] * y[i];
    const double ly = std::log(y[i]);
    sw += w;
    swx += w * t[i];
    swy += w * ly;
    swxx += w * t[i] * t[i];
    swxy += w * t[i] * ly;
    ++positive;
  }
  if (positive < 2) throw FitError("degenerate fit: fewer than two positive samples");
  const double denom = sw * swxx - swx * swx;
  if (!(denom > 0.0)) throw FitError("degenerate fit: positive samples share one time");
  const double slope = (sw * swxy - swx * swy) / denom;
  if (!(slope < 0.0)) throw FitError("degenerate fit: signal does not decay");
  const double intercept = (swy - slope * swx) / sw;

  Eigen::VectorXd init(2);
  init << std::exp(intercept), std::log(-1.0 / slope);

  const auto n = static_cast<Eigen::Index>(t.size());
  const ResidualFn residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r,
                                   Eigen::MatrixXd& jac) {
    const Eigen::Vector2d q = p;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double ti = t[static_cast<std::size_t>(i)];
      r(i) = exponential::model(ti, q) - y[static_cast<std::size_t>(i)];
      jac.row(i) = exponential::gradient(ti, q).transpose();
    }
  };
  FitResult fit = levenberg_marquardt(residuals, t.size(), init, options);
  const double time = std::exp(fit.params[1]);
  if (!std::isfinite(time)) throw FitError("exponential fit diverged");
  fit.params[exponential::kTime] = time;
  fit.std_errors[exponential::kTime] = time * fit.std_errors[1];
  return fit;
}

FitResult fit_linear(const std::vector<double>& x, const std::vector<double>& y) {
  require_same_length(x, y);
  const std::size_t n = x.size();
  if (n < 2) throw FitError("linear fit needs at least 2 points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw FitError("linear fit needs at least two distinct x values");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (slope * x[i] + intercept);
    rss += r * r;
  }
  const double sigma2 = n > 2 ? rss / static_cast<double>(n - 2) : 0.0;

  FitResult fit;
  fit.params = {slope, intercept};
  fit.std_errors = {std::sqrt(sigma2 / sxx),
                    std::sqrt(sigma2 * (1.0 / static_cast<double>(n) + mx * mx / sxx))};
  fit.residual_norm = std::sqrt(rss);
  fit.converged = true;
  return fit;
}

SummaryStats summary_stats(const std::vector<double>& samples) {
  if (samples.size() < 2) throw InvalidArgument("summary_stats needs at least 2 samples");
  SummaryStats s;
  s.count = samples.size();
  for (double v : samples) s.mean += v;
  s.mean /= static_cast<double>(s.count);
  double ss = 0.0;
  for (double v : samples) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(s.count - 1));
  return s;
}

}  // namespace nvgyro::analysis
