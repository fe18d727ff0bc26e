#include "eva/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "eva/optimizer.hpp"

namespace eva {

namespace {

constexpr double kEulerGamma = 0.57721566490153286;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double gev_nll_unchecked(const GevParams<double>& p, std::span<const double> maxima) {
  if (!(p.sigma > 0) || !std::isfinite(p.mu) || !std::isfinite(p.xi)) return kSupportSentinel;
  const double log_sigma = std::log(p.sigma);
  double total = static_cast<double>(maxima.size()) * log_sigma;
  if (detail::near_zero_shape(p.xi)) {
    for (double m : maxima) {
      const double z = (m - p.mu) / p.sigma;
      total += z + std::exp(-z);
    }
  } else {
    const double a = 1.0 + 1.0 / p.xi;
    for (double m : maxima) {
      const double xz = p.xi * (m - p.mu) / p.sigma;
      if (!(xz > -1.0)) return kSupportSentinel;
      const double lt = std::log1p(xz);
      total += a * lt + std::exp(-lt / p.xi);
    }
  }
  return std::isfinite(total) ? std::min(total, kSupportSentinel) : kSupportSentinel;
}

double pp_nll_unchecked(const GevParams<double>& p, std::span<const double> exc, double u,
                        double n_years) {
  if (!(p.sigma > 0) || !std::isfinite(p.mu) || !std::isfinite(p.xi)) return kSupportSentinel;
  const double n = static_cast<double>(exc.size());
  double total = n * std::log(p.sigma);
  const double v = (u - p.mu) / p.sigma;
  if (detail::near_zero_shape(p.xi)) {
    total += n_years * std::exp(-v);
    for (double y : exc) total += (y - p.mu) / p.sigma;
  } else {
    const double xv = p.xi * v;
    if (!(xv > -1.0)) return kSupportSentinel;
    total += n_years * std::exp(-std::log1p(xv) / p.xi);
    double sum_log = 0;
    for (double y : exc) {
      const double xz = p.xi * (y - p.mu) / p.sigma;
      if (!(xz > -1.0)) return kSupportSentinel;
      sum_log += std::log1p(xz);
    }
    total += (1.0 / p.xi + 1.0) * sum_log;
  }
  return std::isfinite(total) ? std::min(total, kSupportSentinel) : kSupportSentinel;
}

void require_exceedances(std::span<const double> exc, double u) {
  for (std::size_t i = 0; i < exc.size(); ++i) {
    if (!(exc[i] > u))
      throw std::invalid_argument("exceedance " + std::to_string(i) + " (" +
                                  std::to_string(exc[i]) + ") is not above the threshold " +
                                  std::to_string(u));
  }
}

struct MeanSd {
  double mean;
  double sd;
};

MeanSd moments(std::span<const double> data) {
  if (data.size() < 2) throw std::invalid_argument("at least two values are required");
  double mean = 0;
  for (double x : data) mean += x;
  mean /= static_cast<double>(data.size());
  double ss = 0;
  for (double x : data) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(data.size() - 1));
  if (!(sd > 0)) throw std::invalid_argument("data have zero variance");
  return {mean, sd};
}

GevParams<double> from_internal(const Eigen::Vector3d& t) { return {t[0], std::exp(t[1]), t[2]}; }

Eigen::Vector3d to_internal(const GevParams<double>& p) { return {p.mu, std::log(p.sigma), p.xi}; }

// Optimization in (mu, log sigma, xi). `nll` and `grad` act on GevParams.
template <typename Nll, typename Grad>
FitResult minimize(Nll&& nll, Grad&& grad, const GevParams<double>& start,
                   const OptimizerSettings& settings) {
  auto objective = [&](const Eigen::Vector3d& t) { return nll(from_internal(t)); };
  auto internal_grad = [&](const Eigen::Vector3d& t) {
    const GevParams<double> p = from_internal(t);
    Eigen::Vector3d g = grad(p);
    g[1] *= p.sigma;
    return g;
  };
  auto hessian = [&](const Eigen::Vector3d& t) {
    Eigen::Matrix3d h;
    for (int i = 0; i < 3; ++i) {
      const double step = std::max(1e-4 * std::abs(t[i]), 1e-6);
      Eigen::Vector3d hi = t;
      Eigen::Vector3d lo = t;
      hi[i] += step;
      lo[i] -= step;
      h.col(i) = (internal_grad(hi) - internal_grad(lo)) / (2 * step);
    }
    return Eigen::Matrix3d(0.5 * (h + h.transpose()));
  };

  Eigen::Vector3d steps = settings.initial_steps;
  steps[0] *= start.sigma;
  const auto sres = nelder_mead_restarts<3>(objective, to_internal(start), steps,
                                            settings.max_iterations, settings.tolerance,
                                            settings.restarts);
  Eigen::Vector3d theta = sres.x;
  double value = sres.value;

  if (settings.polish && value < kSupportSentinel) {
    for (int it = 0; it < 25; ++it) {
      const Eigen::Vector3d g = internal_grad(theta);
      if (!g.allFinite()) break;
      Eigen::LLT<Eigen::Matrix3d> llt(hessian(theta));
      if (llt.info() != Eigen::Success) break;
      const Eigen::Vector3d dir = -llt.solve(g);
      if (!dir.allFinite()) break;
      double scale = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 30; ++ls, scale *= 0.5) {
        const Eigen::Vector3d cand = theta + scale * dir;
        const double fc = objective(cand);
        if (fc < value) {
          theta = cand;
          value = fc;
          moved = true;
          break;
        }
      }
      if (!moved || (scale * dir).cwiseAbs().maxCoeff() < 1e-14 * (1 + theta.cwiseAbs().maxCoeff()))
        break;
    }
  }

  FitResult fit;
  fit.params = from_internal(theta);
  fit.neg_loglik = value;
  fit.n_restarts_used = sres.restarts_used;
  fit.converged = sres.converged && value < kSupportSentinel;
  if (value < kSupportSentinel) {
    const Eigen::Matrix3d h = hessian(theta);
    Eigen::LLT<Eigen::Matrix3d> llt(h);
    if (h.allFinite() && llt.info() == Eigen::Success) {
      const Eigen::Matrix3d cov_internal = llt.solve(Eigen::Matrix3d::Identity());
      const Eigen::Vector3d jac(1.0, fit.params.sigma, 1.0);
      Eigen::Matrix3d cov = jac.asDiagonal() * cov_internal * jac.asDiagonal();
      fit.covariance = 0.5 * (cov + cov.transpose());
    }
  }
  return fit;
}

}  // namespace

Eigen::Vector3d FitResult::standard_errors() const {
  if (!covariance) return Eigen::Vector3d::Constant(kNaN);
  return covariance->diagonal().cwiseMax(0.0).cwiseSqrt();
}

double gev_negloglik(const GevParams<double>& p, std::span<const double> maxima) {
  if (maxima.empty()) throw std::invalid_argument("gev_negloglik: no maxima");
  return gev_nll_unchecked(p, maxima);
}

Eigen::Vector3d gev_negloglik_gradient(const GevParams<double>& p, std::span<const double> maxima) {
  if (maxima.empty()) throw std::invalid_argument("gev_negloglik_gradient: no maxima");
  const double s = p.sigma;
  const double n = static_cast<double>(maxima.size());
  Eigen::Vector3d g(0, n / s, 0);
  if (detail::near_zero_shape(p.xi)) {
    for (double m : maxima) {
      const double w = (m - p.mu) / s;
      const double e = std::exp(-w);
      g[0] += (-1.0 + e) / s;
      g[1] += (-w + w * e) / s;
      g[2] += w - 0.5 * w * w + 0.5 * e * w * w;
    }
    return g;
  }
  const double xi = p.xi;
  for (double m : maxima) {
    const double w = (m - p.mu) / s;
    const double t = 1.0 + xi * w;
    if (!(t > 0)) return Eigen::Vector3d::Constant(kNaN);
    const double lt = std::log1p(xi * w);
    const double tp = std::exp(-lt / xi);  // t^(-1/xi)
    g[0] += (-(1.0 + xi) / t + tp / t) / s;
    g[1] += (-(1.0 + xi) * w / t + w * tp / t) / s;
    g[2] += -lt / (xi * xi) + (1.0 + 1.0 / xi) * w / t + tp * (lt / (xi * xi) - w / (xi * t));
  }
  return g;
}

double pp_negloglik(const GevParams<double>& p, std::span<const double> exceedances,
                    double threshold, double n_years) {
  if (!(n_years > 0)) throw std::invalid_argument("pp_negloglik: n_years must be positive");
  require_exceedances(exceedances, threshold);
  return pp_nll_unchecked(p, exceedances, threshold, n_years);
}

Eigen::Vector3d pp_negloglik_gradient(const GevParams<double>& p,
                                      std::span<const double> exceedances, double threshold,
                                      double n_years) {
  const double s = p.sigma;
  const double n = static_cast<double>(exceedances.size());
  const double v = (threshold - p.mu) / s;
  Eigen::Vector3d g(0, n / s, 0);
  if (detail::near_zero_shape(p.xi)) {
    const double rate = n_years * std::exp(-v);
    g[0] += rate / s - n / s;
    g[1] += rate * v / s;
    g[2] += rate * 0.5 * v * v;
    for (double y : exceedances) {
      const double w = (y - p.mu) / s;
      g[1] -= w / s;
      g[2] += w - 0.5 * w * w;
    }
    return g;
  }
  const double xi = p.xi;
  const double a = 1.0 + xi * v;
  if (!(a > 0)) return Eigen::Vector3d::Constant(kNaN);
  const double la = std::log1p(xi * v);
  const double rate = n_years * std::exp(-la / xi);
  g[0] += rate / (s * a);
  g[1] += rate * v / (s * a);
  g[2] += rate * (la / (xi * xi) - v / (xi * a));
  for (double y : exceedances) {
    const double w = (y - p.mu) / s;
    const double t = 1.0 + xi * w;
    if (!(t > 0)) return Eigen::Vector3d::Constant(kNaN);
    g[0] -= (1.0 + xi) / (s * t);
    g[1] -= (1.0 + xi) * w / (s * t);
    g[2] += -std::log1p(xi * w) / (xi * xi) + (1.0 / xi + 1.0) * w / t;
  }
  return g;
}

GevParams<double> initial_params(std::span<const double> maxima) {
  const auto [mean, sd] = moments(maxima);
  const double sigma = std::sqrt(6.0) * sd / std::numbers::pi;
  return {mean - kEulerGamma * sigma, sigma, 0.0};
}

GevParams<double> initial_params(std::span<const double> exceedances, double threshold,
                                 double n_years) {
  if (!(n_years > 0)) throw std::invalid_argument("initial_params: n_years must be positive");
  GevParams<double> p = initial_params(exceedances);
  const double rate = static_cast<double>(exceedances.size()) / n_years;
  // Gumbel rate of exceeding u is exp(-(u - mu)/sigma).
  p.mu = threshold + p.sigma * std::log(rate);
  return p;
}

FitResult fit_gev(std::span<const double> maxima, const OptimizerSettings& settings) {
  if (maxima.size() < settings.min_maxima)
    throw std::invalid_argument("fit_gev: " + std::to_string(maxima.size()) +
                                " maxima, at least " + std::to_string(settings.min_maxima) +
                                " required");
  const GevParams<double> start = initial_params(maxima);
  FitResult fit = minimize([&](const GevParams<double>& p) { return gev_nll_unchecked(p, maxima); },
                           [&](const GevParams<double>& p) {
                             return gev_negloglik_gradient(p, maxima);
                           },
                           start, settings);
  fit.n_used = maxima.size();
  fit.n_years = static_cast<double>(maxima.size());
  return fit;
}

FitResult fit_pot_exceedances(std::span<const double> exceedances, double threshold,
                              double n_years, const OptimizerSettings& settings) {
  if (!(n_years >= 1)) throw std::invalid_argument("fit_pot: n_years must be at least 1");
  if (exceedances.size() < settings.min_exceedances)
    throw std::invalid_argument("fit_pot: " + std::to_string(exceedances.size()) +
                                " exceedances of the threshold, at least " +
                                std::to_string(settings.min_exceedances) + " required");
  require_exceedances(exceedances, threshold);
  const GevParams<double> start = initial_params(exceedances, threshold, n_years);
  FitResult fit = minimize(
      [&](const GevParams<double>& p) {
        return pp_nll_unchecked(p, exceedances, threshold, n_years);
      },
      [&](const GevParams<double>& p) {
        return pp_negloglik_gradient(p, exceedances, threshold, n_years);
      },
      start, settings);
  fit.n_used = exceedances.size();
  fit.n_years = n_years;
  return fit;
}

FitResult fit_pot(std::span<const double> daily, double threshold, double n_years,
                  const OptimizerSettings& settings) {
  std::vector<double> exc;
  for (double x : daily)
    if (x > threshold) exc.push_back(x);
  // Order-independent likelihood sums.
  std::sort(exc.begin(), exc.end());
  return fit_pot_exceedances(exc, threshold, n_years, settings);
}

}  // namespace eva
