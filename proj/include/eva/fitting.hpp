#pragma once

// Maximum-likelihood fits of the GEV to block maxima and of the
// point-process (GEV-parametrized) model to threshold exceedances.

#include <cstddef>
#include <optional>
#include <span>

#include <Eigen/Core>

#include "eva/distributions.hpp"

namespace eva {

/// Objective value returned for parameters outside the model's support.
/// Finite so that the simplex can move away from it.
inline constexpr double kSupportSentinel = 1e30;

struct OptimizerSettings {
  int max_iterations = 2000;   // per simplex run
  double tolerance = 1e-10;    // relative, on the objective
  int restarts = 2;
  /// Initial simplex steps in the internal (mu, log sigma, xi) coordinates.
  /// The mu step is in units of the starting scale.
  Eigen::Vector3d initial_steps{0.5, 0.2, 0.1};
  /// Newton refinement of the simplex optimum using the analytic score.
  bool polish = true;
  std::size_t min_maxima = 10;
  std::size_t min_exceedances = 20;
};

struct FitResult {
  GevParams<double> params;
  /// Covariance over (mu, sigma, xi); disengaged when the Hessian at the
  /// optimum is not positive definite.
  std::optional<Eigen::Matrix3d> covariance;
  double neg_loglik = 0;
  std::size_t n_used = 0;
  double n_years = 0;
  bool converged = false;
  int n_restarts_used = 0;

  /// Square roots of the covariance diagonal, NaN when unavailable.
  Eigen::Vector3d standard_errors() const;
};

double gev_negloglik(const GevParams<double>& p, std::span<const double> maxima);
Eigen::Vector3d gev_negloglik_gradient(const GevParams<double>& p, std::span<const double> maxima);

/// Point-process likelihood for exceedances of u observed over n_years blocks:
///   n_years [1 + xi (u - mu)/sigma]^(-1/xi) + n log sigma
///     + (1/xi + 1) sum log[1 + xi (y_i - mu)/sigma]
double pp_negloglik(const GevParams<double>& p, std::span<const double> exceedances,
                    double threshold, double n_years);
Eigen::Vector3d pp_negloglik_gradient(const GevParams<double>& p,
                                      std::span<const double> exceedances, double threshold,
                                      double n_years);

/// Moment-based Gumbel start for block maxima.
GevParams<double> initial_params(std::span<const double> maxima);
/// Gumbel start for exceedances, with mu moved so that the implied rate of
/// exceeding `threshold` equals n / n_years.
GevParams<double> initial_params(std::span<const double> exceedances, double threshold,
                                 double n_years);

FitResult fit_gev(std::span<const double> maxima, const OptimizerSettings& settings = {});

/// Fits the point-process model to the values of `daily` exceeding `threshold`.
FitResult fit_pot(std::span<const double> daily, double threshold, double n_years,
                  const OptimizerSettings& settings = {});

/// As fit_pot, for data already reduced to exceedances (every value > threshold).
FitResult fit_pot_exceedances(std::span<const double> exceedances, double threshold,
                              double n_years, const OptimizerSettings& settings = {});

}  // namespace eva
