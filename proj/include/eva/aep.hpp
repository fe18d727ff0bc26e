#pragma once

// 1-in-T annual exceedance probability values and their delta-method
// standard errors.

#include <optional>

#include <Eigen/Core>

#include "eva/distributions.hpp"
#include "eva/fitting.hpp"

namespace eva {

struct AepEstimate {
  double period = 0;  // T, in blocks (years)
  double value = 0;
  std::optional<double> se;
  /// se / value; disengaged when se is unavailable or value <= 0.
  std::optional<double> relative_uncertainty;
};

/// The (1 - 1/T) quantile of the GEV, evaluated through -log(1 - 1/T) so that
/// very long periods keep full precision.
template <typename Scalar>
Scalar return_level(const GevParams<Scalar>& p, Scalar period) {
  using std::expm1;
  using std::log;
  using std::log1p;
  detail::require_valid(p);
  if (!(period > 1)) throw std::domain_error("return_level: period must exceed 1");
  const Scalar log_y = log(-log1p(-Scalar(1) / period));
  if (detail::near_zero_shape(p.xi)) return p.mu - p.sigma * log_y;
  return p.mu + p.sigma * expm1(-p.xi * log_y) / p.xi;
}

/// (dz/dmu, dz/dsigma, dz/dxi) of the 1-in-T value.
Eigen::Vector3d return_level_gradient(const GevParams<double>& p, double period);

AepEstimate aep_with_uncertainty(const FitResult& fit, double period);

}  // namespace eva
