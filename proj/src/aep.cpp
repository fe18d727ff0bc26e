#include "eva/aep.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eva {

Eigen::Vector3d return_level_gradient(const GevParams<double>& p, double period) {
  detail::require_valid(p);
  if (!(period > 1)) throw std::domain_error("return_level_gradient: period must exceed 1");
  const double log_y = std::log(-std::log1p(-1.0 / period));
  if (detail::near_zero_shape(p.xi)) return {1.0, -log_y, 0.5 * p.sigma * log_y * log_y};

  // With a = xi log y:
  //   dz/dsigma = expm1(-a)/xi
  //   dz/dxi    = sigma (log y)^2 h(a),  h(a) = (-expm1(-a) - a e^(-a)) / a^2
  const double a = p.xi * log_y;
  const double d_sigma = std::expm1(-a) / p.xi;
  double h;
  if (std::abs(a) < 1e-3)
    h = 0.5 - a / 3.0 + a * a / 8.0 - a * a * a / 30.0;
  else
    h = (-std::expm1(-a) - a * std::exp(-a)) / (a * a);
  return {1.0, d_sigma, p.sigma * log_y * log_y * h};
}

AepEstimate aep_with_uncertainty(const FitResult& fit, double period) {
  if (!fit.converged) throw std::invalid_argument("aep_with_uncertainty: fit did not converge");
  AepEstimate est;
  est.period = period;
  est.value = return_level(fit.params, period);
  if (fit.covariance) {
    const Eigen::Matrix3d cov = 0.5 * (*fit.covariance + fit.covariance->transpose());
    const Eigen::Vector3d g = return_level_gradient(fit.params, period);
    const double var = g.dot(cov * g);
    est.se = std::sqrt(std::max(var, 0.0));
    if (est.value > 0) est.relative_uncertainty = *est.se / est.value;
  }
  return est;
}

}  // namespace eva
