#pragma once

// GEV and GPD densities, distribution functions, quantiles and samplers.
//
// Parametrizations:
//   GEV  F(x) = exp{-[1 + xi (x - mu)/sigma]^(-1/xi)}
//   GPD  F(x) = 1 - [1 + xi (x - u)/sigma_u]^(-1/xi),  x >= u
// with the Gumbel / exponential forms used when |xi| < kShapeSwitch.
// (1 + xi z)^(-1/xi) is always evaluated as exp(-log1p(xi z)/xi).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "eva/random.hpp"

namespace eva {

inline constexpr double kShapeSwitch = 1e-8;

template <typename Scalar>
struct GevParams {
  Scalar mu{0};
  Scalar sigma{1};
  Scalar xi{0};
};

template <typename Scalar>
struct GpdParams {
  Scalar threshold{0};
  Scalar sigma{1};  // threshold-dependent scale
  Scalar xi{0};
};

/// Support of a distribution; a disengaged bound is infinite.
template <typename Scalar>
struct SupportBounds {
  std::optional<Scalar> lower;
  std::optional<Scalar> upper;

  bool contains(Scalar x) const {
    return (!lower || x >= *lower) && (!upper || x <= *upper);
  }
};

namespace detail {

template <typename Scalar>
bool near_zero_shape(Scalar xi) {
  using std::abs;
  return abs(xi) < Scalar(kShapeSwitch);
}

template <typename Scalar>
void require_finite(Scalar x, const char* what) {
  using std::isfinite;
  if (!isfinite(x)) throw std::domain_error(std::string(what) + ": non-finite argument");
}

template <typename Scalar>
void require_valid(const GevParams<Scalar>& p) {
  using std::isfinite;
  if (!(isfinite(p.mu) && isfinite(p.sigma) && isfinite(p.xi)) || !(p.sigma > 0))
    throw std::invalid_argument("GEV parameters require finite values and sigma > 0");
}

template <typename Scalar>
void require_valid(const GpdParams<Scalar>& p) {
  using std::isfinite;
  if (!(isfinite(p.threshold) && isfinite(p.sigma) && isfinite(p.xi)) || !(p.sigma > 0))
    throw std::invalid_argument("GPD parameters require finite values and sigma > 0");
}

template <typename Scalar>
void require_probability(Scalar prob, const char* what) {
  if (!(prob > 0 && prob < 1))
    throw std::domain_error(std::string(what) + ": probability must lie in (0, 1)");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// GEV

template <typename Scalar>
Scalar gev_cdf(const GevParams<Scalar>& p, Scalar x) {
  using std::exp;
  using std::log1p;
  detail::require_valid(p);
  detail::require_finite(x, "gev_cdf");
  const Scalar z = (x - p.mu) / p.sigma;
  if (detail::near_zero_shape(p.xi)) return exp(-exp(-z));
  const Scalar t = 1 + p.xi * z;
  if (t <= 0) return p.xi > 0 ? Scalar(0) : Scalar(1);
  return exp(-exp(-log1p(p.xi * z) / p.xi));
}

template <typename Scalar>
Scalar gev_quantile(const GevParams<Scalar>& p, Scalar prob) {
  using std::expm1;
  using std::log;
  detail::require_valid(p);
  detail::require_probability(prob, "gev_quantile");
  const Scalar log_y = log(-log(prob));
  if (detail::near_zero_shape(p.xi)) return p.mu - p.sigma * log_y;
  return p.mu + p.sigma * expm1(-p.xi * log_y) / p.xi;
}

template <typename Scalar>
Scalar gev_logpdf(const GevParams<Scalar>& p, Scalar x) {
  using std::exp;
  using std::log;
  using std::log1p;
  detail::require_valid(p);
  detail::require_finite(x, "gev_logpdf");
  const Scalar z = (x - p.mu) / p.sigma;
  if (detail::near_zero_shape(p.xi)) return -log(p.sigma) - z - exp(-z);
  if (1 + p.xi * z <= 0) return -std::numeric_limits<Scalar>::infinity();
  const Scalar lt = log1p(p.xi * z);
  return -log(p.sigma) - (1 + 1 / p.xi) * lt - exp(-lt / p.xi);
}

// ---------------------------------------------------------------------------
// GPD (conditional on exceeding the threshold)

template <typename Scalar>
Scalar gpd_cdf(const GpdParams<Scalar>& p, Scalar x) {
  using std::expm1;
  using std::log1p;
  detail::require_valid(p);
  detail::require_finite(x, "gpd_cdf");
  if (x < p.threshold) throw std::domain_error("gpd_cdf: x below threshold");
  const Scalar y = (x - p.threshold) / p.sigma;
  if (detail::near_zero_shape(p.xi)) return -expm1(-y);
  if (1 + p.xi * y <= 0) return Scalar(1);
  return -expm1(-log1p(p.xi * y) / p.xi);
}

template <typename Scalar>
Scalar gpd_quantile(const GpdParams<Scalar>& p, Scalar prob) {
  using std::expm1;
  using std::log1p;
  detail::require_valid(p);
  detail::require_probability(prob, "gpd_quantile");
  const Scalar log_surv = log1p(-prob);
  if (detail::near_zero_shape(p.xi)) return p.threshold - p.sigma * log_surv;
  return p.threshold + p.sigma * expm1(-p.xi * log_surv) / p.xi;
}

template <typename Scalar>
Scalar gpd_logpdf(const GpdParams<Scalar>& p, Scalar x) {
  using std::log;
  using std::log1p;
  detail::require_valid(p);
  detail::require_finite(x, "gpd_logpdf");
  if (x < p.threshold) throw std::domain_error("gpd_logpdf: x below threshold");
  const Scalar y = (x - p.threshold) / p.sigma;
  if (detail::near_zero_shape(p.xi)) return -log(p.sigma) - y;
  if (1 + p.xi * y <= 0) return -std::numeric_limits<Scalar>::infinity();
  return -log(p.sigma) - (1 + 1 / p.xi) * log1p(p.xi * y);
}

// ---------------------------------------------------------------------------
// Support

template <typename Scalar>
SupportBounds<Scalar> support_bounds(const GevParams<Scalar>& p) {
  detail::require_valid(p);
  SupportBounds<Scalar> b;
  if (detail::near_zero_shape(p.xi)) return b;
  if (p.xi > 0)
    b.lower = p.mu - p.sigma / p.xi;
  else
    b.upper = p.mu - p.sigma / p.xi;
  return b;
}

template <typename Scalar>
SupportBounds<Scalar> support_bounds(const GpdParams<Scalar>& p) {
  using std::abs;
  detail::require_valid(p);
  SupportBounds<Scalar> b;
  b.lower = p.threshold;
  if (!detail::near_zero_shape(p.xi) && p.xi < 0) b.upper = p.threshold + p.sigma / abs(p.xi);
  return b;
}

// ---------------------------------------------------------------------------
// Sampling

/// n inverse-CDF draws; draw i depends only on (seed, i).
template <typename Scalar>
std::vector<Scalar> gev_sample(const GevParams<Scalar>& p, std::size_t n, std::uint64_t seed) {
  detail::require_valid(p);
  std::vector<Scalar> out(n);
  CounterStream rng(seed, stream_domain::kSample, 0, 0);
  for (std::size_t i = 0; i < n; ++i) out[i] = gev_quantile(p, Scalar(rng.uniform()));
  return out;
}

template <typename Scalar>
std::vector<Scalar> gpd_sample(const GpdParams<Scalar>& p, std::size_t n, std::uint64_t seed) {
  detail::require_valid(p);
  std::vector<Scalar> out(n);
  CounterStream rng(seed, stream_domain::kSample, 1, 0);
  for (std::size_t i = 0; i < n; ++i) out[i] = gpd_quantile(p, Scalar(rng.uniform()));
  return out;
}

}  // namespace eva
