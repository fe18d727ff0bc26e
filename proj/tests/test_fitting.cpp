#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "eva/aep.hpp"
#include "eva/fitting.hpp"
#include "oracles.hpp"

using eva::GevParams;

namespace {

// Daily series whose values above u are u + GPD(sigma', xi) at `rate` per
// year; other days fall uniformly below u.
std::vector<double> pot_daily(double u, double sigma_u, double xi, double rate, int years,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::poisson_distribution<int> count(rate * years);
  const int n = count(rng);
  const auto exc = eva::gpd_sample(eva::GpdParams<double>{u, sigma_u, xi}, n, seed);
  std::vector<double> daily(exc.begin(), exc.end());
  std::uniform_real_distribution<double> below(0, u);
  for (int i = 0; i < 365 * years - n; ++i) daily.push_back(below(rng));
  std::shuffle(daily.begin(), daily.end(), rng);
  return daily;
}

double direct_gev_nll(const GevParams<double>& p, const std::vector<double>& x) {
  double s = 0;
  for (double v : x) s -= eva::gev_logpdf(p, v);
  return s;
}

// GPD negative log-likelihood of the excesses plus the Poisson count term,
// written from the GPD density directly.
double factorized_pp_nll(const GevParams<double>& p, const std::vector<double>& exc, double u,
                         double n_years) {
  const double t = 1 + p.xi * (u - p.mu) / p.sigma;
  const double rate = std::pow(t, -1 / p.xi);          // per year
  const double sigma_u = p.sigma + p.xi * (u - p.mu);
  double gpd = 0;
  for (double y : exc) gpd -= std::log(oracle::gpd_pdf(u, sigma_u, p.xi, y));
  const double lambda = n_years * rate;
  const double n = static_cast<double>(exc.size());
  // -log Poisson(n; lambda) without the n! constant.
  return gpd + lambda - n * std::log(lambda) + n * std::log(n_years);
}

}  // namespace

TEST_CASE("gev negative log-likelihood") {
  const std::vector<double> one{0.0};
  CHECK(eva::gev_negloglik(GevParams<double>{0, 1, 0}, one) == doctest::Approx(1.0));
  CHECK(eva::gev_negloglik(GevParams<double>{0, -1, 0}, one) == eva::kSupportSentinel);
  CHECK(eva::gev_negloglik(GevParams<double>{0, 1, -0.5}, std::vector<double>{5.0}) ==
        eva::kSupportSentinel);
  CHECK_THROWS_AS(eva::gev_negloglik(GevParams<double>{0, 1, 0}, std::vector<double>{}),
                  std::invalid_argument);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> shape(-0.4, 0.4), scale(0.5, 3);
  for (int i = 0; i < 100; ++i) {
    const GevParams<double> truth{1, scale(rng), shape(rng)};
    const auto x = eva::gev_sample(truth, 50, i + 10);
    const GevParams<double> at{1.1, truth.sigma * 1.05, truth.xi * 0.9};
    const double direct = direct_gev_nll(at, x);
    if (!std::isfinite(direct)) continue;
    CHECK(eva::gev_negloglik(at, x) == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("point-process likelihood") {
  const std::vector<double> exc{1.5, 2.0, 4.0};
  // With mu = u and xi = 0 the intensity term is exactly n_years.
  const double u = 1.0, n_years = 7.0;
  const double nll = eva::pp_negloglik(GevParams<double>{u, 2, 0}, exc, u, n_years);
  double expect = n_years + 3 * std::log(2.0);
  for (double y : exc) expect += (y - u) / 2;
  CHECK(nll == doctest::Approx(expect).epsilon(1e-14));
  CHECK_THROWS_AS(eva::pp_negloglik(GevParams<double>{0, 1, 0}, exc, 2.0, 1.0),
                  std::invalid_argument);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> shape(-0.3, 0.3), loc(-1, 1), scale(0.5, 2);
  int compared = 0;
  for (int i = 0; i < 100; ++i) {
    const double uu = 3.0;
    const auto data = eva::gpd_sample(eva::GpdParams<double>{uu, 1.5, shape(rng)}, 40, 100 + i);
    const std::vector<double> e(data.begin(), data.end());
    const GevParams<double> p{uu + loc(rng), scale(rng), shape(rng)};
    const double ny = 25;
    const double a = eva::pp_negloglik(p, e, uu, ny);
    if (a >= eva::kSupportSentinel) continue;
    ++compared;
    CHECK(std::abs(a - factorized_pp_nll(p, e, uu, ny)) <= 1e-8 * std::max(1.0, std::abs(a)));
  }
  CHECK(compared > 50);
}

TEST_CASE("analytic likelihood gradients match central differences") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> shape(-0.3, 0.3), loc(-0.5, 0.5), scale(0.8, 1.5);
  int checked = 0;
  for (int i = 0; i < 100; ++i) {
    const auto maxima = eva::gev_sample(GevParams<double>{0, 1, 0.1}, 80, 200 + i);
    const auto exc_raw = eva::gpd_sample(eva::GpdParams<double>{2, 1, 0.1}, 60, 300 + i);
    const GevParams<double> p{loc(rng), scale(rng), i % 10 == 0 ? 0.0 : shape(rng)};
    if (eva::gev_negloglik(p, maxima) >= eva::kSupportSentinel ||
        eva::pp_negloglik(p, exc_raw, 2.0, 30) >= eva::kSupportSentinel)
      continue;
    ++checked;
    const auto ga = eva::gev_negloglik_gradient(p, maxima);
    const auto gp = eva::pp_negloglik_gradient(p, exc_raw, 2.0, 30);
    for (int k = 0; k < 3; ++k) {
      auto fg = [&](double v) {
        GevParams<double> q = p;
        (k == 0 ? q.mu : k == 1 ? q.sigma : q.xi) = v;
        return eva::gev_negloglik(q, maxima);
      };
      auto fp = [&](double v) {
        GevParams<double> q = p;
        (k == 0 ? q.mu : k == 1 ? q.sigma : q.xi) = v;
        return eva::pp_negloglik(q, exc_raw, 2.0, 30);
      };
      const double at = k == 0 ? p.mu : k == 1 ? p.sigma : p.xi;
      // Steps keep xi away from the switch so both sides use one branch.
      const double h = k == 2 && p.xi == 0 ? 1e-4 : 1e-5;
      const double ng = k == 2 && p.xi == 0
                            ? (fg(h) - fg(-h)) / (2 * h)
                            : oracle::central_difference(fg, at, h);
      const double np = k == 2 && p.xi == 0
                            ? (fp(h) - fp(-h)) / (2 * h)
                            : oracle::central_difference(fp, at, h);
      CHECK(std::abs(ga[k] - ng) <= 1e-5 * std::max(1.0, std::abs(ng)));
      CHECK(std::abs(gp[k] - np) <= 1e-5 * std::max(1.0, std::abs(np)));
    }
  }
  CHECK(checked > 50);
}

TEST_CASE("initial parameters") {
  const auto g = eva::gev_sample(GevParams<double>{0, 1, 0}, 100000, 4);
  const auto p = eva::initial_params(g);
  CHECK(std::abs(p.mu) < 0.02);
  CHECK(std::abs(p.sigma - 1) < 0.02);
  CHECK(p.xi == 0);
  CHECK_THROWS_AS(eva::initial_params(std::vector<double>{1, 1, 1}), std::invalid_argument);

  const std::vector<double> exc{5.5, 6, 7, 9};
  const auto q = eva::initial_params(exc, 5.0, 2.0);
  CHECK(q.xi == 0);
  // Implied Gumbel exceedance rate of u equals n / n_years.
  CHECK(std::exp(-(5.0 - q.mu) / q.sigma) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("fit_gev recovers known parameters") {
  const auto x = eva::gev_sample(GevParams<double>{10, 2, 0.1}, 10000, 1);
  const auto fit = eva::fit_gev(x);
  REQUIRE(fit.converged);
  REQUIRE(fit.covariance);
  const auto se = fit.standard_errors();
  CHECK(std::abs(fit.params.mu - 10) < 3 * se[0]);
  CHECK(std::abs(fit.params.sigma - 2) < 3 * se[1]);
  CHECK(std::abs(fit.params.xi - 0.1) < 3 * se[2]);
  CHECK(fit.n_used == 10000);
  CHECK(fit.neg_loglik <= eva::gev_negloglik(eva::initial_params(x), x));

  const Eigen::Matrix3d& c = *fit.covariance;
  CHECK((c - c.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(c.diagonal().minCoeff() >= 0);

  const auto g = eva::gev_sample(GevParams<double>{0, 1, 0}, 10000, 2);
  CHECK(std::abs(eva::fit_gev(g).params.xi) < 0.05);
}

TEST_CASE("fit_gev optimum is stationary") {
  const auto x = eva::gev_sample(GevParams<double>{3, 1.5, -0.1}, 500, 7);
  const auto fit = eva::fit_gev(x);
  REQUIRE(fit.converged);
  const auto g = eva::gev_negloglik_gradient(fit.params, x);
  CHECK(g.cwiseAbs().maxCoeff() < 1e-6);
  // Restarting from the optimum cannot improve it by more than the tolerance.
  eva::OptimizerSettings s;
  s.polish = false;
  const auto again = eva::fit_gev(x, s);
  CHECK(again.neg_loglik >= fit.neg_loglik - 1e-10 * std::abs(fit.neg_loglik));
}

TEST_CASE("fit_gev floors and errors") {
  const auto x = eva::gev_sample(GevParams<double>{0, 1, 0}, 9, 1);
  CHECK_THROWS_WITH_AS(eva::fit_gev(x), doctest::Contains("9 maxima"), std::invalid_argument);
  eva::OptimizerSettings s;
  s.min_maxima = 5;
  CHECK_NOTHROW(eva::fit_gev(x, s));
}

TEST_CASE("fit_pot recovers the excess distribution") {
  const double u = 20, sigma_u = 3, xi = 0.15;
  const auto daily = pot_daily(u, sigma_u, xi, 50, 200, 9);
  const auto fit = eva::fit_pot(daily, u, 200);
  REQUIRE(fit.converged);
  REQUIRE(fit.covariance);
  const auto& p = fit.params;
  // GPD scale at u implied by the GEV-equivalent parameters, and its SE by
  // the delta method.
  const double sig_u = p.sigma + p.xi * (u - p.mu);
  const Eigen::Vector3d grad(-p.xi, 1.0, u - p.mu);
  const double se_sig_u = std::sqrt(grad.dot(*fit.covariance * grad));
  CHECK(std::abs(sig_u - sigma_u) < 3 * se_sig_u);
  CHECK(std::abs(p.xi - xi) < 3 * fit.standard_errors()[2]);
  // Fitted exceedance rate of u equals the observed rate.
  const double rate = std::pow(1 + p.xi * (u - p.mu) / p.sigma, -1 / p.xi);
  CHECK(rate == doctest::Approx(static_cast<double>(fit.n_used) / 200).epsilon(1e-6));
}

TEST_CASE("fit_pot is permutation invariant and reports counts") {
  auto daily = pot_daily(10, 2, 0.1, 30, 50, 11);
  const auto a = eva::fit_pot(daily, 10, 50);
  std::reverse(daily.begin(), daily.end());
  std::mt19937_64 rng(1);
  std::shuffle(daily.begin(), daily.end(), rng);
  const auto b = eva::fit_pot(daily, 10, 50);
  CHECK(a.params.mu == b.params.mu);
  CHECK(a.params.sigma == b.params.sigma);
  CHECK(a.params.xi == b.params.xi);

  const std::vector<double> low(1000, 1.0);
  CHECK_THROWS_WITH_AS(eva::fit_pot(low, 10, 5), doctest::Contains("0 exceedances"),
                       std::invalid_argument);
}

TEST_CASE("point-process and GPD-Poisson return levels agree") {
  for (int rep = 0; rep < 10; ++rep) {
    const double u = 10;
    const auto raw = eva::gpd_sample(eva::GpdParams<double>{u, 2, 0.1 - 0.05 * rep}, 300, 40 + rep);
    std::vector<double> exc(raw.begin(), raw.end());
    std::sort(exc.begin(), exc.end());
    const double n_years = 100;
    const auto fit = eva::fit_pot_exceedances(exc, u, n_years);
    REQUIRE(fit.converged);
    std::vector<double> excess;
    for (double v : exc) excess.push_back(v - u);
    const auto gpd = oracle::gpd_profile_fit(excess);
    for (double t : {100.0, 1000.0, 1e5}) {
      const double a = eva::return_level(fit.params, t);
      const double b = oracle::gpd_poisson_return_level(u, gpd, 300 / n_years, t);
      CHECK(std::abs(a - b) <= 1e-6 * std::abs(b));
    }
  }
}
