#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "eva/distributions.hpp"
#include "eva/empirical.hpp"

TEST_CASE("annual maxima per calendar year") {
  eva::DailySeries s;
  s.id = "a";
  s.values.assign(730, 1.0);
  s.values[100] = 7;
  s.values[500] = 9;
  const auto m = eva::annual_maxima(s);
  CHECK(m.values == std::vector<double>{7, 9});
  CHECK(m.n_years() == 2);

  s.values.assign(365 * 3, 2.5);
  CHECK(eva::annual_maxima(s).values == std::vector<double>(3, 2.5));
}

TEST_CASE("leap days are excluded from annual maxima") {
  eva::DailySeries s;
  s.id = "leap";
  s.start_year = 2004;
  s.leap_days = true;
  s.values.assign(366 + 365, 1.0);
  s.values[59] = 100;   // Feb 29, 2004
  s.values[60] = 5;     // Mar 1
  const auto m = eva::annual_maxima(s);
  CHECK(m.values == std::vector<double>{5, 1});
  CHECK(m.leap_days_removed);
  CHECK(m.start_year == 2004);
}

TEST_CASE("partial final year is rejected with its year") {
  eva::DailySeries s;
  s.id = "p";
  s.start_year = 1990;
  s.values.assign(365 + 100, 0.0);
  CHECK_THROWS_WITH_AS(eva::annual_maxima(s), doctest::Contains("1991"), std::invalid_argument);
}

TEST_CASE("empirical quantile rule") {
  std::vector<double> m(101);
  std::iota(m.begin(), m.end(), 1.0);
  CHECK(eva::empirical_aep(m, 2.0) == doctest::Approx(51.0).epsilon(1e-15));
  std::mt19937_64 rng(1);
  std::shuffle(m.begin(), m.end(), rng);
  CHECK(eva::empirical_aep(m, 2.0) == doctest::Approx(51.0).epsilon(1e-15));
  // p (n + 1) = 0.9 * 102 = 91.8: between the 91st and 92nd values.
  CHECK(eva::empirical_aep(m, 10.0) == doctest::Approx(91.8).epsilon(1e-13));

  double prev = -1;
  for (double t : {2.0, 5.0, 10.0, 20.0, 50.0}) {
    const double q = eva::empirical_aep(m, t);
    CHECK(q >= prev);
    prev = q;
  }
  CHECK_THROWS_WITH_AS(eva::empirical_aep(m, 60.0), doctest::Contains("120"),
                       std::invalid_argument);
  CHECK_NOTHROW(eva::empirical_aep(m, 60.0, 1.0));
  CHECK_THROWS_AS(eva::empirical_aep(m, 1.0), std::domain_error);
}

TEST_CASE("empirical quantiles of GEV maxima sit in the Monte Carlo band") {
  const eva::GevParams<double> p{0, 1, 0.1};
  const double truth = eva::gev_quantile(p, 1 - 1.0 / 1000);
  std::vector<double> est;
  for (int r = 0; r < 200; ++r) est.push_back(eva::empirical_aep(eva::gev_sample(p, 10560, 1000 + r), 1000));
  const double mean = std::accumulate(est.begin(), est.end(), 0.0) / est.size();
  double var = 0;
  for (double e : est) var += (e - mean) * (e - mean);
  const double sd = std::sqrt(var / (est.size() - 1));
  CHECK(std::abs(mean - truth) < 3 * sd / std::sqrt(200.0) + 0.02 * truth);
  int inside = 0;
  for (double e : est) inside += std::abs(e - truth) < 2.5 * sd;
  CHECK(inside >= 190);
}

TEST_CASE("empirical error shrinks with record length") {
  const eva::GevParams<double> p{0, 1, 0.1};
  const double truth = eva::gev_quantile(p, 1 - 1.0 / 100);
  std::vector<double> rmse;
  for (std::size_t n : {1000u, 10000u, 100000u}) {
    double ss = 0;
    for (int r = 0; r < 40; ++r) {
      const double e = eva::empirical_aep(eva::gev_sample(p, n, 77 + r), 100);
      ss += (e - truth) * (e - truth);
    }
    rmse.push_back(std::sqrt(ss / 40));
  }
  CHECK(rmse[1] < rmse[0]);
  CHECK(rmse[2] < rmse[1]);
}
