#include <doctest.h>

#include <algorithm>
#include <limits>
#include <numeric>

#include "eva/series.hpp"

using eva::Season;

TEST_CASE("season assignment") {
  CHECK(eva::assign_season(1) == Season::DJF);
  CHECK(eva::assign_season(59) == Season::DJF);
  CHECK(eva::assign_season(60) == Season::MAM);
  CHECK(eva::assign_season(182) == Season::JJA);
  CHECK(eva::assign_season(335) == Season::DJF);
  CHECK(eva::assign_season(334) == Season::SON);
  std::array<int, 4> counts{};
  for (int d = 1; d <= 365; ++d) ++counts[static_cast<int>(eva::assign_season(d))];
  CHECK(counts == std::array<int, 4>{90, 92, 92, 91});
  CHECK_THROWS_AS(eva::assign_season(0), std::out_of_range);
  CHECK_THROWS_AS(eva::assign_season(366), std::out_of_range);
}

TEST_CASE("season names") {
  for (Season s : eva::kSeasons) CHECK(eva::parse_season(eva::season_name(s)) == s);
  CHECK_THROWS_AS(eva::parse_season("JJAS"), std::invalid_argument);
}

TEST_CASE("months") {
  CHECK(eva::month_of_day(31) == 1);
  CHECK(eva::month_of_day(32) == 2);
  CHECK(eva::month_of_day(365) == 12);
}

TEST_CASE("calendar lengths") {
  eva::DailySeries s;
  s.start_year = 2000;
  s.leap_days = true;
  s.values.assign(366 + 365, 0.0);
  CHECK(s.n_years() == 2);
  CHECK(s.whole_years());
  s.values.pop_back();
  CHECK(s.n_years() == 2);
  CHECK_FALSE(s.whole_years());
  s.leap_days = false;
  s.values.assign(730, 0.0);
  CHECK(s.n_years() == 2);
  CHECK(s.whole_years());
  CHECK(eva::is_leap_year(2000));
  CHECK_FALSE(eva::is_leap_year(1900));
  CHECK(eva::is_leap_year(2004));
}

TEST_CASE("for_each_day marks the leap day") {
  eva::DailySeries s;
  s.start_year = 2004;
  s.leap_days = true;
  s.values.assign(366, 0.0);
  int leap_hits = 0, last_doy = 0;
  eva::for_each_day(s, [&](std::size_t i, int year, int doy) {
    CHECK(year == 2004);
    if (doy == 0) {
      ++leap_hits;
      CHECK(i == 59);
    } else {
      last_doy = doy;
    }
  });
  CHECK(leap_hits == 1);
  CHECK(last_doy == 365);
}

TEST_CASE("season split partitions the days") {
  eva::DailySeries s;
  s.start_year = 2003;
  s.leap_days = true;
  s.values.resize(365 + 366);
  std::iota(s.values.begin(), s.values.end(), 0.0);
  const auto parts = eva::split_by_season(s);
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  CHECK(total == s.values.size());
  CHECK(parts[0].size() == 2 * 90 + 1);   // Feb 29 pooled with DJF
  CHECK(parts[1].size() == 2 * 92);
  std::vector<double> all;
  for (const auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  std::sort(all.begin(), all.end());
  CHECK(all == s.values);
}

TEST_CASE("validation") {
  eva::DailySeries s;
  s.id = "A";
  s.variable = "precip";
  s.values = {0.0, 1.0, -0.5};
  CHECK_THROWS_WITH_AS(eva::validate(s), doctest::Contains("negative"), std::invalid_argument);
  s.variable = "tasmax";
  CHECK_NOTHROW(eva::validate(s));
  s.values[1] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(eva::validate(s), std::invalid_argument);
}
