#include <gtest/gtest.h>

#include <cmath>

#include "biota/data.hpp"
#include "biota/generator.hpp"
#include "support.hpp"

using namespace biota;
using biota::testing::data_path;

namespace {

double zone_mean(const OccupancyTrace& t, Eigen::Index j) {
  double s = 0;
  std::size_t n = 0;
  for (Eigen::Index i = 0; i < t.slot_count(); ++i)
    if (t.present(i, j)) {
      s += t.occupancy(i, j);
      ++n;
    }
  return s / static_cast<double>(n);
}

GeneratorOptions week(std::uint64_t seed) {
  GeneratorOptions o;
  o.start = parse_timestamp("2021-03-01T00:00:00");
  o.seed = seed;
  return o;
}

}  // namespace

TEST(Generator, RoundedNormalMeanMatchesSum) {
  for (double mu : {0.2, 1.5, 4.0}) {
    for (double sd : {0.3, 1.0, 2.5}) {
      // Direct sum over integer outcomes with the normal CDF.
      const int cap = 6;
      auto cdf = [&](double x) { return 0.5 * std::erfc(-(x - mu) / (sd * std::sqrt(2.0))); };
      double want = 0;
      for (int k = 1; k < cap; ++k) want += k * (cdf(k + 0.5) - cdf(k - 0.5));
      want += cap * (1 - cdf(cap - 0.5));
      EXPECT_NEAR(rounded_normal_mean(mu, sd, cap), want, 1e-12);
    }
  }
}

TEST(Generator, CalibratedMeansHitTarget) {
  for (const auto& z : cod_occupancy_profile().zones) {
    const auto latent = calibrate_latent_means(z);
    double m = 0;
    for (double mu : latent) m += rounded_normal_mean(mu, std::max(0.3, z.spread * std::sqrt(mu)), z.capacity);
    EXPECT_NEAR(m / 24, z.target_mean, 1e-6) << z.name;
  }
}

TEST(Generator, CodWeekInsidePublishedBands) {
  const auto t = load_trace(data_path("cod_synth.csv"));
  const auto e = t.zone_index("entrance"), c = t.zone_index("clemente"), w = t.zone_index("warhol"),
             l = t.zone_index("laboratory");
  EXPECT_GE(zone_mean(t, e), 7.88);
  EXPECT_LE(zone_mean(t, e), 12.36);
  EXPECT_GE(zone_mean(t, c), 0.21);
  EXPECT_LE(zone_mean(t, c), 0.55);
  EXPECT_GE(zone_mean(t, w), 0.31);
  EXPECT_LE(zone_mean(t, w), 1.28);
  EXPECT_GE(zone_mean(t, l), 6.14);
  EXPECT_LE(zone_mean(t, l), 9.67);
}

TEST(Generator, KthWeekInsidePublishedBands) {
  const auto t = load_trace(data_path("kth_synth.csv"));
  EXPECT_GE(zone_mean(t, t.zone_index("living_room")), 1.10);
  EXPECT_LE(zone_mean(t, t.zone_index("living_room")), 1.49);
  EXPECT_GE(zone_mean(t, t.zone_index("kitchen")), 0.0);
  EXPECT_LE(zone_mean(t, t.zone_index("kitchen")), 0.27);
  EXPECT_GE(zone_mean(t, t.zone_index("bathroom")), 0.0);
  EXPECT_LE(zone_mean(t, t.zone_index("bathroom")), 0.32);
}

TEST(Generator, FixturesRegenerateFromSeed) {
  const auto cod = generate_occupancy(cod_occupancy_profile(), week(2021));
  const auto file = load_trace(data_path("cod_synth.csv"), {cod.interval, cod.zones});
  EXPECT_EQ(cod.present, file.present);
  EXPECT_EQ(cod.occupancy.cwiseProduct(cod.present.cast<int>()), file.occupancy.cwiseProduct(file.present.cast<int>()));
}

TEST(Generator, WeatherInsidePublishedBands) {
  const auto cod = load_weather(data_path("cod_weather.csv"));
  const auto kth = load_weather(data_path("kth_weather.csv"));
  auto mean = [](const WeatherSeries& w, const Eigen::VectorXd& v) {
    double s = 0;
    std::size_t n = 0;
    for (Eigen::Index i = 0; i < w.size(); ++i)
      if (w.present[i]) {
        s += v[i];
        ++n;
      }
    return s / static_cast<double>(n);
  };
  EXPECT_GE(mean(cod, cod.temp_f), 53.3);
  EXPECT_LE(mean(cod, cod.temp_f), 56.9);
  EXPECT_GE(mean(cod, cod.rh), 0.6339);
  EXPECT_LE(mean(cod, cod.rh), 0.6596);
  EXPECT_GE(mean(kth, kth.temp_f), 39.3);
  EXPECT_LE(mean(kth, kth.temp_f), 41.2);
  EXPECT_GE(mean(kth, kth.rh), 0.723);
  EXPECT_LE(mean(kth, kth.rh), 0.759);
}

TEST(Generator, ShapeAndMissingFraction) {
  const auto t = generate_occupancy(kth_occupancy_profile(), week(5));
  EXPECT_EQ(t.slot_count(), 7 * 144);
  const double frac = static_cast<double>(t.missing()) / static_cast<double>(t.occupancy.size());
  EXPECT_NEAR(frac, 0.03, 0.01);
  const auto w = generate_weather(cod_weather_profile(), week(5));
  EXPECT_EQ(w.size(), 7 * 144);
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (!w.present[i]) continue;
    EXPECT_GE(w.temp_f[i], 32);
    EXPECT_LE(w.temp_f[i], 140);
    EXPECT_GE(w.rh[i], 0);
    EXPECT_LE(w.rh[i], 1);
  }
}

TEST(Generator, SeedsDiffer) {
  const auto a = generate_occupancy(kth_occupancy_profile(), week(1));
  const auto b = generate_occupancy(kth_occupancy_profile(), week(2));
  EXPECT_NE(a.occupancy, b.occupancy);
  EXPECT_EQ(generate_occupancy(kth_occupancy_profile(), week(1)).occupancy, a.occupancy);
}
