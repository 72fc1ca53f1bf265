#include "biota/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "biota/errors.hpp"
#include "biota/psychro.hpp"

namespace biota {

namespace {

std::array<double, 24> office_shape(double peak) {
  std::array<double, 24> s{};
  for (int h = 8; h <= 18; ++h) s[static_cast<std::size_t>(h)] = 0.5;
  for (int h = 10; h <= 16; ++h) s[static_cast<std::size_t>(h)] = peak;
  s[12] = peak * 0.8;
  s[7] = s[19] = 0.15;
  return s;
}

std::array<double, 24> home_shape() {
  std::array<double, 24> s{};
  s.fill(0.1);
  for (int h = 0; h <= 6; ++h) s[static_cast<std::size_t>(h)] = 0.05;
  s[7] = s[8] = 0.8;
  for (int h = 17; h <= 22; ++h) s[static_cast<std::size_t>(h)] = 1.0;
  return s;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double latent_sd(const ZoneOccupancyProfile& z, double mean) { return std::max(0.3, z.spread * std::sqrt(mean)); }

double mean_for_scale(const ZoneOccupancyProfile& z, double scale) {
  double total = 0.0;
  for (double s : z.shape) {
    const double mu = scale * s;
    total += rounded_normal_mean(mu, latent_sd(z, mu), z.capacity);
  }
  return total / 24.0;
}

}  // namespace

OccupancyProfile cod_occupancy_profile() {
  return {{{"entrance", 50, 10.12, office_shape(1.0), 0.6},
           {"clemente", 10, 0.38, office_shape(0.6), 0.6},
           {"warhol", 25, 0.795, office_shape(0.8), 0.6},
           {"laboratory", 40, 7.905, office_shape(1.0), 0.6}}};
}

OccupancyProfile kth_occupancy_profile() {
  return {{{"living_room", 5, 1.295, home_shape(), 0.6},
           {"kitchen", 2, 0.135, home_shape(), 0.6},
           {"bathroom", 1, 0.16, home_shape(), 0.6}}};
}

WeatherProfile cod_weather_profile() { return {55.1, 6.0, 1.5, 0.647, 0.08, 0.02, 400.0}; }
WeatherProfile kth_weather_profile() { return {40.25, 3.0, 1.0, 0.741, 0.06, 0.02, 400.0}; }

double rounded_normal_mean(double mean, double sd, int capacity) {
  if (capacity <= 0) return 0.0;
  if (!(sd > 0)) return std::round(std::clamp(mean, 0.0, static_cast<double>(capacity)));
  double expected = 0.0;
  for (int k = 1; k <= capacity; ++k) {
    const double lo = normal_cdf((k - 0.5 - mean) / sd);
    const double hi = k == capacity ? 1.0 : normal_cdf((k + 0.5 - mean) / sd);
    expected += k * (hi - lo);
  }
  return expected;
}

std::array<double, 24> calibrate_latent_means(const ZoneOccupancyProfile& zone) {
  if (!(zone.target_mean >= 0) || zone.target_mean >= zone.capacity)
    throw RangeError("target mean must lie in [0, capacity)");
  const double peak = *std::max_element(zone.shape.begin(), zone.shape.end());
  if (!(peak > 0)) throw RangeError("occupancy shape needs a positive hour");
  double lo = -10.0 * zone.capacity / peak, hi = 10.0 * zone.capacity / peak;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_for_scale(zone, mid) < zone.target_mean ? lo : hi) = mid;
  }
  std::array<double, 24> out{};
  for (std::size_t h = 0; h < 24; ++h) out[h] = 0.5 * (lo + hi) * zone.shape[h];
  return out;
}

OccupancyTrace generate_occupancy(const OccupancyProfile& profile, const GeneratorOptions& options) {
  if (options.days <= 0 || options.interval.count() <= 0) throw IntervalError("need a positive span and interval");
  OccupancyTrace t;
  t.start = options.start;
  t.interval = options.interval;
  const auto n = static_cast<Eigen::Index>(std::chrono::days(options.days) / options.interval);
  const auto zc = static_cast<Eigen::Index>(profile.zones.size());
  t.occupancy = Eigen::MatrixXi::Zero(n, zc);
  t.present = MaskMatrix::Constant(n, zc, true);
  for (Eigen::Index j = 0; j < zc; ++j) {
    const auto& z = profile.zones[static_cast<std::size_t>(j)];
    t.zones.push_back(z.name);
    const auto latent = calibrate_latent_means(z);
    std::mt19937_64 eng(options.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(j));
    std::normal_distribution<double> unit(0.0, 1.0);
    std::bernoulli_distribution gap(options.missing_fraction);
    for (Eigen::Index s = 0; s < n; ++s) {
      const double mu = latent[static_cast<std::size_t>(hour_of_day(t.time_of(s)))];
      const double x = mu + latent_sd(z, mu) * unit(eng);
      t.occupancy(s, j) = static_cast<int>(std::lround(std::clamp(x, 0.0, static_cast<double>(z.capacity))));
      if (gap(eng)) {
        t.occupancy(s, j) = 0;
        t.present(s, j) = false;
      }
    }
  }
  return t;
}

WeatherSeries generate_weather(const WeatherProfile& p, const GeneratorOptions& options) {
  if (options.days <= 0 || options.interval.count() <= 0) throw IntervalError("need a positive span and interval");
  WeatherSeries w;
  w.start = options.start;
  w.interval = options.interval;
  const auto n = static_cast<Eigen::Index>(std::chrono::days(options.days) / options.interval);
  w.temp_f.resize(n);
  w.rh.resize(n);
  w.co2_ppm = Eigen::VectorXd::Constant(n, p.co2_ppm);
  w.present = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(n, true);
  std::mt19937_64 eng(options.seed * 0x9E3779B97F4A7C15ULL + 0xA5A5A5A5ULL);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution gap(options.missing_fraction);
  constexpr double phi = 0.95;
  const double innovation = std::sqrt(1.0 - phi * phi);
  double et = 0.0, er = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto since = w.time_of(i) - std::chrono::floor<std::chrono::days>(w.time_of(i));
    const double hour = std::chrono::duration<double, std::ratio<3600>>(since).count();
    const double c = std::cos(2.0 * std::numbers::pi * (hour - 15.0) / 24.0);
    et = phi * et + innovation * unit(eng);
    er = phi * er + innovation * unit(eng);
    w.temp_f[i] = std::clamp(p.mean_temp_f + p.temp_amplitude_f * c + p.temp_noise_f * et, psychro::kMinTemperatureF,
                             psychro::kMaxTemperatureF);
    w.rh[i] = std::clamp(p.mean_rh - p.rh_amplitude * c + p.rh_noise * er, 0.05, 1.0);
    if (gap(eng)) {
      w.present[i] = false;
      w.temp_f[i] = 0.0;
      w.rh[i] = 0.0;
    }
  }
  return w;
}

}  // namespace biota
