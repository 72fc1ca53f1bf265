#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "biota/data.hpp"

namespace biota {

struct ZoneOccupancyProfile {
  std::string name;
  int capacity = 1;
  double target_mean = 0.0;          ///< weekly mean of the generated counts
  std::array<double, 24> shape{};    ///< relative hour-of-day activity, any scale
  double spread = 0.6;               ///< latent std = spread * sqrt(latent mean), at least 0.3
};

struct OccupancyProfile {
  std::vector<ZoneOccupancyProfile> zones;
};

struct WeatherProfile {
  double mean_temp_f = 55.0;
  double temp_amplitude_f = 5.0;  ///< diurnal half-swing, warmest at 15:00
  double temp_noise_f = 1.0;
  double mean_rh = 0.65;
  double rh_amplitude = 0.08;     ///< driest at 15:00
  double rh_noise = 0.02;
  double co2_ppm = 400.0;
};

/// Office-hours building with the published per-zone mean bands.
OccupancyProfile cod_occupancy_profile();
/// Small apartment, busy mornings and evenings.
OccupancyProfile kth_occupancy_profile();
WeatherProfile cod_weather_profile();
WeatherProfile kth_weather_profile();

/// Mean of round(clamp(N(mean, sd), 0, capacity)).
double rounded_normal_mean(double mean, double sd, int capacity);

/// Latent hourly means whose rounded, clamped draws average to `target_mean`.
std::array<double, 24> calibrate_latent_means(const ZoneOccupancyProfile& zone);

struct GeneratorOptions {
  TimePoint start{};
  int days = 7;
  std::chrono::seconds interval{600};
  double missing_fraction = 0.03;
  std::uint64_t seed = 1;
};

OccupancyTrace generate_occupancy(const OccupancyProfile& profile, const GeneratorOptions& options);
/// Temperatures stay inside the psychrometric range.
WeatherSeries generate_weather(const WeatherProfile& profile, const GeneratorOptions& options);

}  // namespace biota
