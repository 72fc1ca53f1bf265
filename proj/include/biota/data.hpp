#pragma once

#include <Eigen/Core>
#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "biota/model.hpp"

namespace biota {

using TimePoint = std::chrono::sys_seconds;

/// "2021-03-01T08:10:00", optional trailing "Z"; a space may replace the "T".
TimePoint parse_timestamp(std::string_view text);
std::string format_timestamp(TimePoint t);
int hour_of_day(TimePoint t);

using MaskMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Occupancy on a regular grid: one row per slot, one column per zone.
struct OccupancyTrace {
  std::vector<std::string> zones;
  TimePoint start{};
  std::chrono::seconds interval{600};
  Eigen::MatrixXi occupancy;
  MaskMatrix present;

  Eigen::Index slot_count() const { return occupancy.rows(); }
  TimePoint time_of(Eigen::Index slot) const { return start + interval * slot; }
  double interval_minutes() const { return static_cast<double>(interval.count()) / 60.0; }
  std::size_t missing() const;
  std::size_t zone_index(std::string_view name) const;
};

struct TraceSchema {
  /// Grid spacing; inferred from the smallest gap between a zone's rows when absent.
  std::optional<std::chrono::seconds> interval;
  /// Column order of the result; taken from first appearance when empty.
  std::vector<std::string> zones;
};

OccupancyTrace parse_trace(std::istream& in, const TraceSchema& schema = {});
OccupancyTrace load_trace(const std::filesystem::path& path, const TraceSchema& schema = {});
/// Missing cells are written with an empty occupancy field.
void write_trace(std::ostream& out, const OccupancyTrace& trace);

struct HourlyStats {
  double mean = 0.0;
  double std = 0.0;
  std::size_t count = 0;
  bool borrowed = false;  ///< too few samples; zone-wide statistics used instead
};

struct HourlyOccupancyModel {
  std::vector<std::string> zones;
  std::vector<int> capacities;
  std::vector<std::array<HourlyStats, 24>> hours;
  std::vector<HourlyStats> overall;

  std::string to_json() const;
  static HourlyOccupancyModel from_json(std::string_view text);
};

/// Sample (n-1) statistics per zone and hour of day.  `capacities` bound the
/// model; when empty each zone's largest observation is used.
HourlyOccupancyModel fit_hourly_model(const OccupancyTrace& trace, const std::vector<int>& capacities = {});
std::vector<int> capacities_for(const BuildingConfig& config, const std::vector<std::string>& zones);

/// Fills every missing cell with round(clamp(N(mean, std), 0, capacity)).  Each
/// cell draws from its own stream keyed by (seed, zone, slot).
OccupancyTrace impute(const OccupancyTrace& trace, const HourlyOccupancyModel& model, std::uint64_t seed);

/// Coarser grids keep the last observation of each bucket; finer grids repeat values.
OccupancyTrace resample(const OccupancyTrace& trace, std::chrono::seconds interval);

struct WeatherSeries {
  TimePoint start{};
  std::chrono::seconds interval{600};
  Eigen::VectorXd temp_f;
  Eigen::VectorXd rh;
  Eigen::VectorXd co2_ppm;
  Eigen::Array<bool, Eigen::Dynamic, 1> present;

  Eigen::Index size() const { return temp_f.size(); }
  TimePoint time_of(Eigen::Index i) const { return start + interval * i; }
  /// Reading in force at `t` (last sample at or before it, clamped to the series).
  OutdoorConditions at(TimePoint t) const;
  std::size_t missing() const;
};

/// Header: timestamp,outdoor_temp_f,outdoor_rh[,outdoor_co2_ppm].  RH is a fraction.
WeatherSeries parse_weather(std::istream& in, std::optional<std::chrono::seconds> interval = std::nullopt);
WeatherSeries load_weather(const std::filesystem::path& path);
void write_weather(std::ostream& out, const WeatherSeries& weather);
/// Seeded hour-of-day normal draws, clamped to the psychrometric range.
WeatherSeries impute_weather(const WeatherSeries& weather, std::uint64_t seed);

/// Occupancy trace with columns in the building's zone order.
OccupancyTrace align_to_config(const OccupancyTrace& trace, const BuildingConfig& config);

}  // namespace biota
