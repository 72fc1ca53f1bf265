#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "biota/psychro.hpp"

namespace biota {

struct ZoneProperties {
  std::string name;
  double volume_ft3 = 0;
  double co2_per_person_cfm = 0;
  double heat_per_person_kw = 0;
  double thermal_load_kw = 0;
  int capacity = 1;
  double co2_setpoint_ppm = 1000;
  double temp_setpoint_f = 75;
  double min_airflow_cfm = 0;

  void validate() const;
};

enum class MixingMode { fixed, optimize };

/// How the air handler picks the outdoor-air share of each zone's supply.
/// `fixed` uses `fresh_fraction` as is.  `optimize` scans 101 points on [0, 1],
/// skips those below `min_fresh_fraction`, and keeps the cheapest; near-ties go to
/// the larger fraction.
struct MixingPolicy {
  MixingMode mode = MixingMode::fixed;
  double fresh_fraction = 1.0;
  double min_fresh_fraction = 0.05;
  double tie_tolerance = 1e-12;
};

struct OutdoorConditions {
  double temp_f = 55.0;
  double rh = 0.65;
  double co2_ppm = 400.0;
};

struct BuildingConfig {
  std::string name;
  std::vector<ZoneProperties> zones;
  double coil_setpoint_f = 44.0;
  double coil_mass_flow_kg_s = 1.0;
  double water_specific_heat = 4.186;
  double electricity_rate = 0.0;
  std::string currency = "USD";
  double pressure_pa = psychro::kStandardPressure;
  double interval_minutes = 10.0;
  /// Lowest CO2 level the ventilation loop will hold a zone at.  Below it the
  /// controller supplies the steady-state flow for this level instead of the
  /// (smaller) flow that would merely keep the current reading.
  double co2_hold_floor_ppm = 800.0;
  double return_air_rh = 0.5;
  /// Outdoor conditions used when no weather series is supplied.
  OutdoorConditions design_outdoor;
  MixingPolicy mixing;

  std::size_t zone_count() const { return zones.size(); }
  std::size_t zone_index(std::string_view zone_name) const;
  void validate() const;
};

struct SensorFrame {
  std::size_t timeslot = 0;
  double interval_minutes = 10.0;
  double outdoor_temp_f = 55.0;
  double outdoor_rh = 0.65;
  double outdoor_co2_ppm = 400.0;
  Eigen::VectorXi occupancy;
  Eigen::VectorXd indoor_co2;
  Eigen::VectorXd indoor_temp;

  Eigen::Index zone_count() const { return occupancy.size(); }
  /// Shape, range and capacity checks; throws RangeError or ConfigError.
  void validate(const BuildingConfig& config) const;
};

struct AirSample {
  psychro::AirState<double> state;
  double co2_ppm = 400.0;
};

struct MixedAir {
  psychro::AirState<double> state;
  double humidity_ratio = 0.0;
  double co2_ppm = 0.0;
};

MixedAir mix_air(double fresh_fraction, const AirSample& outdoor, const AirSample& return_air);

/// Flow demanded by the CO2 balance as an affine function of occupancy,
/// floored at the zone minimum.
struct VentilationLaw {
  double intercept_cfm = 0.0;
  double per_person_cfm = 0.0;
  double floor_cfm = 0.0;

  double raw(double occupancy) const { return intercept_cfm + per_person_cfm * occupancy; }
  double flow(double occupancy) const;
};

VentilationLaw ventilation_law(const ZoneProperties& zone, double indoor_co2, double mixed_co2,
                               double interval_minutes, double hold_floor_ppm = 0.0);

double required_ventilation_flow(const ZoneProperties& zone, int occupancy, double indoor_co2,
                                 double mixed_co2, double interval_minutes,
                                 double hold_floor_ppm = 0.0);

struct SupplyTemperature {
  double temp_f = 0.0;
  double unclamped_f = 0.0;
  bool clamped = false;
};

inline constexpr double kMinSupplyF = 55.0;
inline constexpr double kMaxSupplyF = 120.0;

SupplyTemperature supply_temperature(const ZoneProperties& zone, int occupancy, double mass_flow_kg_s,
                                     double w_mixed);

struct ZoneDecision {
  double fresh_fraction = 1.0;
  MixedAir mixed;
  double flow_cfm = 0.0;
  double specific_volume = 0.0;
  double mass_flow_kg_s = 0.0;
  double supply_temp_f = 0.0;
  double supply_humidity_ratio = 0.0;
  double supply_rh = 0.0;
  bool supply_clamped = false;
};

struct ControlDecision {
  std::size_t timeslot = 0;
  std::vector<ZoneDecision> zones;

  Eigen::VectorXd flows() const;
  Eigen::VectorXd supply_temps() const;
  Eigen::VectorXd mass_flows() const;
};

/// Decision for a single zone as if it reported `occupancy`.  Zones do not
/// interact, so this is the building decision restricted to one row.
ZoneDecision control_zone(const BuildingConfig& config, std::size_t zone, int occupancy,
                          const SensorFrame& frame);
/// Same, with the mixing share pinned.
ZoneDecision control_zone_at(const BuildingConfig& config, std::size_t zone, int occupancy,
                             const SensorFrame& frame, double fresh_fraction);
ControlDecision control_step(const BuildingConfig& config, const SensorFrame& frame);

struct ZoneState {
  double co2_ppm = 0.0;
  double temp_f = 0.0;
};

/// State at the end of one interval given the decision in force and the
/// people actually present during it.  Temperature is quasi-steady: the supply
/// stream absorbs the zone load, so the room settles at supply + load rise.
ZoneState predict_zone_state(const BuildingConfig& config, std::size_t zone, const ZoneDecision& decision,
                             double occupancy, const ZoneState& start, double interval_minutes);

/// Measurements one interval after `frame`, occupancy replaced with `next_occupancy`.
SensorFrame simulate_next(const BuildingConfig& config, const SensorFrame& frame,
                          const ControlDecision& decision, const Eigen::VectorXi& next_occupancy);

struct VerifyTolerance {
  double co2_ppm = 10.0;
  double temp_f = 0.5;
};

struct ZoneResidual {
  std::size_t zone = 0;
  double co2_ppm = 0.0;
  double temp_f = 0.0;
};

struct ConsistencyVerdict {
  bool accepted = true;
  std::vector<ZoneResidual> residuals;
  std::vector<std::size_t> offending;
  double max_abs_co2 = 0.0;
  double max_abs_temp = 0.0;
};

ConsistencyVerdict verify_consistency(const BuildingConfig& config, const SensorFrame& prev_frame,
                                      const ControlDecision& prev_decision, const SensorFrame& current_frame,
                                      const VerifyTolerance& tolerance = {});

}  // namespace biota
