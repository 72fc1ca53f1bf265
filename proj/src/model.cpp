#include "biota/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "biota/cost.hpp"
#include "biota/errors.hpp"
#include "biota/units.hpp"

namespace biota {

namespace {

// Occupant CO2 added over one interval, in ppm of the zone volume.
double generation_ppm(const ZoneProperties& z, double occupancy, double interval_minutes) {
  return occupancy * z.co2_per_person_cfm * interval_minutes / z.volume_ft3 / units::kPpm;
}

}  // namespace

void ZoneProperties::validate() const {
  auto fail = [&](const std::string& what) {
    throw ConfigError(fmt::format("zone '{}': {}", name, what));
  };
  if (name.empty()) throw ConfigError("zone without a name");
  if (!(volume_ft3 > 0)) fail("volume must be positive");
  if (!(co2_per_person_cfm > 0)) fail("co2_per_person must be positive");
  if (!(heat_per_person_kw >= 0)) fail("heat_per_person must be nonnegative");
  if (!(thermal_load_kw >= 0)) fail("thermal_load must be nonnegative");
  if (capacity < 1) fail("capacity must be at least 1");
  if (!(co2_setpoint_ppm > 400 && co2_setpoint_ppm <= 2000)) fail("co2_setpoint outside (400, 2000]");
  if (!(temp_setpoint_f >= 50 && temp_setpoint_f <= 90)) fail("temp_setpoint outside [50, 90]");
  if (!(min_airflow_cfm >= 0)) fail("min_airflow must be nonnegative");
}

std::size_t BuildingConfig::zone_index(std::string_view zone_name) const {
  for (std::size_t j = 0; j < zones.size(); ++j)
    if (zones[j].name == zone_name) return j;
  throw ConfigError(fmt::format("unknown zone '{}'", zone_name));
}

void BuildingConfig::validate() const {
  if (zones.empty()) throw ConfigError("building has no zones");
  for (std::size_t j = 0; j < zones.size(); ++j) {
    zones[j].validate();
    for (std::size_t k = 0; k < j; ++k)
      if (zones[k].name == zones[j].name) throw ConfigError("duplicate zone '" + zones[j].name + "'");
  }
  if (!(coil_mass_flow_kg_s > 0)) throw ConfigError("coil_mass_flow must be positive");
  if (!(water_specific_heat > 0)) throw ConfigError("water_specific_heat must be positive");
  if (!(electricity_rate >= 0)) throw ConfigError("electricity_rate must be nonnegative");
  if (!(pressure_pa > 0)) throw ConfigError("pressure must be positive");
  if (!(interval_minutes > 0)) throw ConfigError("interval must be positive");
  if (!(return_air_rh >= 0 && return_air_rh <= 1)) throw ConfigError("return_air_rh outside [0, 1]");
  if (!(co2_hold_floor_ppm >= 0)) throw ConfigError("co2_hold_floor must be nonnegative");
  if (!(design_outdoor.co2_ppm >= 0 && design_outdoor.co2_ppm < co2_hold_floor_ppm))
    throw ConfigError("design outdoor CO2 must lie below the hold floor");
  const auto& m = mixing;
  if (!(m.fresh_fraction >= 0 && m.fresh_fraction <= 1)) throw ConfigError("fresh_fraction outside [0, 1]");
  if (!(m.min_fresh_fraction >= 0 && m.min_fresh_fraction <= 1))
    throw ConfigError("min_fresh_fraction outside [0, 1]");
}

void SensorFrame::validate(const BuildingConfig& config) const {
  const auto n = static_cast<Eigen::Index>(config.zone_count());
  if (occupancy.size() != n || indoor_co2.size() != n || indoor_temp.size() != n)
    throw ConfigError(fmt::format("frame has {} zones, config has {}", occupancy.size(), n));
  if (!(interval_minutes > 0)) throw RangeError("frame interval must be positive");
  psychro::AirState<double>{outdoor_temp_f, outdoor_rh, config.pressure_pa}.validate();
  if (!(outdoor_co2_ppm >= 0)) throw RangeError("outdoor CO2 must be nonnegative");
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& z = config.zones[static_cast<std::size_t>(j)];
    if (occupancy[j] < 0 || occupancy[j] > z.capacity)
      throw RangeError(fmt::format("zone '{}': occupancy {} outside [0, {}]", z.name, occupancy[j], z.capacity));
    if (!std::isfinite(indoor_co2[j]) || indoor_co2[j] < 0)
      throw RangeError(fmt::format("zone '{}': bad indoor CO2", z.name));
    psychro::check_temperature(indoor_temp[j]);
  }
}

MixedAir mix_air(double f, const AirSample& outdoor, const AirSample& ret) {
  if (!(f >= 0 && f <= 1)) throw RangeError("fresh fraction outside [0, 1]");
  const double w_out = psychro::humidity_ratio(outdoor.state);
  const double w_ret = psychro::humidity_ratio(ret.state);
  MixedAir m;
  m.state.pressure = outdoor.state.pressure;
  // Endpoints are copied rather than blended so f = 0 and f = 1 are exact.
  if (f == 1.0) {
    m.state = outdoor.state;
    m.humidity_ratio = w_out;
    m.co2_ppm = outdoor.co2_ppm;
    return m;
  }
  if (f == 0.0) {
    m.state = ret.state;
    m.humidity_ratio = w_ret;
    m.co2_ppm = ret.co2_ppm;
    return m;
  }
  const double g = 1.0 - f;
  m.state.temperature_f = f * outdoor.state.temperature_f + g * ret.state.temperature_f;
  m.humidity_ratio = f * w_out + g * w_ret;
  m.co2_ppm = f * outdoor.co2_ppm + g * ret.co2_ppm;
  m.state.relative_humidity =
      std::min(1.0, psychro::relative_humidity(m.state.temperature_f, m.humidity_ratio, m.state.pressure));
  return m;
}

double VentilationLaw::flow(double occupancy) const { return std::max(floor_cfm, raw(occupancy)); }

VentilationLaw ventilation_law(const ZoneProperties& z, double indoor, double mixed, double interval,
                               double hold_floor) {
  if (!(interval > 0)) throw DomainError("interval must be positive");
  VentilationLaw law;
  law.floor_cfm = z.min_airflow_cfm;
  const double target = std::min(z.co2_setpoint_ppm, std::max(indoor, hold_floor));
  if (indoor >= target) {
    // One-step balance: choose the flow that brings the next reading to `target`.
    const double driving = indoor - mixed;
    if (driving <= 0) {
      if (indoor > target) throw InfeasibleError("mixed air is not below the indoor CO2 level");
      law.per_person_cfm = std::numeric_limits<double>::infinity();
      return law;
    }
    law.intercept_cfm = (indoor - target) * z.volume_ft3 / (interval * driving);
    law.per_person_cfm = z.co2_per_person_cfm / (driving * units::kPpm);
  } else {
    // Reading is below the level worth holding: supply the steady-state flow for it.
    const double driving = target - mixed;
    if (driving <= 0) {
      law.per_person_cfm = std::numeric_limits<double>::infinity();
      return law;
    }
    law.per_person_cfm = z.co2_per_person_cfm / (driving * units::kPpm);
  }
  return law;
}

double required_ventilation_flow(const ZoneProperties& z, int occupancy, double indoor, double mixed,
                                 double interval, double hold_floor) {
  if (occupancy < 0) throw DomainError("negative occupancy");
  const auto law = ventilation_law(z, indoor, mixed, interval, hold_floor);
  if (std::isinf(law.per_person_cfm)) {
    if (occupancy > 0)
      throw InfeasibleError(fmt::format("zone '{}': mixed air CO2 {} ppm cannot dilute occupants", z.name, mixed));
    return std::max(law.floor_cfm, law.intercept_cfm);
  }
  return law.flow(occupancy);
}

SupplyTemperature supply_temperature(const ZoneProperties& z, int occupancy, double mass_flow, double w_mixed) {
  if (!(mass_flow > 0)) throw DomainError("supply temperature needs a positive mass flow");
  const double load = z.thermal_load_kw + occupancy * z.heat_per_person_kw;
  SupplyTemperature s;
  s.unclamped_f =
      z.temp_setpoint_f - units::kFahrenheitPerKelvin * load / (mass_flow * psychro::moist_heat_capacity(w_mixed));
  s.temp_f = std::clamp(s.unclamped_f, kMinSupplyF, kMaxSupplyF);
  s.clamped = s.temp_f != s.unclamped_f;
  return s;
}

Eigen::VectorXd ControlDecision::flows() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(zones.size()));
  for (std::size_t j = 0; j < zones.size(); ++j) v[static_cast<Eigen::Index>(j)] = zones[j].flow_cfm;
  return v;
}

Eigen::VectorXd ControlDecision::supply_temps() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(zones.size()));
  for (std::size_t j = 0; j < zones.size(); ++j) v[static_cast<Eigen::Index>(j)] = zones[j].supply_temp_f;
  return v;
}

Eigen::VectorXd ControlDecision::mass_flows() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(zones.size()));
  for (std::size_t j = 0; j < zones.size(); ++j) v[static_cast<Eigen::Index>(j)] = zones[j].mass_flow_kg_s;
  return v;
}

ZoneDecision control_zone_at(const BuildingConfig& config, std::size_t zone, int occupancy,
                             const SensorFrame& frame, double fresh_fraction) {
  const auto& z = config.zones.at(zone);
  const auto j = static_cast<Eigen::Index>(zone);
  const AirSample outdoor{{frame.outdoor_temp_f, frame.outdoor_rh, config.pressure_pa}, frame.outdoor_co2_ppm};
  const AirSample ret{{frame.indoor_temp[j], config.return_air_rh, config.pressure_pa}, frame.indoor_co2[j]};

  ZoneDecision d;
  d.fresh_fraction = fresh_fraction;
  d.mixed = mix_air(fresh_fraction, outdoor, ret);
  d.flow_cfm = required_ventilation_flow(z, occupancy, frame.indoor_co2[j], d.mixed.co2_ppm,
                                         frame.interval_minutes, config.co2_hold_floor_ppm);
  d.specific_volume =
      psychro::specific_volume(d.mixed.state.temperature_f, d.mixed.humidity_ratio, config.pressure_pa);
  d.mass_flow_kg_s = mass_flow_from_volumetric(d.flow_cfm, d.specific_volume);
  if (d.mass_flow_kg_s > 0) {
    const auto s = supply_temperature(z, occupancy, d.mass_flow_kg_s, d.mixed.humidity_ratio);
    d.supply_temp_f = s.temp_f;
    d.supply_clamped = s.clamped;
  } else {
    d.supply_temp_f = std::clamp(z.temp_setpoint_f, kMinSupplyF, kMaxSupplyF);
    d.supply_clamped = d.supply_temp_f != z.temp_setpoint_f;
  }
  // Cooling below the dew point wrings water out; the supply cannot be wetter than saturated.
  d.supply_humidity_ratio =
      std::min(d.mixed.humidity_ratio, psychro::saturation_humidity_ratio(d.supply_temp_f, config.pressure_pa));
  d.supply_rh = std::min(
      1.0, psychro::relative_humidity(d.supply_temp_f, d.supply_humidity_ratio, config.pressure_pa));
  return d;
}

ZoneDecision control_zone(const BuildingConfig& config, std::size_t zone, int occupancy, const SensorFrame& frame) {
  const auto& policy = config.mixing;
  if (policy.mode == MixingMode::fixed) return control_zone_at(config, zone, occupancy, frame, policy.fresh_fraction);

  // Walk from all-fresh downward so that an equal-cost fraction found later never displaces it.
  ZoneDecision best;
  double best_cost = std::numeric_limits<double>::infinity();
  bool found = false;
  for (int k = 100; k >= 0; --k) {
    const double f = k / 100.0;
    if (f < policy.min_fresh_fraction) break;
    ZoneDecision d;
    try {
      d = control_zone_at(config, zone, occupancy, frame, f);
    } catch (const InfeasibleError&) {
      continue;
    }
    const double c = zone_cost(config, d).power_kw();
    if (!found || c < best_cost - policy.tie_tolerance * std::max(1.0, std::abs(best_cost))) {
      best = d;
      best_cost = c;
      found = true;
    }
  }
  if (!found)
    throw InfeasibleError(fmt::format("zone '{}': no fresh-air fraction reaches the CO2 setpoint",
                                      config.zones[zone].name));
  return best;
}

ControlDecision control_step(const BuildingConfig& config, const SensorFrame& frame) {
  ControlDecision out;
  out.timeslot = frame.timeslot;
  out.zones.reserve(config.zone_count());
  for (std::size_t j = 0; j < config.zone_count(); ++j)
    out.zones.push_back(control_zone(config, j, frame.occupancy[static_cast<Eigen::Index>(j)], frame));
  return out;
}

ZoneState predict_zone_state(const BuildingConfig& config, std::size_t zone, const ZoneDecision& d,
                             double occupancy, const ZoneState& start, double interval) {
  const auto& z = config.zones.at(zone);
  const double k = d.flow_cfm * interval / z.volume_ft3;
  ZoneState next;
  // Large flows overshoot the explicit step; a room never drops below its supply air.
  next.co2_ppm = std::max(d.mixed.co2_ppm,
                          (1.0 - k) * start.co2_ppm + k * d.mixed.co2_ppm + generation_ppm(z, occupancy, interval));
  if (d.mass_flow_kg_s > 0) {
    const double load = z.thermal_load_kw + occupancy * z.heat_per_person_kw;
    next.temp_f = d.supply_temp_f + units::kFahrenheitPerKelvin * load /
                                        (d.mass_flow_kg_s * psychro::moist_heat_capacity(d.mixed.humidity_ratio));
  } else {
    next.temp_f = start.temp_f;
  }
  return next;
}

SensorFrame simulate_next(const BuildingConfig& config, const SensorFrame& frame, const ControlDecision& decision,
                          const Eigen::VectorXi& next_occupancy) {
  SensorFrame next = frame;
  next.timeslot = frame.timeslot + 1;
  next.occupancy = next_occupancy;
  for (std::size_t j = 0; j < config.zone_count(); ++j) {
    const auto e = static_cast<Eigen::Index>(j);
    const auto s = predict_zone_state(config, j, decision.zones[j], frame.occupancy[e],
                                      {frame.indoor_co2[e], frame.indoor_temp[e]}, frame.interval_minutes);
    next.indoor_co2[e] = s.co2_ppm;
    next.indoor_temp[e] = s.temp_f;
  }
  return next;
}

ConsistencyVerdict verify_consistency(const BuildingConfig& config, const SensorFrame& prev,
                                      const ControlDecision& prev_decision, const SensorFrame& current,
                                      const VerifyTolerance& tol) {
  ConsistencyVerdict v;
  const double dt = prev.interval_minutes;
  for (std::size_t j = 0; j < config.zone_count(); ++j) {
    const auto e = static_cast<Eigen::Index>(j);
    const auto& z = config.zones[j];
    const auto& d = prev_decision.zones.at(j);
    const double o = prev.occupancy[e];

    // CO2 mass balance over the interval, written out in full.
    const double exchanged = d.flow_cfm * dt / z.volume_ft3;
    const double expected_co2 =
        std::max(d.mixed.co2_ppm, prev.indoor_co2[e] - exchanged * (prev.indoor_co2[e] - d.mixed.co2_ppm) +
                                      o * z.co2_per_person_cfm * dt * 1e6 / z.volume_ft3);

    // Heat balance: supply stream absorbs envelope and occupant load.
    double temp_residual = 0.0;
    if (d.mass_flow_kg_s > 0) {
      const double capacity_kw_per_k = d.mass_flow_kg_s * (1.006 + 1.86 * d.mixed.humidity_ratio);
      const double absorbed_kw = capacity_kw_per_k * (current.indoor_temp[e] - d.supply_temp_f) / 1.8;
      temp_residual = (absorbed_kw - (z.thermal_load_kw + o * z.heat_per_person_kw)) * 1.8 / capacity_kw_per_k;
    } else {
      temp_residual = current.indoor_temp[e] - prev.indoor_temp[e];
    }

    ZoneResidual r{j, current.indoor_co2[e] - expected_co2, temp_residual};
    v.max_abs_co2 = std::max(v.max_abs_co2, std::abs(r.co2_ppm));
    v.max_abs_temp = std::max(v.max_abs_temp, std::abs(r.temp_f));
    if (!(std::abs(r.co2_ppm) <= tol.co2_ppm && std::abs(r.temp_f) <= tol.temp_f)) v.offending.push_back(j);
    v.residuals.push_back(r);
  }
  v.accepted = v.offending.empty();
  return v;
}

}  // namespace biota
