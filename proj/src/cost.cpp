#include "biota/cost.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "biota/errors.hpp"
#include "biota/psychro.hpp"
#include "biota/units.hpp"

namespace biota {

double mass_flow_from_volumetric(double flow_cfm, double sv) {
  if (!(sv > 0)) throw DomainError("specific volume must be positive");
  return flow_cfm * units::kCfmToCubicMetresPerSecond / sv;
}

CondensateFlow condensate_mass_flow(double m_mixed, double w_mixed, double w_supply) {
  const double raw = m_mixed * (w_mixed - w_supply);
  if (raw < 0) return {0.0, true};
  return {raw, raw == 0.0};
}

double coil_cost(double m_mixed, double h_supply, double h_mixed, double m_cond, double h_cond) {
  return std::abs(m_mixed * (h_supply - h_mixed) + m_cond * h_cond);
}

double coil_refrigerant_temp(double cl_set, double coil_kw, double m_coil, double sh_water) {
  if (!(m_coil > 0)) throw DomainError("coil mass flow must be positive");
  if (!(sh_water > 0)) throw DomainError("water specific heat must be positive");
  return cl_set + coil_kw / (m_coil * sh_water) * units::kFahrenheitPerKelvin;
}

double chiller_cost(double m_coil, double sh_water, double t_coil, double cl_set) {
  if (t_coil < cl_set) throw DomainError("coil water colder than its setpoint");
  return m_coil * sh_water * (t_coil - cl_set) / units::kFahrenheitPerKelvin;
}

ZoneCostBreakdown zone_cost(const BuildingConfig& config, const ZoneDecision& d) {
  ZoneCostBreakdown b;
  b.mixed_enthalpy = psychro::moist_air_enthalpy(d.mixed.state.temperature_f, d.mixed.humidity_ratio);
  b.supply_enthalpy = psychro::moist_air_enthalpy(d.supply_temp_f, d.supply_humidity_ratio);
  b.condensate_kg_s = condensate_mass_flow(d.mass_flow_kg_s, d.mixed.humidity_ratio, d.supply_humidity_ratio).kg_s;
  // Condensate leaves the coil at the supply temperature.
  b.condenser_water_temp_f = d.supply_temp_f;
  b.condensate_enthalpy = config.water_specific_heat * units::celsius_from_fahrenheit(b.condenser_water_temp_f);
  b.coil_kw = coil_cost(d.mass_flow_kg_s, b.supply_enthalpy, b.mixed_enthalpy, b.condensate_kg_s,
                        b.condensate_enthalpy);
  b.coil_water_temp_f = coil_refrigerant_temp(config.coil_setpoint_f, b.coil_kw, config.coil_mass_flow_kg_s,
                                              config.water_specific_heat);
  b.chiller_kw = chiller_cost(config.coil_mass_flow_kg_s, config.water_specific_heat, b.coil_water_temp_f,
                              config.coil_setpoint_f);
  return b;
}

double TimeslotCost::energy_kwh() const {
  double e = 0.0;
  for (const auto& z : zones) e += z.energy_kwh(interval_minutes);
  return e;
}

TimeslotCost decision_cost(const BuildingConfig& config, const ControlDecision& decision, double interval) {
  TimeslotCost t;
  t.timeslot = decision.timeslot;
  t.interval_minutes = interval;
  t.zones.reserve(decision.zones.size());
  for (const auto& d : decision.zones) t.zones.push_back(zone_cost(config, d));
  return t;
}

HorizonCost total_cost(std::vector<TimeslotCost> slots, double rate) {
  HorizonCost h;
  h.rate = rate;
  for (const auto& s : slots) h.total_energy_kwh += s.energy_kwh();
  h.total_currency = h.total_energy_kwh * rate;
  h.slots = std::move(slots);
  return h;
}

void write_cost_csv(std::ostream& out, const BuildingConfig& config, const HorizonCost& cost) {
  out << "timeslot,zone,coil_kW,chiller_kW,kWh,currency\n";
  for (const auto& s : cost.slots) {
    for (std::size_t j = 0; j < s.zones.size(); ++j) {
      const auto& z = s.zones[j];
      const double kwh = z.energy_kwh(s.interval_minutes);
      out << fmt::format("{},{},{:.6f},{:.6f},{:.6f},{:.6f}\n", s.timeslot, config.zones.at(j).name, z.coil_kw,
                         z.chiller_kw, kwh, kwh * cost.rate);
    }
  }
}

}  // namespace biota
