#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "biota/model.hpp"

namespace biota {

double mass_flow_from_volumetric(double flow_cfm, double specific_volume);

struct CondensateFlow {
  double kg_s = 0.0;
  bool none = false;  ///< supply air was not drier than mixed air
};

CondensateFlow condensate_mass_flow(double m_mixed, double w_mixed, double w_supply);

double coil_cost(double m_mixed, double h_supply, double h_mixed, double m_cond, double h_cond);
double coil_refrigerant_temp(double cl_set_f, double coil_kw, double m_coil, double sh_water);
double chiller_cost(double m_coil, double sh_water, double t_coil_f, double cl_set_f);

struct ZoneCostBreakdown {
  double coil_kw = 0.0;
  double chiller_kw = 0.0;
  double condensate_kg_s = 0.0;
  double coil_water_temp_f = 0.0;
  double condensate_enthalpy = 0.0;
  double condenser_water_temp_f = 0.0;
  double mixed_enthalpy = 0.0;
  double supply_enthalpy = 0.0;

  double power_kw() const { return coil_kw + chiller_kw; }
  double energy_kwh(double interval_minutes) const { return power_kw() * interval_minutes / 60.0; }
};

ZoneCostBreakdown zone_cost(const BuildingConfig& config, const ZoneDecision& decision);

struct TimeslotCost {
  std::size_t timeslot = 0;
  double interval_minutes = 10.0;
  std::vector<ZoneCostBreakdown> zones;

  double energy_kwh() const;
};

TimeslotCost decision_cost(const BuildingConfig& config, const ControlDecision& decision,
                           double interval_minutes);

struct HorizonCost {
  double total_energy_kwh = 0.0;
  double total_currency = 0.0;
  double rate = 0.0;
  std::vector<TimeslotCost> slots;
};

HorizonCost total_cost(std::vector<TimeslotCost> slots, double rate);

/// Columns: timeslot,zone,coil_kW,chiller_kW,kWh,currency
void write_cost_csv(std::ostream& out, const BuildingConfig& config, const HorizonCost& cost);

}  // namespace biota
