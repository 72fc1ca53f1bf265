#include "biota/config_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "biota/errors.hpp"

namespace biota {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, std::string_view where) {
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw SchemaError(fmt::format("{}: unknown key '{}'", where, key));
}

template <typename T>
void take(const json& j, const char* key, T& out, std::string_view where, bool required = false) {
  if (!j.contains(key)) {
    if (required) throw SchemaError(fmt::format("{}: missing '{}'", where, key));
    return;
  }
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw SchemaError(fmt::format("{}: bad value for '{}': {}", where, key, e.what()));
  }
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("invalid JSON: {}", e.what()));
  }
}

ZoneProperties zone_from_json(const json& j, std::size_t index) {
  const std::string where = fmt::format("zones[{}]", index);
  if (!j.is_object()) throw SchemaError(where + ": expected an object");
  reject_unknown(j,
                 {"name", "volume_ft3", "co2_per_person_cfm", "heat_per_person_kw", "thermal_load_kw", "capacity",
                  "co2_setpoint_ppm", "temp_setpoint_f", "min_airflow_cfm"},
                 where);
  ZoneProperties z;
  take(j, "name", z.name, where, true);
  take(j, "volume_ft3", z.volume_ft3, where, true);
  take(j, "co2_per_person_cfm", z.co2_per_person_cfm, where, true);
  take(j, "heat_per_person_kw", z.heat_per_person_kw, where, true);
  take(j, "thermal_load_kw", z.thermal_load_kw, where, true);
  take(j, "capacity", z.capacity, where, true);
  take(j, "co2_setpoint_ppm", z.co2_setpoint_ppm, where);
  take(j, "temp_setpoint_f", z.temp_setpoint_f, where);
  take(j, "min_airflow_cfm", z.min_airflow_cfm, where);
  return z;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

BuildingConfig parse_config(std::string_view text) {
  const json j = parse_json(text);
  if (!j.is_object()) throw SchemaError("config: expected a JSON object");
  reject_unknown(j,
                 {"name", "zones", "coil_setpoint_f", "coil_mass_flow_kg_s", "water_specific_heat",
                  "electricity_rate", "currency", "pressure_pa", "interval_minutes", "co2_hold_floor_ppm",
                  "return_air_rh", "design_outdoor", "mixing"},
                 "config");
  BuildingConfig c;
  take(j, "name", c.name, "config");
  take(j, "coil_setpoint_f", c.coil_setpoint_f, "config");
  take(j, "coil_mass_flow_kg_s", c.coil_mass_flow_kg_s, "config");
  take(j, "water_specific_heat", c.water_specific_heat, "config");
  take(j, "electricity_rate", c.electricity_rate, "config", true);
  take(j, "currency", c.currency, "config");
  take(j, "pressure_pa", c.pressure_pa, "config");
  take(j, "interval_minutes", c.interval_minutes, "config");
  take(j, "co2_hold_floor_ppm", c.co2_hold_floor_ppm, "config");
  take(j, "return_air_rh", c.return_air_rh, "config");
  if (j.contains("design_outdoor")) {
    const auto& o = j["design_outdoor"];
    reject_unknown(o, {"temp_f", "rh", "co2_ppm"}, "design_outdoor");
    take(o, "temp_f", c.design_outdoor.temp_f, "design_outdoor");
    take(o, "rh", c.design_outdoor.rh, "design_outdoor");
    take(o, "co2_ppm", c.design_outdoor.co2_ppm, "design_outdoor");
  }
  if (j.contains("mixing")) {
    const auto& m = j["mixing"];
    reject_unknown(m, {"mode", "fresh_fraction", "min_fresh_fraction"}, "mixing");
    std::string mode = "fixed";
    take(m, "mode", mode, "mixing");
    if (mode == "fixed")
      c.mixing.mode = MixingMode::fixed;
    else if (mode == "optimize")
      c.mixing.mode = MixingMode::optimize;
    else
      throw SchemaError("mixing.mode must be 'fixed' or 'optimize'");
    take(m, "fresh_fraction", c.mixing.fresh_fraction, "mixing");
    take(m, "min_fresh_fraction", c.mixing.min_fresh_fraction, "mixing");
  }
  if (!j.contains("zones") || !j["zones"].is_array()) throw SchemaError("config: 'zones' must be an array");
  for (std::size_t i = 0; i < j["zones"].size(); ++i) c.zones.push_back(zone_from_json(j["zones"][i], i));
  c.validate();
  return c;
}

BuildingConfig load_config(const std::filesystem::path& path) { return parse_config(read_text_file(path)); }

std::string dump_config(const BuildingConfig& c) {
  json j;
  j["name"] = c.name;
  j["coil_setpoint_f"] = c.coil_setpoint_f;
  j["coil_mass_flow_kg_s"] = c.coil_mass_flow_kg_s;
  j["water_specific_heat"] = c.water_specific_heat;
  j["electricity_rate"] = c.electricity_rate;
  j["currency"] = c.currency;
  j["pressure_pa"] = c.pressure_pa;
  j["interval_minutes"] = c.interval_minutes;
  j["co2_hold_floor_ppm"] = c.co2_hold_floor_ppm;
  j["return_air_rh"] = c.return_air_rh;
  j["design_outdoor"] = {{"temp_f", c.design_outdoor.temp_f},
                         {"rh", c.design_outdoor.rh},
                         {"co2_ppm", c.design_outdoor.co2_ppm}};
  j["mixing"] = {{"mode", c.mixing.mode == MixingMode::fixed ? "fixed" : "optimize"},
                 {"fresh_fraction", c.mixing.fresh_fraction},
                 {"min_fresh_fraction", c.mixing.min_fresh_fraction}};
  json zones = json::array();
  for (const auto& z : c.zones)
    zones.push_back({{"name", z.name},
                     {"volume_ft3", z.volume_ft3},
                     {"co2_per_person_cfm", z.co2_per_person_cfm},
                     {"heat_per_person_kw", z.heat_per_person_kw},
                     {"thermal_load_kw", z.thermal_load_kw},
                     {"capacity", z.capacity},
                     {"co2_setpoint_ppm", z.co2_setpoint_ppm},
                     {"temp_setpoint_f", z.temp_setpoint_f},
                     {"min_airflow_cfm", z.min_airflow_cfm}});
  j["zones"] = std::move(zones);
  return j.dump(2);
}

SensorFrame parse_frame(std::string_view text, const BuildingConfig& config) {
  const json j = parse_json(text);
  if (!j.is_object()) throw SchemaError("frame: expected a JSON object");
  reject_unknown(j, {"timeslot", "interval_minutes", "outdoor_temp_f", "outdoor_rh", "outdoor_co2_ppm", "zones"},
                 "frame");
  SensorFrame f;
  f.interval_minutes = config.interval_minutes;
  f.outdoor_temp_f = config.design_outdoor.temp_f;
  f.outdoor_rh = config.design_outdoor.rh;
  f.outdoor_co2_ppm = config.design_outdoor.co2_ppm;
  take(j, "timeslot", f.timeslot, "frame");
  take(j, "interval_minutes", f.interval_minutes, "frame");
  take(j, "outdoor_temp_f", f.outdoor_temp_f, "frame");
  take(j, "outdoor_rh", f.outdoor_rh, "frame");
  take(j, "outdoor_co2_ppm", f.outdoor_co2_ppm, "frame");
  if (!j.contains("zones") || !j["zones"].is_object()) throw SchemaError("frame: 'zones' must be an object");
  const auto n = static_cast<Eigen::Index>(config.zone_count());
  f.occupancy = Eigen::VectorXi::Zero(n);
  f.indoor_co2 = Eigen::VectorXd::Zero(n);
  f.indoor_temp = Eigen::VectorXd::Zero(n);
  std::vector<bool> seen(config.zone_count(), false);
  for (const auto& [name, z] : j["zones"].items()) {
    const std::size_t idx = config.zone_index(name);
    const std::string where = "frame.zones." + name;
    reject_unknown(z, {"occupancy", "indoor_co2_ppm", "indoor_temp_f"}, where);
    const auto e = static_cast<Eigen::Index>(idx);
    take(z, "occupancy", f.occupancy[e], where, true);
    take(z, "indoor_co2_ppm", f.indoor_co2[e], where, true);
    take(z, "indoor_temp_f", f.indoor_temp[e], where, true);
    seen[idx] = true;
  }
  for (std::size_t k = 0; k < seen.size(); ++k)
    if (!seen[k]) throw SchemaError("frame: no entry for zone '" + config.zones[k].name + "'");
  f.validate(config);
  return f;
}

SensorFrame load_frame(const std::filesystem::path& path, const BuildingConfig& config) {
  return parse_frame(read_text_file(path), config);
}

std::string dump_frame(const SensorFrame& f, const BuildingConfig& config) {
  json j;
  j["timeslot"] = f.timeslot;
  j["interval_minutes"] = f.interval_minutes;
  j["outdoor_temp_f"] = f.outdoor_temp_f;
  j["outdoor_rh"] = f.outdoor_rh;
  j["outdoor_co2_ppm"] = f.outdoor_co2_ppm;
  json zones = json::object();
  for (std::size_t k = 0; k < config.zone_count(); ++k) {
    const auto e = static_cast<Eigen::Index>(k);
    zones[config.zones[k].name] = {{"occupancy", f.occupancy[e]},
                                   {"indoor_co2_ppm", f.indoor_co2[e]},
                                   {"indoor_temp_f", f.indoor_temp[e]}};
  }
  j["zones"] = std::move(zones);
  return j.dump(2);
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace biota
