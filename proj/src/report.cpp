#include "biota/report.hpp"

#include <ostream>

#include <fmt/format.h>
#include <json.hpp>

namespace biota {

namespace {

using nlohmann::ordered_json;

ordered_json deltas_json(const BuildingConfig& config, const Eigen::VectorXi& d) {
  ordered_json j = ordered_json::object();
  for (std::size_t z = 0; z < config.zone_count(); ++z) j[config.zones[z].name] = d[static_cast<Eigen::Index>(z)];
  return j;
}

ordered_json readings_json(const BuildingConfig& config, const SensorFrame& f) {
  ordered_json j = ordered_json::object();
  for (std::size_t z = 0; z < config.zone_count(); ++z) {
    const auto e = static_cast<Eigen::Index>(z);
    j[config.zones[z].name] = {{"occupancy", f.occupancy[e]},
                               {"indoor_co2_ppm", f.indoor_co2[e]},
                               {"indoor_temp_f", f.indoor_temp[e]}};
  }
  return j;
}

ordered_json slot_json(const BuildingConfig& config, const SlotAttack& a) {
  const auto& ev = a.evidence;
  ordered_json res = ordered_json::array();
  for (const auto& r : ev.stealth.residuals)
    res.push_back({{"zone", config.zones[r.zone].name}, {"co2_ppm", r.co2_ppm}, {"temp_f", r.temp_f}});
  return {{"timeslot", a.timeslot},
          {"deltas", deltas_json(config, a.deltas)},
          {"reported", readings_json(config, a.step.reported)},
          {"cover", readings_json(config, a.step.cover)},
          {"honest_kwh", a.honest_energy_kwh},
          {"attacked_kwh", a.attacked_energy_kwh},
          {"metric", a.metric},
          {"evidence",
           {{"zero_sum", ev.zero_sum},
            {"capacity_ok", ev.capacity_ok},
            {"access_ok", ev.access_ok},
            {"stealthy", ev.stealth.accepted},
            {"max_abs_co2_residual", ev.stealth.max_abs_co2},
            {"max_abs_temp_residual", ev.stealth.max_abs_temp},
            {"goal_margin", ev.goal_margin},
            {"goal_ok", ev.goal_ok},
            {"sound", ev.sound()},
            {"residuals", res}}}};
}

std::string fixed(double v) { return fmt::format("{:.6f}", v); }

}  // namespace

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::sat: return "sat";
    case Verdict::unsat: return "unsat";
    case Verdict::budget_exceeded: return "budget_exceeded";
  }
  return "unknown";
}

std::string vector_json(const BuildingConfig& config, const AttackVector& vector, const std::string& digest) {
  ordered_json j;
  j["digest"] = digest;
  j["metric"] = vector.metric;
  j["honest_kwh"] = vector.honest_energy_kwh;
  j["attacked_kwh"] = vector.attacked_energy_kwh;
  j["slots"] = ordered_json::array();
  for (const auto& s : vector.slots) j["slots"].push_back(slot_json(config, s));
  return j.dump(2) + "\n";
}

std::string campaign_json(const BuildingConfig& config, const CampaignReport& report) {
  ordered_json j;
  j["digest"] = report.digest;
  j["goal"] = report.goal;
  j["access"] = report.access;
  j["honest_kwh"] = report.honest.total_energy_kwh;
  j["attacked_kwh"] = report.attacked.total_energy_kwh;
  j["honest_cost"] = report.honest.total_currency;
  j["attacked_cost"] = report.attacked.total_currency;
  j["sat_slots"] = report.sat_count();
  j["slots"] = ordered_json::array();
  for (const auto& s : report.slots)
    if (s.attack) j["slots"].push_back(slot_json(config, *s.attack));
  return j.dump(2) + "\n";
}

void write_campaign_csv(std::ostream& out, const BuildingConfig& config, const CampaignReport& report) {
  out << "# digest=" << report.digest << '\n';
  out << "timeslot,verdict";
  for (const auto& z : config.zones) out << ",delta_" << z.name;
  out << ",honest_kWh,attacked_kWh,increase_kWh,metric\n";
  for (const auto& s : report.slots) {
    out << s.timeslot << ',' << verdict_name(s.verdict);
    for (Eigen::Index e = 0; e < s.deltas.size(); ++e) out << ',' << s.deltas[e];
    out << ',' << fixed(s.honest_energy_kwh) << ',' << fixed(s.attacked_energy_kwh) << ','
        << fixed(s.attacked_energy_kwh - s.honest_energy_kwh) << ',' << fixed(s.metric) << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const SweepResult& result, const std::string& currency) {
  out << "# digest=" << result.digest << '\n';
  out << "access,size,total_increase_kWh,max_slot_kWh,min_slot_kWh,sat_slots,slots,total_increase_" << currency
      << '\n';
  for (const auto& r : result.rows)
    out << fmt::format("{},{},{},{},{},{},{},{}\n", fmt::join(r.zones, ";"), r.zones.size(),
                       fixed(r.total_increase_kwh), fixed(r.max_slot_kwh), fixed(r.min_slot_kwh), r.sat_slots,
                       result.slot_count, fixed(r.total_increase_currency));
}

void write_discomfort_csv(std::ostream& out, const std::vector<DiscomfortRow>& rows, const std::string& digest) {
  out << "# digest=" << digest << '\n';
  out << "zone,occupied_slots,co2_fraction,temp_fraction,honest_co2_fraction,honest_temp_fraction\n";
  for (const auto& r : rows)
    out << fmt::format("{},{},{},{},{},{}\n", r.zone, r.occupied_slots, fixed(r.co2_fraction), fixed(r.temp_fraction),
                       fixed(r.honest_co2_fraction), fixed(r.honest_temp_fraction));
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows, const std::string& digest) {
  out << "# digest=" << digest << '\n';
  out << "zones,factor,expected,verdict,seconds,nodes,threshold_kWh\n";
  for (const auto& r : rows)
    out << fmt::format("{},{},{},{},{:.6f},{},{}\n", r.zones, r.factor, r.expected, r.verdict, r.seconds, r.nodes,
                       fixed(r.threshold_kwh));
}

}  // namespace biota
