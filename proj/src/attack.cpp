#include "biota/attack.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "biota/errors.hpp"

namespace biota {

namespace {

std::atomic<std::uint64_t> g_checked{0};
std::atomic<std::uint64_t> g_violations{0};

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_number(std::string_view s, std::string_view what) {
  double v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v))
    throw UsageError(fmt::format("bad number '{}' in {}", s, what));
  return v;
}

double comfort_scale(const std::optional<double>& threshold) {
  return threshold && *threshold > 0 ? *threshold : 1.0;
}

}  // namespace

double co2_deviation(const ComfortDisruption& goal, double co2_ppm, double setpoint_ppm) {
  const double d = co2_ppm - setpoint_ppm;
  return goal.co2_excess_only ? std::max(d, 0.0) : std::abs(d);
}

AccessSet AccessSet::all(std::size_t n) {
  AccessSet a(n);
  for (std::size_t j = 0; j < n; ++j) a.grant(j);
  return a;
}

AccessSet AccessSet::of(const BuildingConfig& config, const std::vector<std::string>& names) {
  AccessSet a(config.zone_count());
  for (const auto& raw : names) {
    const auto name = trim(raw);
    if (name.empty()) continue;
    if (name == "all") return all(config.zone_count());
    a.grant(config.zone_index(name));
  }
  return a;
}

void AccessSet::grant(std::size_t zone, SensorAccess access) { zones_.at(zone) = access; }

std::vector<std::size_t> AccessSet::forgeable() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < zones_.size(); ++j)
    if (zones_[j].full()) out.push_back(j);
  return out;
}

AttackGoal parse_goal(std::string_view text, const BuildingConfig& config) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw UsageError(fmt::format("goal '{}' lacks a kind prefix", text));
  const auto kind = lower(trim(text.substr(0, colon)));
  const auto body = text.substr(colon + 1);
  AttackGoal goal;
  if (kind == "energy") {
    EnergyIncrease e;
    auto parts = split(body, ':');
    if (parts.size() > 2) throw UsageError(fmt::format("goal '{}' has too many fields", text));
    auto amount = lower(parts[0]);
    if (amount.ends_with('%')) {
      e.unit = ThresholdUnit::percent;
      amount.pop_back();
    } else if (amount.ends_with("kwh")) {
      amount.resize(amount.size() - 3);
    }
    e.threshold = parse_number(trim(amount), "energy goal");
    if (parts.size() == 2) {
      const auto scope = lower(parts[1]);
      if (scope == "horizon")
        e.scope = GoalScope::horizon;
      else if (scope != "slot" && scope != "timeslot")
        throw UsageError(fmt::format("unknown goal scope '{}'", parts[1]));
    }
    goal = e;
  } else if (kind == "comfort") {
    ComfortDisruption c;
    std::string_view params = body;
    std::string_view zones;
    if (const auto at = body.find('@'); at != std::string_view::npos) {
      params = body.substr(0, at);
      zones = body.substr(at + 1);
    }
    for (const auto& p : split(params, ',')) {
      if (p.empty()) continue;
      const auto eq = p.find('=');
      if (eq == std::string::npos) throw UsageError(fmt::format("comfort parameter '{}' needs '='", p));
      const auto key = lower(trim(std::string_view(p).substr(0, eq)));
      const double v = parse_number(trim(std::string_view(p).substr(eq + 1)), "comfort goal");
      if (key == "co2") {
        c.co2_deviation_ppm = v;
      } else if (key == "co2+") {
        c.co2_deviation_ppm = v;
        c.co2_excess_only = true;
      }
      else if (key == "temp")
        c.temp_deviation_f = v;
      else
        throw UsageError(fmt::format("unknown comfort parameter '{}'", key));
    }
    if (zones.empty() || trim(zones) == "all") {
      for (std::size_t j = 0; j < config.zone_count(); ++j) c.targets.push_back(j);
    } else {
      for (const auto& z : split(zones, ',')) c.targets.push_back(config.zone_index(z));
    }
    goal = c;
  } else {
    throw UsageError(fmt::format("unknown goal kind '{}'", kind));
  }
  validate_goal(goal, config);
  return goal;
}

void validate_goal(const AttackGoal& goal, const BuildingConfig& config) {
  if (const auto* e = std::get_if<EnergyIncrease>(&goal)) {
    if (!(e->threshold >= 0)) throw UsageError("energy threshold must be nonnegative");
    return;
  }
  const auto& c = std::get<ComfortDisruption>(goal);
  if (!c.co2_deviation_ppm && !c.temp_deviation_f) throw UsageError("comfort goal needs co2= or temp=");
  if (c.co2_deviation_ppm && !(*c.co2_deviation_ppm >= 0)) throw UsageError("co2 deviation must be nonnegative");
  if (c.temp_deviation_f && !(*c.temp_deviation_f >= 0)) throw UsageError("temp deviation must be nonnegative");
  if (c.targets.empty()) throw UsageError("comfort goal has no target zones");
  for (auto t : c.targets)
    if (t >= config.zone_count()) throw UsageError("comfort target outside the building");
}

std::string describe_goal(const AttackGoal& goal, const BuildingConfig& config) {
  if (const auto* e = std::get_if<EnergyIncrease>(&goal)) {
    return fmt::format("energy:{}{}{}", e->threshold, e->unit == ThresholdUnit::percent ? "%" : "kwh",
                       e->scope == GoalScope::horizon ? ":horizon" : "");
  }
  const auto& c = std::get<ComfortDisruption>(goal);
  std::vector<std::string> params;
  if (c.co2_deviation_ppm) params.push_back(fmt::format("co2{}={}", c.co2_excess_only ? "+" : "", *c.co2_deviation_ppm));
  if (c.temp_deviation_f) params.push_back(fmt::format("temp={}", *c.temp_deviation_f));
  std::vector<std::string> names;
  for (auto t : c.targets) names.push_back(config.zones.at(t).name);
  return fmt::format("comfort:{}@{}", fmt::join(params, ","), fmt::join(names, ","));
}

SensorFrame forge_consistent_measurements(const BuildingConfig& config, const SensorFrame& prev,
                                          const ControlDecision& prev_decision, const SensorFrame& true_frame,
                                          const Eigen::VectorXi& deltas, const AccessSet& access) {
  const auto n = static_cast<Eigen::Index>(config.zone_count());
  if (deltas.size() != n) throw DomainError("delta vector length differs from zone count");
  SensorFrame forged = true_frame;
  for (Eigen::Index e = 0; e < n; ++e) {
    if (deltas[e] == 0) continue;
    const auto j = static_cast<std::size_t>(e);
    if (!access.can_forge(j))
      throw CapabilityError(fmt::format("zone '{}': forging needs occupancy, CO2 and temperature access",
                                        config.zones[j].name));
    const auto s = predict_zone_state(config, j, prev_decision.zones.at(j), prev.occupancy[e] + deltas[e],
                                      {prev.indoor_co2[e], prev.indoor_temp[e]}, prev.interval_minutes);
    forged.indoor_co2[e] = s.co2_ppm;
    forged.indoor_temp[e] = s.temp_f;
  }
  return forged;
}

ForgedStep forge_step(const BuildingConfig& config, const SensorFrame& frame, const Eigen::VectorXi& deltas,
                      const AccessSet& access, const std::vector<ZoneState>* physical_start) {
  const auto n = static_cast<Eigen::Index>(config.zone_count());
  if (deltas.size() != n) throw DomainError("delta vector length differs from zone count");
  ForgedStep out;
  out.reported = frame;
  for (Eigen::Index e = 0; e < n; ++e) {
    const auto j = static_cast<std::size_t>(e);
    if (deltas[e] != 0 && !access.can_forge(j))
      throw CapabilityError(fmt::format("zone '{}': forging needs occupancy, CO2 and temperature access",
                                        config.zones[j].name));
    const int forged = frame.occupancy[e] + deltas[e];
    if (forged < 0 || forged > config.zones[j].capacity)
      throw RangeError(fmt::format("zone '{}': forged occupancy {} outside [0, {}]", config.zones[j].name, forged,
                                   config.zones[j].capacity));
    out.reported.occupancy[e] = forged;
  }
  out.decision = control_step(config, out.reported);

  // What the sensors read next if nobody tampers, starting from the frame itself.
  SensorFrame true_next = frame;
  true_next.timeslot = frame.timeslot + 1;
  out.physical = true_next;
  for (Eigen::Index e = 0; e < n; ++e) {
    const auto j = static_cast<std::size_t>(e);
    const ZoneState here{frame.indoor_co2[e], frame.indoor_temp[e]};
    const auto s = predict_zone_state(config, j, out.decision.zones[j], frame.occupancy[e], here,
                                      frame.interval_minutes);
    true_next.indoor_co2[e] = s.co2_ppm;
    true_next.indoor_temp[e] = s.temp_f;
    const auto p = physical_start ? predict_zone_state(config, j, out.decision.zones[j], frame.occupancy[e],
                                                       physical_start->at(j), frame.interval_minutes)
                                  : s;
    out.physical.indoor_co2[e] = p.co2_ppm;
    out.physical.indoor_temp[e] = p.temp_f;
  }
  out.cover = forge_consistent_measurements(config, frame, out.decision, true_next, deltas, access);
  return out;
}

namespace {

std::vector<ZoneState> frame_states(const SensorFrame& f) {
  std::vector<ZoneState> s;
  for (Eigen::Index e = 0; e < f.zone_count(); ++e) s.push_back({f.indoor_co2[e], f.indoor_temp[e]});
  return s;
}

void add_zone_constraints(std::vector<Constraint>& out, std::size_t slot, std::size_t zone, bool forgeable) {
  using K = ConstraintKind;
  for (auto k : {K::mixed_co2, K::mixed_temp, K::mixed_humidity, K::raw_flow, K::flow_floor, K::mass_flow,
                 K::zone_load, K::supply_balance, K::supply_clamp, K::supply_lower, K::supply_upper, K::cover_co2,
                 K::cover_temp})
    out.push_back({Provenance::control, k, slot, zone});
  for (auto k : {K::supply_humidity, K::mixed_enthalpy, K::supply_enthalpy, K::condensate, K::coil,
                 K::coil_water_temp, K::chiller})
    out.push_back({Provenance::cost, k, slot, zone});
  if (forgeable)
    for (auto k : {K::occupancy_lower, K::occupancy_upper, K::co2_forgery, K::temp_forgery})
      out.push_back({Provenance::attack, k, slot, zone});
}

}  // namespace

ConstraintProblem encode(const BuildingConfig& config, const std::vector<SensorFrame>& frames,
                         const AttackGoal& goal, const AccessSet& access, const EncodeOptions& options) {
  if (frames.empty()) throw DomainError("attack horizon is empty");
  if (access.size() != config.zone_count()) throw DomainError("access set does not match the building");
  validate_goal(goal, config);
  const auto forgeable = access.forgeable();
  if (forgeable.empty()) throw EmptyAccessError("no zone is fully accessible to the attacker");
  if (options.physical_start && options.physical_start->size() != frames.size())
    throw DomainError("physical start states do not cover the horizon");

  ConstraintProblem p;
  p.config = config;
  p.goal = goal;
  p.access = access;
  p.tolerance = options.tolerance;
  const auto* energy = std::get_if<EnergyIncrease>(&goal);
  const auto* comfort = std::get_if<ComfortDisruption>(&goal);

  double honest_total = 0.0;
  for (std::size_t s = 0; s < frames.size(); ++s) {
    const auto& frame = frames[s];
    frame.validate(config);
    SlotProblem sp;
    sp.frame = frame;
    sp.physical_start = options.physical_start ? (*options.physical_start)[s] : frame_states(frame);
    const double dt = frame.interval_minutes;

    for (std::size_t j = 0; j < config.zone_count(); ++j) {
      const auto e = static_cast<Eigen::Index>(j);
      ZoneBaseline b;
      b.decision = control_zone(config, j, frame.occupancy[e], frame);
      b.cost = zone_cost(config, b.decision);
      b.energy_kwh = b.cost.energy_kwh(dt);
      b.physical = predict_zone_state(config, j, b.decision, frame.occupancy[e], sp.physical_start[j], dt);
      sp.honest_energy_kwh += b.energy_kwh;
      sp.honest.push_back(b);
    }
    honest_total += sp.honest_energy_kwh;

    for (auto j : forgeable) {
      const auto e = static_cast<Eigen::Index>(j);
      const auto& z = config.zones[j];
      const int o = frame.occupancy[e];
      const auto& b = sp.honest[j];
      ZoneTable t;
      t.zone = j;
      t.min_delta = -o;
      for (int d = -o; d <= z.capacity - o; ++d) {
        DeltaOutcome r;
        r.delta = d;
        try {
          r.decision = control_zone(config, j, o + d, frame);
          r.feasible = true;
        } catch (const InfeasibleError&) {
          t.rows.push_back(r);
          continue;
        }
        r.cost = zone_cost(config, r.decision);
        r.energy_kwh = r.cost.energy_kwh(dt);
        r.energy_gain_kwh = r.energy_kwh - b.energy_kwh;
        r.cover = predict_zone_state(config, j, r.decision, o + d, {frame.indoor_co2[e], frame.indoor_temp[e]}, dt);
        r.physical = predict_zone_state(config, j, r.decision, o, sp.physical_start[j], dt);
        r.co2_increase_ppm = comfort ? co2_deviation(*comfort, r.physical.co2_ppm, z.co2_setpoint_ppm) -
                                           co2_deviation(*comfort, b.physical.co2_ppm, z.co2_setpoint_ppm)
                                     : 0.0;
        r.temp_increase_f = std::abs(r.physical.temp_f - z.temp_setpoint_f) -
                            std::abs(b.physical.temp_f - z.temp_setpoint_f);
        t.rows.push_back(r);
      }
      sp.tables.push_back(std::move(t));
    }

    if (energy) {
      sp.threshold_kwh =
          energy->unit == ThresholdUnit::percent ? energy->threshold / 100.0 * sp.honest_energy_kwh : energy->threshold;
    }

    for (std::size_t j = 0; j < config.zone_count(); ++j) add_zone_constraints(p.constraints, s, j, access.can_forge(j));
    p.constraints.push_back({Provenance::attack, ConstraintKind::zero_sum, s, std::nullopt});
    if (energy) p.constraints.push_back({Provenance::cost, ConstraintKind::slot_energy, s, std::nullopt});
    if (comfort || (energy && energy->scope == GoalScope::per_timeslot))
      p.constraints.push_back({Provenance::attack, ConstraintKind::goal, s, std::nullopt});
    p.slots.push_back(std::move(sp));
  }
  if (energy) {
    p.horizon_threshold_kwh =
        energy->unit == ThresholdUnit::percent ? energy->threshold / 100.0 * honest_total : energy->threshold;
    if (energy->scope == GoalScope::horizon)
      p.constraints.push_back({Provenance::attack, ConstraintKind::goal, frames.size() - 1, std::nullopt});
  }
  return p;
}

ProblemStats problem_stats(const ConstraintProblem& problem) {
  ProblemStats s;
  for (const auto& c : problem.constraints) {
    if (c.zone) {
      switch (c.tag) {
        case Provenance::control: ++s.control; break;
        case Provenance::cost: ++s.cost; break;
        case Provenance::attack: ++s.attack; break;
      }
    } else if (c.tag == Provenance::cost) {
      ++s.coupling_cost;
    } else {
      ++s.coupling_attack;
    }
  }
  return s;
}

double slot_metric(const ConstraintProblem& problem, std::size_t slot, const Eigen::VectorXi& deltas) {
  const auto& sp = problem.slots.at(slot);
  double m = 0.0;
  const auto* comfort = std::get_if<ComfortDisruption>(&problem.goal);
  for (const auto& t : sp.tables) {
    const auto& r = t.at(deltas[static_cast<Eigen::Index>(t.zone)]);
    if (!comfort) {
      m += r.energy_gain_kwh;
    } else if (std::find(comfort->targets.begin(), comfort->targets.end(), t.zone) != comfort->targets.end()) {
      double v = 0.0;
      if (comfort->co2_deviation_ppm) v += r.co2_increase_ppm / comfort_scale(comfort->co2_deviation_ppm);
      if (comfort->temp_deviation_f) v += r.temp_increase_f / comfort_scale(comfort->temp_deviation_f);
      m += v;
    }
  }
  return m;
}

SlotAttack realize_slot(const ConstraintProblem& problem, std::size_t slot, const Eigen::VectorXi& deltas) {
  const auto& config = problem.config;
  const auto& sp = problem.slots.at(slot);
  const auto& frame = sp.frame;
  const double dt = frame.interval_minutes;
  SlotAttack a;
  a.slot = slot;
  a.timeslot = frame.timeslot;
  a.deltas = deltas;

  auto& ev = a.evidence;
  ev.zero_sum = deltas.sum();
  for (Eigen::Index e = 0; e < deltas.size(); ++e) {
    const auto j = static_cast<std::size_t>(e);
    const int forged = frame.occupancy[e] + deltas[e];
    if (forged < 0 || forged > config.zones[j].capacity) ev.capacity_ok = false;
    if (deltas[e] != 0 && !problem.access.can_forge(j)) ev.access_ok = false;
  }
  if (!ev.capacity_ok || !ev.access_ok) {
    g_checked.fetch_add(1);
    g_violations.fetch_add(1);
    ev.stealth.accepted = false;
    return a;
  }

  a.step = forge_step(config, frame, deltas, problem.access, &sp.physical_start);
  const auto honest_decision = control_step(config, frame);
  a.honest_cost = decision_cost(config, honest_decision, dt);
  a.attacked_cost = decision_cost(config, a.step.decision, dt);
  a.honest_energy_kwh = a.honest_cost.energy_kwh();
  a.attacked_energy_kwh = a.attacked_cost.energy_kwh();
  ev.stealth = verify_consistency(config, a.step.reported, a.step.decision, a.step.cover, problem.tolerance);

  if (const auto* energy = std::get_if<EnergyIncrease>(&problem.goal)) {
    double m = 0.0;
    for (std::size_t j = 0; j < config.zone_count(); ++j)
      m += a.attacked_cost.zones[j].energy_kwh(dt) - a.honest_cost.zones[j].energy_kwh(dt);
    ev.metric = m;
    ev.goal_margin = m - sp.threshold_kwh;
    ev.goal_ok = energy->scope == GoalScope::horizon || m > sp.threshold_kwh;
  } else {
    const auto& c = std::get<ComfortDisruption>(problem.goal);
    double m = 0.0;
    double margin = std::numeric_limits<double>::infinity();
    bool ok = true;
    for (std::size_t j = 0; j < config.zone_count(); ++j) {
      if (std::find(c.targets.begin(), c.targets.end(), j) == c.targets.end()) continue;
      const auto e = static_cast<Eigen::Index>(j);
      const auto& z = config.zones[j];
      const auto honest = predict_zone_state(config, j, honest_decision.zones[j], frame.occupancy[e],
                                             sp.physical_start[j], dt);
      const double co2_inc = co2_deviation(c, a.step.physical.indoor_co2[e], z.co2_setpoint_ppm) -
                             co2_deviation(c, honest.co2_ppm, z.co2_setpoint_ppm);
      const double temp_inc = std::abs(a.step.physical.indoor_temp[e] - z.temp_setpoint_f) -
                              std::abs(honest.temp_f - z.temp_setpoint_f);
      double v = 0.0;
      if (c.co2_deviation_ppm) {
        v += co2_inc / comfort_scale(c.co2_deviation_ppm);
        ok = ok && co2_inc > *c.co2_deviation_ppm;
        margin = std::min(margin, co2_inc - *c.co2_deviation_ppm);
      }
      if (c.temp_deviation_f) {
        v += temp_inc / comfort_scale(c.temp_deviation_f);
        ok = ok && temp_inc > *c.temp_deviation_f;
        margin = std::min(margin, temp_inc - *c.temp_deviation_f);
      }
      m += v;
    }
    ev.metric = m;
    ev.goal_margin = margin;
    ev.goal_ok = ok;
  }
  a.metric = ev.metric;

  g_checked.fetch_add(1);
  if (!ev.stealth.accepted || ev.zero_sum != 0) g_violations.fetch_add(1);
  return a;
}

AttackVector realize(const ConstraintProblem& problem, const std::vector<Eigen::VectorXi>& deltas) {
  if (deltas.size() != problem.slots.size()) throw DomainError("one delta vector per slot is required");
  AttackVector v;
  for (std::size_t s = 0; s < deltas.size(); ++s) {
    v.slots.push_back(realize_slot(problem, s, deltas[s]));
    v.metric += v.slots.back().metric;
    v.honest_energy_kwh += v.slots.back().honest_energy_kwh;
    v.attacked_energy_kwh += v.slots.back().attacked_energy_kwh;
  }
  return v;
}

StealthAudit stealth_audit() { return {g_checked.load(), g_violations.load()}; }

}  // namespace biota
