#include "biota/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "biota/config_io.hpp"
#include "biota/errors.hpp"

#ifndef BIOTA_VERSION
#define BIOTA_VERSION "0.0.0"
#endif

namespace biota {

namespace {

std::vector<ZoneState> states_of(const SensorFrame& f) {
  std::vector<ZoneState> s;
  for (Eigen::Index e = 0; e < f.zone_count(); ++e) s.push_back({f.indoor_co2[e], f.indoor_temp[e]});
  return s;
}

std::vector<ZoneState> advance(const BuildingConfig& config, const ControlDecision& decision,
                               const Eigen::VectorXi& occupancy, const std::vector<ZoneState>& start, double dt) {
  std::vector<ZoneState> out;
  for (std::size_t j = 0; j < config.zone_count(); ++j)
    out.push_back(predict_zone_state(config, j, decision.zones[j], occupancy[static_cast<Eigen::Index>(j)], start[j],
                                     dt));
  return out;
}

[[noreturn]] void rethrow_with_slot(std::size_t timeslot) {
  try {
    throw;
  } catch (const Error& e) {
    throw Error(fmt::format("timeslot {}: {}", timeslot, e.what()));
  }
}

std::vector<std::string> names_of(const BuildingConfig& config, const AccessSet& access) {
  std::vector<std::string> out;
  for (auto j : access.forgeable()) out.push_back(config.zones[j].name);
  return out;
}

struct SlotSolve {
  Verdict verdict = Verdict::unsat;
  std::optional<SlotAttack> attack;
};

SlotSolve solve_slot(const BuildingConfig& config, const SensorFrame& frame, const AttackGoal& goal,
                     const AccessSet& access, const CampaignOptions& options,
                     const std::vector<ZoneState>* physical_start) {
  SlotSolve out;
  if (access.forgeable().empty()) return out;
  std::vector<std::vector<ZoneState>> starts;
  EncodeOptions eo{options.tolerance, nullptr};
  if (physical_start) {
    starts.push_back(*physical_start);
    eo.physical_start = &starts;
  }
  const auto problem = encode(config, {frame}, goal, access, eo);
  try {
    auto v = maximize_impact(problem, {true, options.budget, nullptr});
    out.verdict = Verdict::sat;
    out.attack = std::move(v.slots.front());
  } catch (const InfeasibleError&) {
    out.verdict = Verdict::unsat;
  } catch (const BudgetError&) {
    out.verdict = Verdict::budget_exceeded;
  }
  return out;
}

}  // namespace

void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& task) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex m;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(m);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<SensorFrame> honest_timeline(const BuildingConfig& config, const OccupancyTrace& raw,
                                         const WeatherSeries* weather) {
  config.validate();
  const auto trace = align_to_config(raw, config);
  if (trace.missing() != 0)
    throw DomainError(fmt::format("trace has {} missing cells; impute it first", trace.missing()));
  const double dt = config.interval_minutes;
  if (std::abs(trace.interval_minutes() - dt) > 1e-9)
    throw IntervalError(fmt::format("trace interval {} min differs from the controller's {} min",
                                    trace.interval_minutes(), dt));
  auto outdoor = [&](Eigen::Index s) { return weather ? weather->at(trace.time_of(s)) : config.design_outdoor; };

  std::vector<SensorFrame> frames;
  if (trace.slot_count() == 0) return frames;
  const auto n = static_cast<Eigen::Index>(config.zone_count());
  SensorFrame f;
  f.timeslot = 0;
  f.interval_minutes = dt;
  f.occupancy = trace.occupancy.row(0).transpose();
  f.indoor_co2.resize(n);
  f.indoor_temp.resize(n);
  for (Eigen::Index e = 0; e < n; ++e) {
    f.indoor_co2[e] = config.co2_hold_floor_ppm;
    f.indoor_temp[e] = config.zones[static_cast<std::size_t>(e)].temp_setpoint_f;
  }
  for (Eigen::Index s = 0; s < trace.slot_count(); ++s) {
    const auto o = outdoor(s);
    f.outdoor_temp_f = o.temp_f;
    f.outdoor_rh = o.rh;
    f.outdoor_co2_ppm = o.co2_ppm;
    try {
      f.validate(config);
      frames.push_back(f);
      if (s + 1 < trace.slot_count())
        f = simulate_next(config, f, control_step(config, f), trace.occupancy.row(s + 1).transpose());
    } catch (...) {
      rethrow_with_slot(static_cast<std::size_t>(s));
    }
  }
  return frames;
}

std::size_t CampaignReport::sat_count() const {
  return static_cast<std::size_t>(
      std::count_if(slots.begin(), slots.end(), [](const SlotOutcome& s) { return s.verdict == Verdict::sat; }));
}

std::string config_digest(const BuildingConfig& config, std::uint64_t seed, const std::string& extra) {
  return fnv1a_hex(fmt::format("{}\nseed={}\nversion={}\n{}", dump_config(config), seed, BIOTA_VERSION, extra));
}

CampaignReport run_timeline(const BuildingConfig& config, const OccupancyTrace& trace, const WeatherSeries* weather,
                            const AttackGoal& goal, const AccessSet& access, const CampaignOptions& options) {
  validate_goal(goal, config);
  if (access.size() != config.zone_count()) throw DomainError("access set size differs from zone count");
  const auto frames = honest_timeline(config, trace, weather);
  const auto n = frames.size();

  CampaignReport report;
  report.goal = describe_goal(goal, config);
  report.access = names_of(config, access);
  report.digest = config_digest(config, options.seed,
                                fmt::format("goal={}\naccess={}", report.goal, fmt::join(report.access, ",")));
  report.slots.resize(n);

  const bool energy = std::holds_alternative<EnergyIncrease>(goal);
  if (energy && std::get<EnergyIncrease>(goal).scope == GoalScope::horizon)
    throw DomainError("campaigns attack slot by slot; use a per-timeslot energy goal");

  std::vector<SlotSolve> solved(n);
  if (energy) {
    parallel_for(n, options.workers, [&](std::size_t s) {
      try {
        solved[s] = solve_slot(config, frames[s], goal, access, options, nullptr);
      } catch (...) {
        rethrow_with_slot(frames[s].timeslot);
      }
    });
  }

  std::vector<TimeslotCost> honest_costs, attacked_costs;
  auto attacked_state = n ? states_of(frames.front()) : std::vector<ZoneState>{};
  for (std::size_t s = 0; s < n; ++s) {
    const auto& frame = frames[s];
    auto& out = report.slots[s];
    try {
      if (!energy) solved[s] = solve_slot(config, frame, goal, access, options, &attacked_state);
      const auto honest_decision = control_step(config, frame);
      const auto honest_cost = decision_cost(config, honest_decision, frame.interval_minutes);
      out.timeslot = frame.timeslot;
      out.true_occupancy = frame.occupancy;
      out.verdict = solved[s].verdict;
      out.deltas = Eigen::VectorXi::Zero(frame.occupancy.size());
      out.honest_energy_kwh = honest_cost.energy_kwh();
      out.honest_state = advance(config, honest_decision, frame.occupancy, states_of(frame), frame.interval_minutes);
      honest_costs.push_back(honest_cost);
      if (solved[s].attack) {
        auto& a = *solved[s].attack;
        a.slot = s;
        out.deltas = a.deltas;
        out.metric = a.metric;
        out.attacked_energy_kwh = a.attacked_energy_kwh;
        attacked_costs.push_back(a.attacked_cost);
        attacked_state = advance(config, a.step.decision, frame.occupancy, attacked_state, frame.interval_minutes);
        out.attack = std::move(a);
      } else {
        out.attacked_energy_kwh = out.honest_energy_kwh;
        attacked_costs.push_back(honest_cost);
        attacked_state = advance(config, honest_decision, frame.occupancy, attacked_state, frame.interval_minutes);
      }
      out.attacked_state = attacked_state;
    } catch (...) {
      rethrow_with_slot(frame.timeslot);
    }
  }
  report.honest = total_cost(std::move(honest_costs), config.electricity_rate);
  report.attacked = total_cost(std::move(attacked_costs), config.electricity_rate);
  return report;
}

SweepResult sweep_access_subsets(const BuildingConfig& config, const std::vector<SensorFrame>& frames,
                                 const EnergyIncrease& goal, std::size_t max_subset_size,
                                 const std::vector<std::vector<std::string>>& subsets, const CampaignOptions& options) {
  if (goal.scope != GoalScope::per_timeslot) throw DomainError("sweeps use a per-timeslot energy goal");
  std::vector<std::vector<std::size_t>> chosen;
  if (!subsets.empty()) {
    for (const auto& names : subsets) {
      std::vector<std::size_t> idx;
      for (const auto& name : names) idx.push_back(config.zone_index(name));
      std::sort(idx.begin(), idx.end());
      if (idx.empty() || std::adjacent_find(idx.begin(), idx.end()) != idx.end())
        throw UsageError("each subset needs distinct zone names");
      chosen.push_back(idx);
    }
  } else {
    const std::size_t z = config.zone_count();
    if (z > kMaxSweepZones)
      throw GuardError(fmt::format("{} zones is too many to enumerate subsets; pass an explicit list", z));
    const std::size_t k_max = std::min(max_subset_size, z);
    for (std::size_t k = 1; k <= k_max; ++k) {
      std::vector<bool> pick(z, false);
      std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(k), true);
      do {
        std::vector<std::size_t> idx;
        for (std::size_t j = 0; j < z; ++j)
          if (pick[j]) idx.push_back(j);
        chosen.push_back(idx);
      } while (std::prev_permutation(pick.begin(), pick.end()));
    }
  }

  SweepResult result;
  result.slot_count = frames.size();
  result.digest = config_digest(config, options.seed, fmt::format("sweep threshold={}", goal.threshold));
  for (const auto& idx : chosen) {
    AccessSet access(config.zone_count());
    SweepRow row;
    for (auto j : idx) {
      access.grant(j);
      row.zones.push_back(config.zones[j].name);
    }
    std::vector<SlotSolve> solved(frames.size());
    parallel_for(frames.size(), options.workers, [&](std::size_t s) {
      try {
        solved[s] = solve_slot(config, frames[s], goal, access, options, nullptr);
      } catch (...) {
        rethrow_with_slot(frames[s].timeslot);
      }
    });
    bool any = false;
    for (const auto& sv : solved) {
      if (!sv.attack) continue;
      const double gain = sv.attack->attacked_energy_kwh - sv.attack->honest_energy_kwh;
      row.total_increase_kwh += gain;
      row.max_slot_kwh = any ? std::max(row.max_slot_kwh, gain) : gain;
      row.min_slot_kwh = any ? std::min(row.min_slot_kwh, gain) : gain;
      any = true;
      ++row.sat_slots;
    }
    row.total_increase_currency = row.total_increase_kwh * config.electricity_rate;
    result.rows.push_back(std::move(row));
  }
  std::stable_sort(result.rows.begin(), result.rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.total_increase_kwh != b.total_increase_kwh) return a.total_increase_kwh > b.total_increase_kwh;
    if (a.zones.size() != b.zones.size()) return a.zones.size() < b.zones.size();
    return a.zones < b.zones;
  });
  return result;
}

std::vector<DiscomfortRow> discomfort_metrics(const BuildingConfig& config, const CampaignReport& report,
                                              double co2_threshold_ppm, double temp_threshold_f) {
  std::vector<DiscomfortRow> rows;
  for (std::size_t j = 0; j < config.zone_count(); ++j) {
    const auto& z = config.zones[j];
    DiscomfortRow r;
    r.zone = z.name;
    std::size_t co2 = 0, temp = 0, hco2 = 0, htemp = 0;
    for (const auto& s : report.slots) {
      if (s.true_occupancy.size() == 0 || s.true_occupancy[static_cast<Eigen::Index>(j)] <= 0) continue;
      ++r.occupied_slots;
      if (s.attacked_state[j].co2_ppm > co2_threshold_ppm) ++co2;
      if (std::abs(s.attacked_state[j].temp_f - z.temp_setpoint_f) > temp_threshold_f) ++temp;
      if (s.honest_state[j].co2_ppm > co2_threshold_ppm) ++hco2;
      if (std::abs(s.honest_state[j].temp_f - z.temp_setpoint_f) > temp_threshold_f) ++htemp;
    }
    if (r.occupied_slots) {
      const double d = static_cast<double>(r.occupied_slots);
      r.co2_fraction = static_cast<double>(co2) / d;
      r.temp_fraction = static_cast<double>(temp) / d;
      r.honest_co2_fraction = static_cast<double>(hco2) / d;
      r.honest_temp_fraction = static_cast<double>(htemp) / d;
    }
    rows.push_back(r);
  }
  return rows;
}

BuildingConfig replicate_zones(const BuildingConfig& config, std::size_t factor) {
  if (factor < 1) throw RangeError("replication factor must be at least 1");
  BuildingConfig out = config;
  if (factor == 1) return out;
  out.zones.clear();
  for (std::size_t k = 1; k <= factor; ++k)
    for (auto z : config.zones) {
      z.name = fmt::format("{}_{}", z.name, k);
      out.zones.push_back(z);
    }
  return out;
}

std::vector<BenchRow> scalability_bench(const BuildingConfig& config, const HourlyOccupancyModel& model,
                                        const std::vector<std::size_t>& factors,
                                        std::chrono::duration<double> timeout, std::uint64_t seed,
                                        std::size_t samples) {
  std::vector<std::size_t> model_zone;
  for (const auto& z : config.zones) {
    const auto it = std::find(model.zones.begin(), model.zones.end(), z.name);
    if (it == model.zones.end()) throw SchemaError(fmt::format("occupancy model has no zone '{}'", z.name));
    model_zone.push_back(static_cast<std::size_t>(it - model.zones.begin()));
  }
  std::size_t peak = 0;
  double peak_total = -1.0;
  for (std::size_t h = 0; h < 24; ++h) {
    double total = 0.0;
    for (auto m : model_zone) total += model.hours[m][h].mean;
    if (total > peak_total) {
      peak_total = total;
      peak = h;
    }
  }

  std::vector<BenchRow> rows;
  for (auto factor : factors) {
    const auto big = replicate_zones(config, factor);
    const auto n = static_cast<Eigen::Index>(big.zone_count());
    const auto access = AccessSet::all(big.zone_count());
    constexpr double kTol = 1e-3;
    BenchRow sat_row, unsat_row;
    sat_row.expected = "sat";
    unsat_row.expected = "unsat";
    for (auto* row : {&sat_row, &unsat_row}) {
      row->zones = big.zone_count();
      row->factor = factor;
      row->verdict = row->expected;
    }
    for (std::size_t sample = 0; sample < std::max<std::size_t>(1, samples); ++sample) {
      SensorFrame frame;
      frame.timeslot = sample;
      frame.interval_minutes = big.interval_minutes;
      frame.outdoor_temp_f = big.design_outdoor.temp_f;
      frame.outdoor_rh = big.design_outdoor.rh;
      frame.outdoor_co2_ppm = big.design_outdoor.co2_ppm;
      frame.occupancy.resize(n);
      frame.indoor_co2.resize(n);
      frame.indoor_temp.resize(n);
      std::mt19937_64 eng(seed ^ (0x9E3779B97F4A7C15ULL * (factor * 1000 + sample + 1)));
      for (Eigen::Index e = 0; e < n; ++e) {
        const auto j = static_cast<std::size_t>(e);
        const auto& st = model.hours[model_zone[j % config.zone_count()]][peak];
        std::normal_distribution<double> dist(st.mean, std::max(st.std, 1e-9));
        const double x = st.std > 0 ? dist(eng) : st.mean;
        frame.occupancy[e] = static_cast<int>(std::lround(std::clamp(x, 0.0, double(big.zones[j].capacity))));
        frame.indoor_co2[e] = big.zones[j].co2_setpoint_ppm;
        frame.indoor_temp[e] = big.zones[j].temp_setpoint_f;
      }
      const auto probe = encode(big, {frame}, EnergyIncrease{0.0, ThresholdUnit::kwh}, access);
      const double best = maximize_impact_tolerant(probe, {}, kTol).metric;
      const std::pair<BenchRow*, double> cases[] = {{&sat_row, 0.5 * best},
                                                    {&unsat_row, best * (1.0 + kTol) * (1.0 + 1e-6) + 1e-12}};
      for (const auto& [row, threshold] : cases) {
        const auto p = encode(big, {frame}, EnergyIncrease{threshold, ThresholdUnit::kwh}, access);
        // Repeat short searches so the clock resolution does not dominate.
        using Clock = std::chrono::steady_clock;
        const auto t0 = Clock::now();
        std::size_t reps = 0;
        SynthesisResult r;
        do {
          r = synthesize(p, {0, timeout});
          ++reps;
        } while (r.verdict != Verdict::budget_exceeded && Clock::now() - t0 < std::chrono::milliseconds(20));
        const double per_run = std::chrono::duration<double>(Clock::now() - t0).count() / static_cast<double>(reps);
        const std::string got =
            r.verdict == Verdict::sat ? "sat" : r.verdict == Verdict::unsat ? "unsat" : "timeout";
        if (got != row->expected) row->verdict = got;
        row->seconds += per_run;
        row->nodes += r.stats.nodes;
        row->threshold_kwh += threshold;
      }
    }
    rows.push_back(sat_row);
    rows.push_back(unsat_row);
  }
  return rows;
}

}  // namespace biota
