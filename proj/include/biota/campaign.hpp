#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "biota/attack.hpp"
#include "biota/cost.hpp"
#include "biota/data.hpp"

namespace biota {

struct CampaignOptions {
  std::uint64_t seed = 0;
  SearchBudget budget;         ///< per timeslot
  unsigned workers = 0;        ///< 0 picks the hardware concurrency
  VerifyTolerance tolerance;
};

/// Frames the honest controller would see replaying `trace`.  The first slot
/// starts every zone at the CO2 hold floor and its temperature setpoint.
/// Without a weather series the configured design outdoor conditions apply.
std::vector<SensorFrame> honest_timeline(const BuildingConfig& config, const OccupancyTrace& trace,
                                         const WeatherSeries* weather = nullptr);

struct SlotOutcome {
  std::size_t timeslot = 0;
  Verdict verdict = Verdict::unsat;
  Eigen::VectorXi deltas;
  Eigen::VectorXi true_occupancy;
  double honest_energy_kwh = 0.0;
  double attacked_energy_kwh = 0.0;
  double metric = 0.0;
  std::vector<ZoneState> honest_state;    ///< zone states at the end of the slot
  std::vector<ZoneState> attacked_state;  ///< same, under the attack so far
  std::optional<SlotAttack> attack;
};

struct CampaignReport {
  std::string digest;
  std::string goal;
  std::vector<std::string> access;
  HorizonCost honest;
  HorizonCost attacked;
  std::vector<SlotOutcome> slots;

  std::size_t sat_count() const;
  double energy_increase_kwh() const { return attacked.total_energy_kwh - honest.total_energy_kwh; }
};

/// Reproducibility tag over the configuration, seed and library version.
std::string config_digest(const BuildingConfig& config, std::uint64_t seed, const std::string& extra = {});

/// Attacks every timeslot with the strongest vector that meets the goal.
/// Energy goals treat slots independently; comfort goals carry the attacked
/// room states forward from slot to slot.
CampaignReport run_timeline(const BuildingConfig& config, const OccupancyTrace& trace, const WeatherSeries* weather,
                            const AttackGoal& goal, const AccessSet& access, const CampaignOptions& options = {});

struct SweepRow {
  std::vector<std::string> zones;
  double total_increase_kwh = 0.0;  ///< sum of per-slot maxima
  double max_slot_kwh = 0.0;
  double min_slot_kwh = 0.0;        ///< smallest per-slot maximum among SAT slots
  std::size_t sat_slots = 0;
  double total_increase_currency = 0.0;
};

struct SweepResult {
  std::string digest;
  std::size_t slot_count = 0;
  std::vector<SweepRow> rows;
};

inline constexpr std::size_t kMaxSweepZones = 16;

/// Every non-empty zone subset of size at most `max_subset_size`, or exactly
/// the `subsets` given.  Rows come back sorted by total increase, descending.
SweepResult sweep_access_subsets(const BuildingConfig& config, const std::vector<SensorFrame>& frames,
                                 const EnergyIncrease& goal, std::size_t max_subset_size,
                                 const std::vector<std::vector<std::string>>& subsets = {},
                                 const CampaignOptions& options = {});

struct DiscomfortRow {
  std::string zone;
  std::size_t occupied_slots = 0;
  double co2_fraction = 0.0;   ///< occupied slots ending above the CO2 threshold
  double temp_fraction = 0.0;  ///< occupied slots ending further than the threshold from setpoint
  double honest_co2_fraction = 0.0;
  double honest_temp_fraction = 0.0;
};

/// Occupancy counts are the true ones, not the forged reports.
std::vector<DiscomfortRow> discomfort_metrics(const BuildingConfig& config, const CampaignReport& report,
                                              double co2_threshold_ppm, double temp_threshold_f);

struct BenchRow {
  std::size_t zones = 0;
  std::size_t factor = 1;
  std::string expected;  ///< "sat" or "unsat"
  std::string verdict;   ///< "sat", "unsat" or "timeout"
  double seconds = 0.0;
  std::uint64_t nodes = 0;
  double threshold_kwh = 0.0;
};

/// Copies of every zone, `factor` times over.  Copies are named "<zone>_<k>".
BuildingConfig replicate_zones(const BuildingConfig& config, std::size_t factor);

/// Times one SAT-expected and one UNSAT-expected synthesis per replication
/// factor.  Each of `samples` frames draws occupancy from `model` at its busiest
/// hour; a row's seconds, nodes and threshold are sums over the samples.
std::vector<BenchRow> scalability_bench(const BuildingConfig& config, const HourlyOccupancyModel& model,
                                        const std::vector<std::size_t>& factors, std::chrono::duration<double> timeout,
                                        std::uint64_t seed, std::size_t samples = 5);

/// Runs `task(i)` for i in [0, count) on up to `workers` threads.  The first
/// exception thrown by any task is rethrown once all threads have stopped.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& task);

}  // namespace biota
