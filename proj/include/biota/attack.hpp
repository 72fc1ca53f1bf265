#pragma once

#include <Eigen/Core>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "biota/cost.hpp"
#include "biota/model.hpp"

namespace biota {

struct SensorAccess {
  bool occupancy = false;
  bool indoor_temp = false;
  bool indoor_co2 = false;

  bool full() const { return occupancy && indoor_temp && indoor_co2; }
  bool any() const { return occupancy || indoor_temp || indoor_co2; }
};

/// Which sensors of which zones the attacker can rewrite.  A zone is only
/// attackable when all three of its sensor kinds are reachable, since a forged
/// head count must be backed by matching CO2 and temperature readings.
class AccessSet {
 public:
  AccessSet() = default;
  explicit AccessSet(std::size_t zone_count) : zones_(zone_count) {}

  static AccessSet all(std::size_t zone_count);
  /// Full access to the named zones.  Accepts "all" as a single name.
  static AccessSet of(const BuildingConfig& config, const std::vector<std::string>& names);

  void grant(std::size_t zone, SensorAccess access = {true, true, true});
  const SensorAccess& zone(std::size_t zone) const { return zones_.at(zone); }
  bool can_forge(std::size_t zone) const { return zone < zones_.size() && zones_[zone].full(); }
  std::vector<std::size_t> forgeable() const;
  std::size_t size() const { return zones_.size(); }

 private:
  std::vector<SensorAccess> zones_;
};

enum class ThresholdUnit { kwh, percent };
enum class GoalScope { per_timeslot, horizon };

/// Attacked energy must exceed honest energy by strictly more than the threshold.
struct EnergyIncrease {
  double threshold = 0.0;
  ThresholdUnit unit = ThresholdUnit::kwh;
  GoalScope scope = GoalScope::per_timeslot;
};

/// Every target zone must end the interval further from its setpoints than it
/// would have honestly, by strictly more than each given deviation.
struct ComfortDisruption {
  std::vector<std::size_t> targets;
  std::optional<double> co2_deviation_ppm;
  std::optional<double> temp_deviation_f;
  /// Count only CO2 above the setpoint; over-ventilating a zone earns nothing.
  bool co2_excess_only = false;
};

/// Distance of a CO2 reading from its setpoint under the goal's convention.
double co2_deviation(const ComfortDisruption& goal, double co2_ppm, double setpoint_ppm);

using AttackGoal = std::variant<EnergyIncrease, ComfortDisruption>;

/// Parses "energy:5%", "energy:2.5kwh", "energy:5%:horizon",
/// "comfort:co2=300,temp=4@entrance,laboratory" (no "@" targets every zone).
/// "co2+=300" in place of "co2=300" selects the excess-only CO2 convention.
AttackGoal parse_goal(std::string_view text, const BuildingConfig& config);
std::string describe_goal(const AttackGoal& goal, const BuildingConfig& config);
void validate_goal(const AttackGoal& goal, const BuildingConfig& config);

/// One interval of attack: the frame the controller is shown, the decision it
/// takes, the readings reported at the next slot, and what the sensors would
/// really have read.
struct ForgedStep {
  SensorFrame reported;
  ControlDecision decision;
  SensorFrame cover;
  SensorFrame physical;
};

/// Next-slot readings that make `prev_frame` with occupancy shifted by
/// `deltas` look consistent under `prev_decision`.  Zones with a zero delta keep
/// the values of `true_frame`.
SensorFrame forge_consistent_measurements(const BuildingConfig& config, const SensorFrame& prev_frame,
                                          const ControlDecision& prev_decision, const SensorFrame& true_frame,
                                          const Eigen::VectorXi& deltas, const AccessSet& access);

/// `physical_start` defaults to the frame's own readings.
ForgedStep forge_step(const BuildingConfig& config, const SensorFrame& frame, const Eigen::VectorXi& deltas,
                      const AccessSet& access, const std::vector<ZoneState>* physical_start = nullptr);

enum class Provenance { control, cost, attack };

enum class ConstraintKind {
  // control
  mixed_co2,
  mixed_temp,
  mixed_humidity,
  raw_flow,
  flow_floor,
  mass_flow,
  zone_load,
  supply_balance,
  supply_clamp,
  supply_lower,
  supply_upper,
  cover_co2,
  cover_temp,
  // cost
  supply_humidity,
  mixed_enthalpy,
  supply_enthalpy,
  condensate,
  coil,
  coil_water_temp,
  chiller,
  // attack
  occupancy_lower,
  occupancy_upper,
  co2_forgery,
  temp_forgery,
  // coupling, one per slot or horizon
  zero_sum,
  slot_energy,
  goal,
};

struct Constraint {
  Provenance tag;
  ConstraintKind kind;
  std::size_t slot = 0;
  std::optional<std::size_t> zone;  ///< empty for constraints that couple zones
};

/// Everything a given occupancy shift does to one zone in one slot.
struct DeltaOutcome {
  int delta = 0;
  bool feasible = false;  ///< controller had a finite answer
  ZoneDecision decision;
  ZoneCostBreakdown cost;
  double energy_kwh = 0.0;
  double energy_gain_kwh = 0.0;
  ZoneState cover;
  ZoneState physical;
  double co2_increase_ppm = 0.0;
  double temp_increase_f = 0.0;
};

struct ZoneTable {
  std::size_t zone = 0;
  int min_delta = 0;
  std::vector<DeltaOutcome> rows;

  int max_delta() const { return min_delta + static_cast<int>(rows.size()) - 1; }
  const DeltaOutcome& at(int delta) const { return rows.at(static_cast<std::size_t>(delta - min_delta)); }
};

struct ZoneBaseline {
  ZoneDecision decision;
  ZoneCostBreakdown cost;
  double energy_kwh = 0.0;
  ZoneState physical;
};

struct SlotProblem {
  SensorFrame frame;
  std::vector<ZoneState> physical_start;
  std::vector<ZoneBaseline> honest;
  std::vector<ZoneTable> tables;  ///< forgeable zones, canonical order
  double honest_energy_kwh = 0.0;
  double threshold_kwh = 0.0;  ///< per-timeslot energy threshold in kWh
};

struct ConstraintProblem {
  BuildingConfig config;
  AttackGoal goal;
  AccessSet access;
  VerifyTolerance tolerance;
  std::vector<SlotProblem> slots;
  std::vector<Constraint> constraints;
  double horizon_threshold_kwh = 0.0;
};

struct EncodeOptions {
  VerifyTolerance tolerance;
  /// Per-slot starting states for the physical outcome; defaults to each frame's readings.
  const std::vector<std::vector<ZoneState>>* physical_start = nullptr;
};

ConstraintProblem encode(const BuildingConfig& config, const std::vector<SensorFrame>& frames,
                         const AttackGoal& goal, const AccessSet& access, const EncodeOptions& options = {});

struct ProblemStats {
  std::size_t control = 0;
  std::size_t cost = 0;
  std::size_t attack = 0;
  std::size_t coupling_cost = 0;
  std::size_t coupling_attack = 0;
};

/// Per-zone constraint tallies by provenance; coupling constraints are kept apart.
ProblemStats problem_stats(const ConstraintProblem& problem);

/// Residual record for one attacked slot, produced by replaying the vector
/// through the controller, cost and verifier rather than the encoder tables.
struct Evidence {
  int zero_sum = 0;
  bool capacity_ok = true;
  bool access_ok = true;
  ConsistencyVerdict stealth;
  double metric = 0.0;
  double goal_margin = 0.0;
  bool goal_ok = false;

  bool sound() const { return zero_sum == 0 && capacity_ok && access_ok && stealth.accepted && goal_ok; }
};

struct SlotAttack {
  std::size_t slot = 0;
  std::size_t timeslot = 0;
  Eigen::VectorXi deltas;
  ForgedStep step;
  TimeslotCost honest_cost;
  TimeslotCost attacked_cost;
  double honest_energy_kwh = 0.0;
  double attacked_energy_kwh = 0.0;
  double metric = 0.0;
  Evidence evidence;
};

struct AttackVector {
  std::vector<SlotAttack> slots;
  double metric = 0.0;
  double honest_energy_kwh = 0.0;
  double attacked_energy_kwh = 0.0;
};

struct SearchBudget {
  std::uint64_t max_nodes = 0;                    ///< 0 means unlimited
  std::chrono::duration<double> time_limit{0.0};  ///< zero means unlimited
};

struct SearchStats {
  std::uint64_t nodes = 0;
  double seconds = 0.0;
};

enum class Verdict { sat, unsat, budget_exceeded };

struct SynthesisResult {
  Verdict verdict = Verdict::unsat;
  std::optional<AttackVector> vector;
  SearchStats stats;
  /// Best goal metric over complete assignments seen before the budget ran out.
  std::optional<double> best_metric;
};

/// Lexicographically first shift vector (per slot, canonical zone order,
/// ascending deltas) meeting every constraint.
SynthesisResult synthesize(const ConstraintProblem& problem, const SearchBudget& budget = {});

struct MaximizeOptions {
  /// Restrict to vectors that satisfy the goal predicate; throws
  /// InfeasibleError when there are none.
  bool require_goal = false;
  SearchBudget budget;
  SearchStats* stats = nullptr;
};

/// Vector with the largest goal metric, ties to the lexicographically smallest.
AttackVector maximize_impact(const ConstraintProblem& problem, const MaximizeOptions& options = {});

/// As maximize_impact, but prunes subtrees that cannot beat the incumbent by
/// more than `relative_tolerance`; the result is within that factor of optimal.
AttackVector maximize_impact_tolerant(const ConstraintProblem& problem, const MaximizeOptions& options,
                                      double relative_tolerance);

/// Goal metric of one slot for a full-length delta vector, from the tables.
/// Energy goals: kWh gain.  Comfort goals: sum over targets of increases
/// divided by their deviation thresholds.
double slot_metric(const ConstraintProblem& problem, std::size_t slot, const Eigen::VectorXi& deltas);

/// Replays `deltas` through the controller and verifier.  Counts toward stealth_audit().
SlotAttack realize_slot(const ConstraintProblem& problem, std::size_t slot, const Eigen::VectorXi& deltas);
AttackVector realize(const ConstraintProblem& problem, const std::vector<Eigen::VectorXi>& deltas);

struct StealthAudit {
  std::uint64_t checked = 0;
  std::uint64_t violations = 0;
};

/// Process-wide tally of every realized slot's stealth check.
StealthAudit stealth_audit();

}  // namespace biota
