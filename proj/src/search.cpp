#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "biota/attack.hpp"
#include "biota/errors.hpp"

namespace biota {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Choice {
  int delta;
  double value;
};

struct Level {
  std::size_t zone;
  std::vector<Choice> choices;  // ascending delta
};

bool is_target(const ComfortDisruption& c, std::size_t zone) {
  return std::find(c.targets.begin(), c.targets.end(), zone) != c.targets.end();
}

double row_value(const ConstraintProblem& p, const DeltaOutcome& r, std::size_t zone) {
  if (std::holds_alternative<EnergyIncrease>(p.goal)) return r.energy_gain_kwh;
  const auto& c = std::get<ComfortDisruption>(p.goal);
  if (!is_target(c, zone)) return 0.0;
  double v = 0.0;
  if (c.co2_deviation_ppm) v += r.co2_increase_ppm / (*c.co2_deviation_ppm > 0 ? *c.co2_deviation_ppm : 1.0);
  if (c.temp_deviation_f) v += r.temp_increase_f / (*c.temp_deviation_f > 0 ? *c.temp_deviation_f : 1.0);
  return v;
}

bool row_meets_goal(const ConstraintProblem& p, const DeltaOutcome& r, std::size_t zone) {
  const auto* c = std::get_if<ComfortDisruption>(&p.goal);
  if (!c || !is_target(*c, zone)) return true;
  if (c->co2_deviation_ppm && !(r.co2_increase_ppm > *c->co2_deviation_ppm)) return false;
  if (c->temp_deviation_f && !(r.temp_increase_f > *c->temp_deviation_f)) return false;
  return true;
}

enum class Mode { first, best };

// Depth-first search over one slot.  Levels follow canonical zone order and try
// deltas in ascending order, so complete assignments are met lexicographically.
class SlotSearch {
 public:
  SlotSearch(const ConstraintProblem& p, std::size_t slot, bool filter_goal, std::optional<double> threshold,
             const SearchBudget& budget, Clock::time_point start, double relative_tolerance)
      : threshold_(threshold), budget_(budget), start_(start), rel_tol_(relative_tolerance) {
    const auto& sp = p.slots.at(slot);
    n_zones_ = p.config.zone_count();
    if (filter_goal) {
      if (const auto* c = std::get_if<ComfortDisruption>(&p.goal))
        for (auto t : c->targets)
          if (!p.access.can_forge(t)) impossible_ = true;  // an unshifted zone never moves further away
    }
    double scale = threshold ? std::abs(*threshold) : 0.0;
    for (const auto& t : sp.tables) {
      Level lv{t.zone, {}};
      double zone_scale = 0.0;
      for (const auto& r : t.rows) {
        if (!r.feasible) continue;
        if (filter_goal && !row_meets_goal(p, r, t.zone)) continue;
        lv.choices.push_back({r.delta, row_value(p, r, t.zone)});
        zone_scale = std::max(zone_scale, std::abs(lv.choices.back().value));
      }
      if (lv.choices.empty()) impossible_ = true;
      scale += zone_scale;
      levels_.push_back(std::move(lv));
    }
    margin_ = 1e-10 * (1.0 + scale);
    if (impossible_) return;
    prepare_bounds();
  }

  bool impossible() const { return impossible_; }

  /// Returns false when the budget ran out.
  bool run(Mode mode) {
    mode_ = mode;
    found_ = false;
    best_ = kNegInf;
    if (impossible_) return true;
    current_.assign(levels_.size(), 0);
    try {
      descend(0, 0, 0.0);
    } catch (const Stop&) {
    }
    return !exhausted_;
  }

  bool found() const { return found_; }
  double best() const { return best_; }
  double best_seen() const { return best_seen_; }
  std::uint64_t nodes() const { return nodes_; }

  Eigen::VectorXi best_deltas() const {
    Eigen::VectorXi d = Eigen::VectorXi::Zero(static_cast<Eigen::Index>(n_zones_));
    for (std::size_t r = 0; r < levels_.size(); ++r) d[static_cast<Eigen::Index>(levels_[r].zone)] = best_assignment_[r];
    return d;
  }

 private:
  struct Stop {};

  void prepare_bounds() {
    const std::size_t n = levels_.size();
    suf_min_.assign(n + 1, 0);
    suf_max_.assign(n + 1, 0);
    for (std::size_t r = n; r-- > 0;) {
      suf_min_[r] = suf_min_[r + 1] + levels_[r].choices.front().delta;
      suf_max_[r] = suf_max_[r + 1] + levels_[r].choices.back().delta;
    }
    // Multipliers for the relaxed zero-sum bound: every marginal slope, thinned to quantiles.
    std::vector<double> slopes{0.0};
    for (const auto& lv : levels_)
      for (std::size_t k = 1; k < lv.choices.size(); ++k)
        slopes.push_back((lv.choices[k].value - lv.choices[k - 1].value) /
                         (lv.choices[k].delta - lv.choices[k - 1].delta));
    std::sort(slopes.begin(), slopes.end());
    slopes.erase(std::unique(slopes.begin(), slopes.end()), slopes.end());
    constexpr std::size_t kMaxMultipliers = 96;
    if (slopes.size() > kMaxMultipliers) {
      std::vector<double> thin{0.0};
      for (std::size_t q = 0; q < kMaxMultipliers; ++q) thin.push_back(slopes[q * (slopes.size() - 1) / (kMaxMultipliers - 1)]);
      std::sort(thin.begin(), thin.end());
      thin.erase(std::unique(thin.begin(), thin.end()), thin.end());
      slopes = std::move(thin);
    }
    lambdas_ = std::move(slopes);
    const std::size_t L = lambdas_.size();
    suf_bound_.assign((n + 1) * L, 0.0);
    for (std::size_t r = n; r-- > 0;) {
      for (std::size_t l = 0; l < L; ++l) {
        double m = kNegInf;
        for (const auto& c : levels_[r].choices) m = std::max(m, c.value - lambdas_[l] * c.delta);
        suf_bound_[r * L + l] = suf_bound_[(r + 1) * L + l] + m;
      }
    }
  }

  double bound(std::size_t r, int delta_sum) const {
    const std::size_t L = lambdas_.size();
    const double s = -static_cast<double>(delta_sum);
    double ub = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < L; ++l) ub = std::min(ub, suf_bound_[r * L + l] + lambdas_[l] * s);
    return ub;
  }

  void tick() {
    ++nodes_;
    if (budget_.max_nodes && nodes_ > budget_.max_nodes) {
      exhausted_ = true;
      throw Stop{};
    }
    if (budget_.time_limit.count() > 0 && (nodes_ & 1023u) == 0 &&
        Clock::now() - start_ > budget_.time_limit) {
      exhausted_ = true;
      throw Stop{};
    }
  }

  // True when the subtree cannot contain anything worth reaching.
  bool prune(std::size_t r, int delta_sum, double value) const {
    if (-delta_sum < suf_min_[r] || -delta_sum > suf_max_[r]) return true;
    if (mode_ == Mode::first) {
      if (!threshold_) return false;
      return value + bound(r, delta_sum) + margin_ <= *threshold_;
    }
    const double ub = value + bound(r, delta_sum);
    if (threshold_ && ub + margin_ <= *threshold_) return true;
    if (best_ == kNegInf) return false;
    if (rel_tol_ > 0) return ub <= best_ + rel_tol_ * std::abs(best_) + margin_;
    return ub + margin_ < best_;
  }

  void leaf(double value) {
    best_seen_ = std::max(best_seen_, value);
    const bool meets = !threshold_ || value > *threshold_;
    if (!meets) return;
    if (mode_ == Mode::first) {
      found_ = true;
      best_ = value;
      best_assignment_ = current_;
      throw Stop{};
    }
    if (value > best_) {
      found_ = true;
      best_ = value;
      best_assignment_ = current_;
    }
  }

  void descend(std::size_t r, int delta_sum, double value) {
    if (r == levels_.size()) {
      leaf(value);
      return;
    }
    if (prune(r, delta_sum, value)) return;
    const auto& lv = levels_[r];
    if (r + 1 == levels_.size()) {
      // The last delta is fixed by the zero-sum rule.
      const int need = -delta_sum;
      const auto it = std::lower_bound(lv.choices.begin(), lv.choices.end(), need,
                                       [](const Choice& c, int d) { return c.delta < d; });
      if (it == lv.choices.end() || it->delta != need) return;
      tick();
      current_[r] = need;
      leaf(value + it->value);
      return;
    }
    for (const auto& c : lv.choices) {
      tick();
      current_[r] = c.delta;
      descend(r + 1, delta_sum + c.delta, value + c.value);
    }
  }

  std::size_t n_zones_ = 0;
  std::vector<Level> levels_;
  std::optional<double> threshold_;
  SearchBudget budget_;
  Clock::time_point start_;
  double rel_tol_ = 0.0;
  double margin_ = 0.0;
  bool impossible_ = false;
  bool exhausted_ = false;
  Mode mode_ = Mode::first;

  std::vector<int> suf_min_, suf_max_;
  std::vector<double> lambdas_;
  std::vector<double> suf_bound_;

  std::vector<int> current_;
  std::vector<int> best_assignment_;
  bool found_ = false;
  double best_ = kNegInf;
  double best_seen_ = kNegInf;
  std::uint64_t nodes_ = 0;
};

std::optional<double> slot_threshold(const ConstraintProblem& p, std::size_t slot) {
  const auto* e = std::get_if<EnergyIncrease>(&p.goal);
  if (!e || e->scope == GoalScope::horizon) return std::nullopt;
  return p.slots[slot].threshold_kwh;
}

void check_sound(const AttackVector& v, bool require_goal) {
  for (const auto& s : v.slots) {
    const auto& ev = s.evidence;
    const bool feasible = ev.zero_sum == 0 && ev.capacity_ok && ev.access_ok && ev.stealth.accepted;
    if (!feasible || (require_goal && !ev.goal_ok))
      throw std::logic_error(fmt::format("internal: vector for timeslot {} failed re-verification", s.timeslot));
  }
}

double elapsed(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

}  // namespace

SynthesisResult synthesize(const ConstraintProblem& p, const SearchBudget& budget) {
  const auto start = Clock::now();
  SynthesisResult result;
  const auto* energy = std::get_if<EnergyIncrease>(&p.goal);
  const bool horizon = energy && energy->scope == GoalScope::horizon;
  std::vector<Eigen::VectorXi> deltas;
  double total = 0.0;

  for (std::size_t s = 0; s < p.slots.size(); ++s) {
    SlotSearch search(p, s, true, slot_threshold(p, s), budget, start, 0.0);
    const bool done = search.run(horizon ? Mode::best : Mode::first);
    result.stats.nodes += search.nodes();
    if (!done) {
      result.verdict = Verdict::budget_exceeded;
      if (search.best_seen() > kNegInf) result.best_metric = search.best_seen();
      result.stats.seconds = elapsed(start);
      return result;
    }
    if (!search.found()) {
      result.verdict = Verdict::unsat;
      result.stats.seconds = elapsed(start);
      return result;
    }
    total += search.best();
    deltas.push_back(search.best_deltas());
  }
  if (horizon && !(total > p.horizon_threshold_kwh)) {
    result.verdict = Verdict::unsat;
    result.stats.seconds = elapsed(start);
    return result;
  }
  result.verdict = Verdict::sat;
  result.vector = realize(p, deltas);
  check_sound(*result.vector, true);
  result.stats.seconds = elapsed(start);
  return result;
}

AttackVector maximize_impact(const ConstraintProblem& p, const MaximizeOptions& options) {
  return maximize_impact_tolerant(p, options, 0.0);
}

AttackVector maximize_impact_tolerant(const ConstraintProblem& p, const MaximizeOptions& options,
                                      double relative_tolerance) {
  const auto start = Clock::now();
  std::vector<Eigen::VectorXi> deltas;
  double total = 0.0;
  std::uint64_t nodes = 0;
  for (std::size_t s = 0; s < p.slots.size(); ++s) {
    const auto threshold = options.require_goal ? slot_threshold(p, s) : std::nullopt;
    SlotSearch search(p, s, options.require_goal, threshold, options.budget, start, relative_tolerance);
    const bool done = search.run(Mode::best);
    nodes += search.nodes();
    if (!done) throw BudgetError(fmt::format("search budget exhausted at slot {}", s));
    if (!search.found())
      throw InfeasibleError(fmt::format("no attack vector satisfies the goal at timeslot {}", p.slots[s].frame.timeslot));
    total += search.best();
    deltas.push_back(search.best_deltas());
  }
  if (options.require_goal) {
    const auto* e = std::get_if<EnergyIncrease>(&p.goal);
    if (e && e->scope == GoalScope::horizon && !(total > p.horizon_threshold_kwh))
      throw InfeasibleError("no attack vector reaches the horizon energy threshold");
  }
  auto v = realize(p, deltas);
  check_sound(v, options.require_goal);
  if (options.stats) *options.stats = {nodes, elapsed(start)};
  return v;
}

}  // namespace biota
