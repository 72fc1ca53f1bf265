#include "biota/smtlib.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <fmt/format.h>

#include "biota/errors.hpp"
#include "biota/units.hpp"

namespace biota {

namespace {

std::string decimal_of(std::uint64_t v) { return std::to_string(v); }

std::string power_of_two(int k) {
  std::vector<int> digits{1};  // little endian
  for (int i = 0; i < k; ++i) {
    int carry = 0;
    for (auto& d : digits) {
      const int x = d * 2 + carry;
      d = x % 10;
      carry = x / 10;
    }
    if (carry) digits.push_back(carry);
  }
  std::string s;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) s.push_back(static_cast<char>('0' + *it));
  return s;
}

std::string multiply_by_power_of_two(std::uint64_t m, int k) {
  std::vector<int> digits;
  for (auto c : decimal_of(m)) digits.insert(digits.begin(), c - '0');
  for (int i = 0; i < k; ++i) {
    int carry = 0;
    for (auto& d : digits) {
      const int x = d * 2 + carry;
      d = x % 10;
      carry = x / 10;
    }
    if (carry) digits.push_back(carry);
  }
  std::string s;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) s.push_back(static_cast<char>('0' + *it));
  return s;
}

// Builds assertions for one problem; names are s<slot>z<zone>_<term>.
class Emitter {
 public:
  explicit Emitter(const ConstraintProblem& p) : p_(p) {}

  std::string run() {
    std::ostringstream out;
    out << "; biota attack feasibility\n";
    out << fmt::format("; building {} zones {} slots {}\n", p_.config.name.empty() ? "-" : p_.config.name,
                       p_.config.zone_count(), p_.slots.size());
    out << "(set-option :produce-models true)\n";
    out << "(set-logic QF_NIRA)\n";
    declare(out);
    // The honest baseline repeats the control and cost chain with every shift
    // pinned to zero, so a zero shift cancels exactly against it.
    baseline_ = true;
    for (const auto& c : p_.constraints) {
      if (!c.zone || c.tag == Provenance::attack || c.kind == ConstraintKind::cover_co2 ||
          c.kind == ConstraintKind::cover_temp)
        continue;
      out << fmt::format("; baseline {} slot {} zone {}\n", kind_name(c.kind), c.slot, p_.config.zones[*c.zone].name);
      out << "(assert " << assertion(c) << ")\n";
    }
    if (std::holds_alternative<EnergyIncrease>(p_.goal))
      for (std::size_t s = 0; s < p_.slots.size(); ++s) {
        out << fmt::format("; baseline slot-energy slot {}\n", s);
        out << "(assert " << slot_energy(s) << ")\n";
      }
    baseline_ = false;
    for (const auto& c : p_.constraints) {
      out << fmt::format("; {} {}{}\n", tag_name(c.tag), kind_name(c.kind),
                         c.zone ? fmt::format(" slot {} zone {}", c.slot, p_.config.zones[*c.zone].name)
                                : fmt::format(" slot {}", c.slot));
      out << "(assert " << assertion(c) << ")\n";
    }
    out << "(check-sat)\n(get-model)\n";
    return out.str();
  }

 private:
  static const char* tag_name(Provenance t) {
    switch (t) {
      case Provenance::control: return "control";
      case Provenance::cost: return "cost";
      case Provenance::attack: return "attack";
    }
    return "?";
  }

  static const char* kind_name(ConstraintKind k) {
    using K = ConstraintKind;
    switch (k) {
      case K::mixed_co2: return "mixed-co2";
      case K::mixed_temp: return "mixed-temp";
      case K::mixed_humidity: return "mixed-humidity";
      case K::raw_flow: return "raw-flow";
      case K::flow_floor: return "flow-floor";
      case K::mass_flow: return "mass-flow";
      case K::zone_load: return "zone-load";
      case K::supply_balance: return "supply-balance";
      case K::supply_clamp: return "supply-clamp";
      case K::supply_lower: return "supply-lower";
      case K::supply_upper: return "supply-upper";
      case K::cover_co2: return "cover-co2";
      case K::cover_temp: return "cover-temp";
      case K::supply_humidity: return "supply-humidity";
      case K::mixed_enthalpy: return "mixed-enthalpy";
      case K::supply_enthalpy: return "supply-enthalpy";
      case K::condensate: return "condensate";
      case K::coil: return "coil";
      case K::coil_water_temp: return "coil-water-temp";
      case K::chiller: return "chiller";
      case K::occupancy_lower: return "occupancy-lower";
      case K::occupancy_upper: return "occupancy-upper";
      case K::co2_forgery: return "co2-forgery";
      case K::temp_forgery: return "temp-forgery";
      case K::zero_sum: return "zero-sum";
      case K::slot_energy: return "slot-energy";
      case K::goal: return "goal";
    }
    return "?";
  }

  std::string var(std::size_t s, std::size_t j, const char* term) const {
    return fmt::format("s{}z{}{}_{}", s, j, baseline_ ? "h" : "", term);
  }

  std::string delta(std::size_t s, std::size_t j) const { return baseline_ ? "0" : smt_delta_name(s, j); }

  std::string energy_name(std::size_t s) const { return fmt::format("s{}_{}", s, baseline_ ? "honest" : "energy"); }

  const ZoneTable* table(std::size_t s, std::size_t j) const {
    for (const auto& t : p_.slots[s].tables)
      if (t.zone == j) return &t;
    return nullptr;
  }

  std::string occ(std::size_t s, std::size_t j) const {
    const int o = p_.slots[s].frame.occupancy[static_cast<Eigen::Index>(j)];
    if (!table(s, j)) return smt_real(o);
    return fmt::format("(to_real (+ {} {}))", o, delta(s, j));
  }

  // Value that depends on the zone's shift only through the controller's
  // choices; collapses to a literal when every row agrees.
  template <typename F>
  std::string by_delta(std::size_t s, std::size_t j, F value) const {
    const auto* t = table(s, j);
    const auto& honest = p_.slots[s].honest[j];
    if (!t) return smt_real(value(honest.decision));
    std::vector<const DeltaOutcome*> rows;
    for (const auto& r : t->rows)
      if (r.feasible) rows.push_back(&r);
    bool same = true;
    for (const auto* r : rows) same = same && value(r->decision) == value(rows.front()->decision);
    if (same) return smt_real(value(rows.front()->decision));
    std::string expr = smt_real(value(rows.back()->decision));
    for (std::size_t k = rows.size() - 1; k-- > 0;)
      expr = fmt::format("(ite (= {} {}) {} {})", delta(s, j), rows[k]->delta, smt_real(value(rows[k]->decision)), expr);
    return expr;
  }

  VentilationLaw law(std::size_t s, std::size_t j, const ZoneDecision& d) const {
    const auto& f = p_.slots[s].frame;
    const auto e = static_cast<Eigen::Index>(j);
    return ventilation_law(p_.config.zones[j], f.indoor_co2[e], d.mixed.co2_ppm, f.interval_minutes,
                           p_.config.co2_hold_floor_ppm);
  }

  void declare(std::ostream& out) const {
    static constexpr std::array reals{"cm", "tm", "wm", "vraw", "v", "m", "load", "traw", "ts", "cco2", "ctemp",
                                      "ws", "hm", "hs", "mcnd", "coil", "tcl", "chil"};
    for (std::size_t s = 0; s < p_.slots.size(); ++s) {
      for (std::size_t j = 0; j < p_.config.zone_count(); ++j) {
        if (table(s, j)) {
          out << fmt::format("(declare-fun {} () Int)\n", smt_delta_name(s, j));
          out << fmt::format("(declare-fun {} () Real)\n", var(s, j, "dci"));
          out << fmt::format("(declare-fun {} () Real)\n", var(s, j, "dti"));
        }
        for (const auto* r : reals) out << fmt::format("(declare-fun {} () Real)\n", var(s, j, r));
        baseline_ = true;
        for (const auto* r : reals) out << fmt::format("(declare-fun {} () Real)\n", var(s, j, r));
        baseline_ = false;
      }
      if (std::holds_alternative<EnergyIncrease>(p_.goal))
        out << fmt::format("(declare-fun s{0}_energy () Real)\n(declare-fun s{0}_honest () Real)\n", s);
    }
  }

  std::string celsius(const std::string& t_f) const {
    return fmt::format("(/ (- {} {}) {})", t_f, smt_real(units::kFreezingF), smt_real(units::kFahrenheitPerKelvin));
  }

  std::string enthalpy(const std::string& t_f, const std::string& w) const {
    const auto tc = celsius(t_f);
    return fmt::format("(+ (* {} {}) (* {} (+ {} (* {} {}))))", smt_real(1.006), tc, w, smt_real(2501.0),
                       smt_real(1.86), tc);
  }

  std::string heat_capacity(std::size_t s, std::size_t j) const {
    return fmt::format("(+ {} (* {} {}))", smt_real(1.006), smt_real(1.86), var(s, j, "wm"));
  }

  static std::string abs_of(const std::string& x) { return fmt::format("(ite (>= {0} 0.0) {0} (- {0}))", x); }
  static std::string floor_at(const std::string& x, const std::string& lo) {
    return fmt::format("(ite (< {0} {1}) {1} {0})", x, lo);
  }
  static std::string pos_of(const std::string& x) { return fmt::format("(ite (>= {0} 0.0) {0} 0.0)", x); }

  std::string assertion(const Constraint& c) const {
    using K = ConstraintKind;
    const std::size_t s = c.slot;
    if (!c.zone) return coupling(c);
    const std::size_t j = *c.zone;
    const auto e = static_cast<Eigen::Index>(j);
    const auto& z = p_.config.zones[j];
    const auto& f = p_.slots[s].frame;
    const double dt = f.interval_minutes;
    auto v = [&](const char* term) { return var(s, j, term); };
    switch (c.kind) {
      case K::mixed_co2:
        return fmt::format("(= {} {})", v("cm"), by_delta(s, j, [](const ZoneDecision& d) { return d.mixed.co2_ppm; }));
      case K::mixed_temp:
        return fmt::format("(= {} {})", v("tm"),
                           by_delta(s, j, [](const ZoneDecision& d) { return d.mixed.state.temperature_f; }));
      case K::mixed_humidity:
        return fmt::format("(= {} {})", v("wm"), by_delta(s, j, [](const ZoneDecision& d) { return d.mixed.humidity_ratio; }));
      case K::raw_flow: {
        const auto a = by_delta(s, j, [&](const ZoneDecision& d) { return law(s, j, d).intercept_cfm; });
        const auto b = by_delta(s, j, [&](const ZoneDecision& d) { return law(s, j, d).per_person_cfm; });
        return fmt::format("(= {} (+ {} (* {} {})))", v("vraw"), a, b, occ(s, j));
      }
      case K::flow_floor: {
        const auto fl = smt_real(z.min_airflow_cfm);
        return fmt::format("(= {} (ite (< {} {}) {} {}))", v("v"), v("vraw"), fl, fl, v("vraw"));
      }
      case K::mass_flow:
        return fmt::format("(= {} (/ (* {} {}) {}))", v("m"), v("v"), smt_real(units::kCfmToCubicMetresPerSecond),
                           by_delta(s, j, [](const ZoneDecision& d) { return d.specific_volume; }));
      case K::zone_load:
        return fmt::format("(= {} (+ {} (* {} {})))", v("load"), smt_real(z.thermal_load_kw), occ(s, j),
                           smt_real(z.heat_per_person_kw));
      case K::supply_balance:
        return fmt::format("(ite (> {0} 0.0) (= (* {0} {1} (- {2} {3})) (* {4} {5})) (= {3} {2}))", v("m"),
                           heat_capacity(s, j), smt_real(z.temp_setpoint_f), v("traw"),
                           smt_real(units::kFahrenheitPerKelvin), v("load"));
      case K::supply_clamp:
        return fmt::format("(= {0} (ite (< {1} {2}) {2} (ite (> {1} {3}) {3} {1})))", v("ts"), v("traw"),
                           smt_real(kMinSupplyF), smt_real(kMaxSupplyF));
      case K::supply_lower: return fmt::format("(<= {} {})", smt_real(kMinSupplyF), v("ts"));
      case K::supply_upper: return fmt::format("(<= {} {})", v("ts"), smt_real(kMaxSupplyF));
      case K::cover_co2: {
        const auto k = fmt::format("(* {} {})", v("v"), smt_real(dt / z.volume_ft3));
        const auto x = fmt::format("(+ (* (- 1.0 {}) {}) (* {} {}) (* {} {}))", k, smt_real(f.indoor_co2[e]), k,
                                   v("cm"), occ(s, j), smt_real(z.co2_per_person_cfm * dt / z.volume_ft3 / units::kPpm));
        return fmt::format("(= {} {})", v("cco2"), floor_at(x, v("cm")));
      }
      case K::cover_temp:
        return fmt::format("(ite (> {0} 0.0) (= (* {0} {1} (- {2} {3})) (* {4} {5})) (= {2} {6}))", v("m"),
                           heat_capacity(s, j), v("ctemp"), v("ts"), smt_real(units::kFahrenheitPerKelvin), v("load"),
                           smt_real(f.indoor_temp[e]));
      case K::supply_humidity:
        return fmt::format("(= {} {})", v("ws"), by_delta(s, j, [](const ZoneDecision& d) { return d.supply_humidity_ratio; }));
      case K::mixed_enthalpy: return fmt::format("(= {} {})", v("hm"), enthalpy(v("tm"), v("wm")));
      case K::supply_enthalpy: return fmt::format("(= {} {})", v("hs"), enthalpy(v("ts"), v("ws")));
      case K::condensate:
        return fmt::format("(= {0} (ite (> {1} {2}) (* {3} (- {1} {2})) 0.0))", v("mcnd"), v("wm"), v("ws"), v("m"));
      case K::coil: {
        const auto x = fmt::format("(+ (* {} (- {} {})) (* {} (* {} {})))", v("m"), v("hs"), v("hm"), v("mcnd"),
                                   smt_real(p_.config.water_specific_heat), celsius(v("ts")));
        return fmt::format("(= {} {})", v("coil"), abs_of(x));
      }
      case K::coil_water_temp:
        return fmt::format("(= {} (+ {} (* (/ {} (* {} {})) {})))", v("tcl"), smt_real(p_.config.coil_setpoint_f),
                           v("coil"), smt_real(p_.config.coil_mass_flow_kg_s), smt_real(p_.config.water_specific_heat),
                           smt_real(units::kFahrenheitPerKelvin));
      case K::chiller:
        return fmt::format("(= {} (/ (* {} {} (- {} {})) {}))", v("chil"), smt_real(p_.config.coil_mass_flow_kg_s),
                           smt_real(p_.config.water_specific_heat), v("tcl"), smt_real(p_.config.coil_setpoint_f),
                           smt_real(units::kFahrenheitPerKelvin));
      case K::occupancy_lower: {
        std::string expr = fmt::format("(>= (+ {} {}) 0)", f.occupancy[e], smt_delta_name(s, j));
        if (const auto* t = table(s, j)) {
          std::vector<std::string> parts{expr};
          for (const auto& r : t->rows)
            if (!r.feasible) parts.push_back(fmt::format("(not (= {} {}))", smt_delta_name(s, j), r.delta));
          if (parts.size() > 1) expr = fmt::format("(and {})", fmt::join(parts, " "));
        }
        return expr;
      }
      case K::occupancy_upper:
        return fmt::format("(<= (+ {} {}) {})", f.occupancy[e], smt_delta_name(s, j), z.capacity);
      case K::co2_forgery:
        return fmt::format("(= {} (* (to_real {}) {}))", v("dci"), smt_delta_name(s, j),
                           smt_real(z.co2_per_person_cfm * dt / z.volume_ft3 / units::kPpm));
      case K::temp_forgery:
        return fmt::format("(ite (> {0} 0.0) (= (* {0} {1} {2}) (* {3} (to_real {4}) {5})) (= {2} 0.0))", v("m"),
                           heat_capacity(s, j), v("dti"), smt_real(units::kFahrenheitPerKelvin), smt_delta_name(s, j),
                           smt_real(z.heat_per_person_kw));
      default: break;
    }
    throw std::logic_error("constraint kind not valid for a zone");
  }

  // Physical reading at the end of the slot: true occupancy, attacked decision.
  std::pair<std::string, std::string> physical(std::size_t s, std::size_t j) const {
    const auto& sp = p_.slots[s];
    const auto& z = p_.config.zones[j];
    const auto& f = sp.frame;
    const double dt = f.interval_minutes;
    const int o = f.occupancy[static_cast<Eigen::Index>(j)];
    const auto k = fmt::format("(* {} {})", var(s, j, "v"), smt_real(dt / z.volume_ft3));
    const auto co2 = floor_at(
        fmt::format("(+ (* (- 1.0 {}) {}) (* {} {}) {})", k, smt_real(sp.physical_start[j].co2_ppm), k,
                    var(s, j, "cm"), smt_real(o * (z.co2_per_person_cfm * dt / z.volume_ft3 / units::kPpm))),
        var(s, j, "cm"));
    const auto load = fmt::format("(+ {} (* {} {}))", smt_real(z.thermal_load_kw), smt_real(o), smt_real(z.heat_per_person_kw));
    const auto temp = fmt::format("(ite (> {0} 0.0) (+ {1} (/ (* {2} {3}) (* {0} {4}))) {5})", var(s, j, "m"),
                                  var(s, j, "ts"), smt_real(units::kFahrenheitPerKelvin), load, heat_capacity(s, j),
                                  smt_real(sp.physical_start[j].temp_f));
    return {co2, temp};
  }

  std::string slot_energy(std::size_t s) const {
    std::vector<std::string> terms;
    for (std::size_t j = 0; j < p_.config.zone_count(); ++j) {
      terms.push_back(var(s, j, "coil"));
      terms.push_back(var(s, j, "chil"));
    }
    return fmt::format("(= {} (* {} (+ {})))", energy_name(s), smt_real(p_.slots[s].frame.interval_minutes / 60.0),
                       fmt::join(terms, " "));
  }

  std::string coupling(const Constraint& c) const {
    using K = ConstraintKind;
    const std::size_t s = c.slot;
    const auto& sp = p_.slots[s];
    switch (c.kind) {
      case K::zero_sum: {
        std::vector<std::string> ds;
        for (const auto& t : sp.tables) ds.push_back(smt_delta_name(s, t.zone));
        if (ds.size() == 1) return fmt::format("(= {} 0)", ds.front());
        return fmt::format("(= (+ {}) 0)", fmt::join(ds, " "));
      }
      case K::slot_energy: return slot_energy(s);
      case K::goal: {
        if (const auto* e = std::get_if<EnergyIncrease>(&p_.goal)) {
          if (e->scope == GoalScope::per_timeslot)
            return fmt::format("(> (- s{0}_energy s{0}_honest) {1})", s, smt_real(sp.threshold_kwh));
          std::vector<std::string> es, hs;
          for (std::size_t k = 0; k < p_.slots.size(); ++k) {
            es.push_back(fmt::format("s{}_energy", k));
            hs.push_back(fmt::format("s{}_honest", k));
          }
          return fmt::format("(> (- (+ {} 0.0) (+ {} 0.0)) {})", fmt::join(es, " "), fmt::join(hs, " "),
                             smt_real(p_.horizon_threshold_kwh));
        }
        const auto& g = std::get<ComfortDisruption>(p_.goal);
        std::vector<std::string> parts;
        for (auto j : g.targets) {
          const auto& z = p_.config.zones[j];
          const auto [co2, temp] = physical(s, j);
          baseline_ = true;
          const auto [hco2, htemp] = physical(s, j);
          baseline_ = false;
          auto co2_dev = [&](const std::string& x) {
            const auto d = fmt::format("(- {} {})", x, smt_real(z.co2_setpoint_ppm));
            return g.co2_excess_only ? pos_of(d) : abs_of(d);
          };
          auto temp_dev = [&](const std::string& x) {
            return abs_of(fmt::format("(- {} {})", x, smt_real(z.temp_setpoint_f)));
          };
          if (g.co2_deviation_ppm)
            parts.push_back(fmt::format("(> (- {} {}) {})", co2_dev(co2), co2_dev(hco2), smt_real(*g.co2_deviation_ppm)));
          if (g.temp_deviation_f)
            parts.push_back(
                fmt::format("(> (- {} {}) {})", temp_dev(temp), temp_dev(htemp), smt_real(*g.temp_deviation_f)));
        }
        return parts.size() == 1 ? parts.front() : fmt::format("(and {})", fmt::join(parts, " "));
      }
      default: break;
    }
    throw std::logic_error("constraint kind not valid for coupling");
  }

  const ConstraintProblem& p_;
  mutable bool baseline_ = false;
};

}  // namespace

std::string smt_real(double value) {
  if (!std::isfinite(value)) throw DomainError("cannot write a non-finite constant");
  if (value == 0.0) return "0.0";
  const bool negative = value < 0;
  int exp = 0;
  const double frac = std::frexp(std::abs(value), &exp);
  auto mantissa = static_cast<std::uint64_t>(std::ldexp(frac, 53));
  exp -= 53;
  while ((mantissa & 1u) == 0 && exp < 0) {
    mantissa >>= 1;
    ++exp;
  }
  std::string body = exp >= 0 ? multiply_by_power_of_two(mantissa, exp) + ".0"
                              : fmt::format("(/ {}.0 {}.0)", mantissa, power_of_two(-exp));
  return negative ? "(- " + body + ")" : body;
}

std::string smt_delta_name(std::size_t slot, std::size_t zone) { return fmt::format("s{}z{}_d", slot, zone); }

std::string emit_smtlib(const ConstraintProblem& problem) { return Emitter(problem).run(); }

std::optional<std::string> find_smt_solver() {
  if (const char* env = std::getenv("BIOTA_SMT_SOLVER"); env && *env) return std::string(env);
  const char* path = std::getenv("PATH");
  if (!path) return std::nullopt;
  for (const char* name : {"z3", "cvc5"}) {
    std::stringstream ss(path);
    std::string dir;
    while (std::getline(ss, dir, ':')) {
      if (dir.empty()) continue;
      const auto candidate = std::filesystem::path(dir) / name;
      std::error_code ec;
      if (std::filesystem::is_regular_file(candidate, ec)) return candidate.string();
    }
  }
  return std::nullopt;
}

SolverRun run_smt_solver(const std::string& solver, const std::string& script, std::chrono::seconds timeout) {
  static std::atomic<unsigned> counter{0};
  const auto dir = std::filesystem::temp_directory_path();
  const auto file = dir / fmt::format("biota_{}_{}.smt2", static_cast<long>(::getpid()), counter.fetch_add(1));
  {
    std::ofstream out(file);
    out << script;
  }
  const std::string cmd = fmt::format("timeout {} '{}' '{}' 2>&1", timeout.count(), solver, file.string());
  SolverRun run;
  if (FILE* pipe = ::popen(cmd.c_str(), "r")) {
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) run.output.append(buf.data(), n);
    ::pclose(pipe);
  }
  std::filesystem::remove(file);

  std::istringstream lines(run.output);
  std::string first;
  while (std::getline(lines, first) && first.empty()) {
  }
  if (first == "sat" || first == "unsat" || first == "unknown")
    run.verdict = first;
  else
    run.verdict = "error";
  if (run.verdict == "sat") {
    static const std::regex def(R"(\(define-fun\s+(\S+)\s+\(\)\s+Int\s+(\(-\s*(\d+)\)|(\d+))\s*\))");
    for (std::sregex_iterator it(run.output.begin(), run.output.end(), def), end; it != end; ++it) {
      const auto& m = *it;
      const long v = m[3].matched ? -std::stol(m[3].str()) : std::stol(m[4].str());
      run.int_model[m[1].str()] = v;
    }
  }
  return run;
}

Eigen::VectorXi deltas_from_model(const ConstraintProblem& problem, std::size_t slot, const SolverRun& run) {
  Eigen::VectorXi d = Eigen::VectorXi::Zero(static_cast<Eigen::Index>(problem.config.zone_count()));
  for (const auto& t : problem.slots.at(slot).tables) {
    const auto it = run.int_model.find(smt_delta_name(slot, t.zone));
    if (it != run.int_model.end()) d[static_cast<Eigen::Index>(t.zone)] = static_cast<int>(it->second);
  }
  return d;
}

}  // namespace biota
