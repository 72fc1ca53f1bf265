#include "biota/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "biota/campaign.hpp"
#include "biota/config_io.hpp"
#include "biota/errors.hpp"
#include "biota/generator.hpp"
#include "biota/report.hpp"
#include "biota/smtlib.hpp"

namespace biota {

namespace {

struct Common {
  std::string config;
  std::string trace;
  std::string weather;
  std::string out;
  std::optional<std::uint64_t> seed;
  unsigned workers = 0;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("BIOTA_SEED")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string_view(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError(fmt::format("BIOTA_SEED='{}' is not an unsigned integer", env));
  }
  return 0;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError(fmt::format("cannot write '{}'", path));
  f << text;
  if (!f) throw UsageError(fmt::format("failed writing '{}'", path));
}

template <class Fn>
void emit(const std::string& path, std::ostream& fallback, Fn&& write) {
  std::ostringstream buf;
  write(buf);
  if (path.empty() || path == "-")
    fallback << buf.str();
  else
    write_file(path, buf.str());
}

// Trace on the controller grid, gaps filled from its own hourly fit.
OccupancyTrace prepared_trace(const BuildingConfig& config, const std::string& path, std::uint64_t seed) {
  auto trace = load_trace(path);
  const auto grid = std::chrono::seconds(static_cast<long long>(config.interval_minutes * 60.0));
  if (trace.interval != grid) trace = resample(trace, grid);
  trace = align_to_config(trace, config);
  if (trace.missing()) trace = impute(trace, fit_hourly_model(trace, capacities_for(config, trace.zones)), seed);
  return trace;
}

std::optional<WeatherSeries> prepared_weather(const std::string& path, std::uint64_t seed) {
  if (path.empty()) return std::nullopt;
  return impute_weather(load_weather(path), seed);
}

AccessSet parse_access(const BuildingConfig& config, const std::string& text) {
  if (text.empty()) return AccessSet(config.zone_count());
  return AccessSet::of(config, split_list(text));
}

SearchBudget budget_of(std::uint64_t nodes, double seconds) {
  return {nodes, std::chrono::duration<double>(seconds)};
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attack analytics for demand-controlled HVAC", "biota"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(BIOTA_VERSION));

  Common c;
  auto add_common = [&](CLI::App* sub, bool trace_required) {
    sub->add_option("--config", c.config, "building config JSON")->required()->check(CLI::ExistingFile);
    auto* t = sub->add_option("--trace", c.trace, "occupancy CSV")->check(CLI::ExistingFile);
    if (trace_required) t->required();
    sub->add_option("--weather", c.weather, "outdoor weather CSV")->check(CLI::ExistingFile);
    sub->add_option("--out", c.out, "output path ('-' for stdout)");
    sub->add_option("--seed", c.seed, "seed for imputation and sampling (falls back to BIOTA_SEED)");
    sub->add_option("--workers", c.workers, "worker threads (0 = all cores)");
  };

  auto* simulate = app.add_subcommand("simulate", "honest replay, per-zone cost CSV");
  add_common(simulate, true);

  std::string goal_text, access_text, frame_path, report_path, smt_out, smt_emit_out = "-", mode = "first";
  std::uint64_t max_nodes = 0;
  double time_limit = 0.0;
  auto* attack = app.add_subcommand("attack", "synthesize attack vectors for a frame or a whole trace");
  add_common(attack, false);
  attack->add_option("--goal", goal_text, "energy:5% | energy:2kwh | comfort:co2=300,temp=4@zone,...")->required();
  attack->add_option("--access", access_text, "comma-separated zones, or 'all'")->required();
  attack->add_option("--frame", frame_path, "single sensor frame JSON")->check(CLI::ExistingFile);
  attack->add_option("--report", report_path, "per-timeslot CSV (trace mode)");
  attack->add_option("--smt-out", smt_out, "also write the SMT-LIB2 script (frame mode)");
  attack->add_option("--mode", mode, "first: lexicographically first vector; max: strongest")
      ->check(CLI::IsMember({"first", "max"}));
  attack->add_option("--max-nodes", max_nodes, "search node budget per slot");
  attack->add_option("--time-limit", time_limit, "search seconds per slot");

  std::size_t max_size = 0;
  std::vector<std::string> subset_texts;
  auto* sweep = app.add_subcommand("sweep", "energy increase per access subset");
  add_common(sweep, true);
  std::string sweep_goal = "energy:0kwh";
  sweep->add_option("--goal", sweep_goal, "per-timeslot energy goal")->capture_default_str();
  sweep->add_option("--max-size", max_size, "largest subset size (default: all zones)");
  sweep->add_option("--subset", subset_texts, "explicit subset, comma-separated; repeatable");

  double co2_threshold = 1000.0, temp_threshold = 4.0;
  auto* discomfort = app.add_subcommand("discomfort", "fraction of occupied time beyond comfort thresholds");
  add_common(discomfort, true);
  std::string discomfort_goal = "comfort:co2=0", discomfort_access = "all";
  discomfort->add_option("--goal", discomfort_goal, "attack goal")->capture_default_str();
  discomfort->add_option("--access", discomfort_access, "comma-separated zones, or 'all'")->capture_default_str();
  discomfort->add_option("--co2-threshold", co2_threshold, "ppm");
  discomfort->add_option("--temp-threshold", temp_threshold, "degrees F from setpoint");

  std::vector<std::size_t> factors{1, 2, 3};
  double timeout = 60.0;
  std::size_t samples = 5;
  auto* bench = app.add_subcommand("bench", "synthesis time versus zone count");
  add_common(bench, true);
  bench->add_option("--factors", factors, "replication factors")->delimiter(',');
  bench->add_option("--timeout", timeout, "seconds per synthesis");
  bench->add_option("--samples", samples, "frames drawn per size");

  auto* emit_smt = app.add_subcommand("emit-smt", "write the SMT-LIB2 encoding of one frame");
  emit_smt->add_option("--config", c.config, "building config JSON")->required()->check(CLI::ExistingFile);
  emit_smt->add_option("--frame", frame_path, "sensor frame JSON")->required()->check(CLI::ExistingFile);
  emit_smt->add_option("--goal", goal_text, "attack goal")->required();
  emit_smt->add_option("--access", access_text, "comma-separated zones, or 'all'")->required();
  emit_smt->add_option("--smt-out", smt_emit_out, "output path ('-' for stdout)")->capture_default_str();

  std::string profile, weather_out;
  int days = 7;
  double missing = 0.03;
  auto* generate = app.add_subcommand("generate", "synthetic occupancy and weather fixtures");
  generate->add_option("--profile", profile, "cod or kth")->required()->check(CLI::IsMember({"cod", "kth"}));
  generate->add_option("--days", days, "length in days");
  generate->add_option("--missing", missing, "fraction of cells left empty");
  generate->add_option("--out", c.out, "occupancy CSV path")->required();
  generate->add_option("--weather-out", weather_out, "weather CSV path");
  generate->add_option("--seed", c.seed, "generator seed (falls back to BIOTA_SEED)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    if (e.get_exit_code() != 0) err << app.help();
    return e.get_exit_code() == 0 ? 0 : 1;
  }

  try {
    const auto seed = resolve_seed(c.seed);
    if (*generate) {
      GeneratorOptions g;
      g.start = parse_timestamp("2021-03-01T00:00:00");
      g.days = days;
      g.missing_fraction = missing;
      g.seed = seed;
      const auto trace = generate_occupancy(profile == "cod" ? cod_occupancy_profile() : kth_occupancy_profile(), g);
      emit(c.out, out, [&](std::ostream& o) { write_trace(o, trace); });
      if (!weather_out.empty()) {
        const auto w = generate_weather(profile == "cod" ? cod_weather_profile() : kth_weather_profile(), g);
        emit(weather_out, out, [&](std::ostream& o) { write_weather(o, w); });
      }
      return 0;
    }

    const auto config = load_config(c.config);

    if (*emit_smt) {
      const auto frame = load_frame(frame_path, config);
      const auto problem = encode(config, {frame}, parse_goal(goal_text, config), parse_access(config, access_text));
      emit(smt_emit_out, out, [&](std::ostream& o) { o << emit_smtlib(problem); });
      return 0;
    }

    CampaignOptions opts;
    opts.seed = seed;
    opts.workers = c.workers;

    if (*simulate) {
      const auto trace = prepared_trace(config, c.trace, seed);
      const auto weather = prepared_weather(c.weather, seed);
      const auto frames = honest_timeline(config, trace, weather ? &*weather : nullptr);
      std::vector<TimeslotCost> slots;
      for (const auto& f : frames) slots.push_back(decision_cost(config, control_step(config, f), f.interval_minutes));
      const auto cost = total_cost(std::move(slots), config.electricity_rate);
      emit(c.out, out, [&](std::ostream& o) {
        o << "# digest=" << config_digest(config, seed, "simulate") << '\n';
        write_cost_csv(o, config, cost);
      });
      err << fmt::format("{} slots, {:.3f} kWh, {:.2f} {}\n", frames.size(), cost.total_energy_kwh,
                         cost.total_currency, config.currency);
      return 0;
    }

    if (*attack) {
      const auto goal = parse_goal(goal_text, config);
      const auto access = parse_access(config, access_text);
      const auto budget = budget_of(max_nodes, time_limit);
      if (!frame_path.empty()) {
        const auto frame = load_frame(frame_path, config);
        const auto problem = encode(config, {frame}, goal, access);
        if (!smt_out.empty()) emit(smt_out, out, [&](std::ostream& o) { o << emit_smtlib(problem); });
        const auto digest = config_digest(config, seed, fmt::format("{}|{}|{}", goal_text, access_text, mode));
        std::optional<AttackVector> vec;
        std::string verdict;
        if (mode == "first") {
          auto r = synthesize(problem, budget);
          verdict = verdict_name(r.verdict);
          vec = std::move(r.vector);
        } else {
          try {
            vec = maximize_impact(problem, {true, budget, nullptr});
            verdict = "sat";
          } catch (const InfeasibleError&) {
            verdict = "unsat";
          }
        }
        out << verdict << '\n';
        if (vec) emit(c.out, out, [&](std::ostream& o) { o << vector_json(config, *vec, digest); });
        return 0;
      }
      if (c.trace.empty()) throw UsageError("attack needs --frame or --trace");
      opts.budget = budget;
      const auto trace = prepared_trace(config, c.trace, seed);
      const auto weather = prepared_weather(c.weather, seed);
      const auto report = run_timeline(config, trace, weather ? &*weather : nullptr, goal, access, opts);
      emit(c.out, out, [&](std::ostream& o) { o << campaign_json(config, report); });
      if (!report_path.empty()) emit(report_path, out, [&](std::ostream& o) { write_campaign_csv(o, config, report); });
      err << fmt::format("{} of {} slots SAT, +{:.3f} kWh\n", report.sat_count(), report.slots.size(),
                         report.energy_increase_kwh());
      return 0;
    }

    if (*sweep) {
      const auto goal = parse_goal(sweep_goal, config);
      const auto* energy = std::get_if<EnergyIncrease>(&goal);
      if (!energy) throw UsageError("sweep needs an energy goal");
      std::vector<std::vector<std::string>> subsets;
      for (const auto& s : subset_texts) subsets.push_back(split_list(s));
      const auto trace = prepared_trace(config, c.trace, seed);
      const auto weather = prepared_weather(c.weather, seed);
      const auto frames = honest_timeline(config, trace, weather ? &*weather : nullptr);
      const auto result = sweep_access_subsets(config, frames, *energy, max_size ? max_size : config.zone_count(),
                                               subsets, opts);
      emit(c.out, out, [&](std::ostream& o) { write_sweep_csv(o, result, config.currency); });
      return 0;
    }

    if (*discomfort) {
      const auto goal = parse_goal(discomfort_goal, config);
      const auto trace = prepared_trace(config, c.trace, seed);
      const auto weather = prepared_weather(c.weather, seed);
      const auto report =
          run_timeline(config, trace, weather ? &*weather : nullptr, goal, parse_access(config, discomfort_access), opts);
      const auto rows = discomfort_metrics(config, report, co2_threshold, temp_threshold);
      emit(c.out, out, [&](std::ostream& o) { write_discomfort_csv(o, rows, report.digest); });
      return 0;
    }

    if (*bench) {
      const auto trace = prepared_trace(config, c.trace, seed);
      const auto model = fit_hourly_model(trace, capacities_for(config, trace.zones));
      const auto rows = scalability_bench(config, model, factors, std::chrono::duration<double>(timeout), seed, samples);
      emit(c.out, out, [&](std::ostream& o) {
        write_bench_csv(o, rows, config_digest(config, seed, fmt::format("bench {}", fmt::join(factors, ","))));
      });
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

}  // namespace biota
