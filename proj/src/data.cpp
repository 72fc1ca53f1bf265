#include "biota/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "biota/errors.hpp"
#include "biota/psychro.hpp"

namespace biota {

namespace {

using namespace std::chrono;

std::string strip(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

std::vector<std::string> fields_of(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(strip(std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

int parse_int(std::string_view s, std::size_t line, std::string_view what) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ParseError(fmt::format("{} '{}' is not an integer", what, s), line);
  return v;
}

double parse_double(std::string_view s, std::size_t line, std::string_view what) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
    throw ParseError(fmt::format("{} '{}' is not a number", what, s), line);
  return v;
}

std::map<std::string, std::size_t> header_columns(std::istream& in, const std::vector<std::string>& required,
                                                  std::vector<std::string>& names) {
  std::string line;
  if (!read_line(in, line)) throw SchemaError("missing CSV header");
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  names = fields_of(line);
  std::map<std::string, std::size_t> cols;
  for (std::size_t i = 0; i < names.size(); ++i) cols[names[i]] = i;
  for (const auto& r : required)
    if (!cols.count(r)) throw SchemaError(fmt::format("missing column '{}'", r));
  return cols;
}

seconds gcd_interval(const std::vector<std::vector<TimePoint>>& series, std::optional<seconds> declared) {
  if (declared) {
    if (declared->count() <= 0) throw IntervalError("interval must be positive");
    return *declared;
  }
  long long g = 0;
  for (const auto& ts : series)
    for (std::size_t k = 1; k < ts.size(); ++k) g = std::gcd(g, static_cast<long long>((ts[k] - ts[k - 1]).count()));
  return g > 0 ? seconds(g) : seconds(600);
}

std::uint64_t cell_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

double draw_normal(std::uint64_t seed, double mean, double sd) {
  if (!(sd > 0)) return mean;
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> dist(mean, sd);
  return dist(eng);
}

HourlyStats stats_of(const std::vector<double>& xs) {
  HourlyStats s;
  s.count = xs.size();
  if (xs.empty()) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() >= 2) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

// Hour-of-day statistics with the sparse-bucket rule shared by occupancy and weather.
std::array<HourlyStats, 24> hourly(const std::array<std::vector<double>, 24>& buckets, const HourlyStats& overall) {
  std::array<HourlyStats, 24> out;
  for (int h = 0; h < 24; ++h) {
    if (buckets[h].size() >= 2) {
      out[h] = stats_of(buckets[h]);
    } else {
      out[h] = overall;
      out[h].count = buckets[h].size();
      out[h].borrowed = true;
    }
  }
  return out;
}

}  // namespace

TimePoint parse_timestamp(std::string_view text) {
  auto bad = [&] { return ParseError(fmt::format("bad timestamp '{}'", text)); };
  std::string s = strip(text);
  if (!s.empty() && (s.back() == 'Z' || s.back() == 'z')) s.pop_back();
  if (s.size() > 6 && (s.ends_with("+00:00") || s.ends_with("-00:00"))) s.resize(s.size() - 6);
  if (s.size() != 16 && s.size() != 19) throw bad();
  if (s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':') throw bad();
  if (s.size() == 19 && s[16] != ':') throw bad();
  auto num = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, v);
    if (ec != std::errc{} || ptr != s.data() + pos + len) throw bad();
    return v;
  };
  const int y = num(0, 4), mo = num(5, 2), d = num(8, 2), h = num(11, 2), mi = num(14, 2);
  const int sec = s.size() == 19 ? num(17, 2) : 0;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 59) throw bad();
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec};
}

std::string format_timestamp(TimePoint t) {
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  const hh_mm_ss hms{t - day_point};
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), hms.hours().count(),
                     hms.minutes().count(), hms.seconds().count());
}

int hour_of_day(TimePoint t) {
  const auto since = t - floor<days>(t);
  return static_cast<int>(duration_cast<hours>(since).count());
}

std::size_t OccupancyTrace::missing() const { return static_cast<std::size_t>((!present.array()).count()); }

std::size_t OccupancyTrace::zone_index(std::string_view name) const {
  for (std::size_t j = 0; j < zones.size(); ++j)
    if (zones[j] == name) return j;
  throw SchemaError(fmt::format("trace has no zone '{}'", name));
}

OccupancyTrace parse_trace(std::istream& in, const TraceSchema& schema) {
  std::vector<std::string> names;
  const auto cols = header_columns(in, {"timestamp", "zone", "occupancy"}, names);
  const auto c_time = cols.at("timestamp"), c_zone = cols.at("zone"), c_occ = cols.at("occupancy");

  struct Row {
    std::size_t line;
    TimePoint t;
    std::size_t zone;
    std::optional<int> occupancy;
  };
  std::vector<Row> rows;
  std::vector<std::string> zones = schema.zones;
  std::vector<std::string> errors;
  std::size_t first_error_line = 0;
  auto note = [&](const ParseError& e) {
    if (errors.empty()) first_error_line = e.line();
    if (errors.size() < 20) errors.push_back(e.what());
  };

  std::string line;
  std::size_t lineno = 1;
  while (read_line(in, line)) {
    ++lineno;
    if (strip(line).empty()) continue;
    try {
      const auto f = fields_of(line);
      if (f.size() != names.size())
        throw ParseError(fmt::format("expected {} fields, found {}", names.size(), f.size()), lineno);
      Row r{lineno, {}, 0, std::nullopt};
      try {
        r.t = parse_timestamp(f[c_time]);
      } catch (const ParseError& e) {
        throw ParseError(e.what(), lineno);
      }
      if (f[c_zone].empty()) throw ParseError("empty zone id", lineno);
      auto it = std::find(zones.begin(), zones.end(), f[c_zone]);
      if (it == zones.end()) {
        if (!schema.zones.empty()) throw ParseError(fmt::format("zone '{}' not in schema", f[c_zone]), lineno);
        zones.push_back(f[c_zone]);
        it = zones.end() - 1;
      }
      r.zone = static_cast<std::size_t>(it - zones.begin());
      if (!f[c_occ].empty()) {
        const int o = parse_int(f[c_occ], lineno, "occupancy");
        if (o < 0) throw ParseError(fmt::format("occupancy {} is negative", o), lineno);
        r.occupancy = o;
      }
      rows.push_back(r);
    } catch (const ParseError& e) {
      note(e);
    }
  }

  // Rows may come in any order; each zone's stamps are sorted before gaps are read.
  std::vector<std::vector<std::pair<TimePoint, std::size_t>>> stamped(zones.size());
  for (const auto& r : rows) stamped[r.zone].emplace_back(r.t, r.line);
  std::vector<std::vector<TimePoint>> per_zone(zones.size());
  for (std::size_t z = 0; z < zones.size(); ++z) {
    auto& v = stamped[z];
    std::sort(v.begin(), v.end());
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (k > 0 && v[k].first == v[k - 1].first)
        note(ParseError(fmt::format("duplicate timestamp for zone '{}' (also on line {})", zones[z], v[k - 1].second),
                        v[k].second));
      else
        per_zone[z].push_back(v[k].first);
    }
  }
  if (!errors.empty()) {
    std::string msg = errors.front();
    for (std::size_t k = 1; k < errors.size(); ++k) msg += "; " + errors[k];
    throw ParseError(msg, first_error_line);
  }

  OccupancyTrace t;
  t.zones = zones;
  t.interval = gcd_interval(per_zone, schema.interval);
  if (rows.empty()) {
    t.occupancy.resize(0, static_cast<Eigen::Index>(zones.size()));
    t.present.resize(0, static_cast<Eigen::Index>(zones.size()));
    return t;
  }
  TimePoint lo = rows.front().t, hi = rows.front().t;
  for (const auto& r : rows) {
    lo = std::min(lo, r.t);
    hi = std::max(hi, r.t);
  }
  t.start = lo;
  const auto n = static_cast<Eigen::Index>((hi - lo) / t.interval + 1);
  t.occupancy = Eigen::MatrixXi::Zero(n, static_cast<Eigen::Index>(zones.size()));
  t.present = MaskMatrix::Constant(n, static_cast<Eigen::Index>(zones.size()), false);
  for (const auto& r : rows) {
    if ((r.t - lo) % t.interval != seconds(0))
      throw ParseError(fmt::format("timestamp off the {}-second grid", t.interval.count()), r.line);
    const auto slot = static_cast<Eigen::Index>((r.t - lo) / t.interval);
    const auto z = static_cast<Eigen::Index>(r.zone);
    if (r.occupancy) {
      t.occupancy(slot, z) = *r.occupancy;
      t.present(slot, z) = true;
    }
  }
  return t;
}

OccupancyTrace load_trace(const std::filesystem::path& path, const TraceSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open '{}'", path.string()));
  return parse_trace(in, schema);
}

void write_trace(std::ostream& out, const OccupancyTrace& t) {
  out << "timestamp,zone,occupancy\n";
  for (Eigen::Index s = 0; s < t.slot_count(); ++s) {
    const auto stamp = format_timestamp(t.time_of(s));
    for (Eigen::Index z = 0; z < static_cast<Eigen::Index>(t.zones.size()); ++z) {
      out << stamp << ',' << t.zones[static_cast<std::size_t>(z)] << ',';
      if (t.present(s, z)) out << t.occupancy(s, z);
      out << '\n';
    }
  }
}

std::vector<int> capacities_for(const BuildingConfig& config, const std::vector<std::string>& zones) {
  std::vector<int> caps;
  for (const auto& z : zones) caps.push_back(config.zones[config.zone_index(z)].capacity);
  return caps;
}

HourlyOccupancyModel fit_hourly_model(const OccupancyTrace& trace, const std::vector<int>& capacities) {
  if (trace.slot_count() == 0 || trace.zones.empty()) throw EmptyTraceError("cannot fit a model to an empty trace");
  if (!capacities.empty() && capacities.size() != trace.zones.size())
    throw SchemaError("one capacity per trace zone is required");
  HourlyOccupancyModel m;
  m.zones = trace.zones;
  for (std::size_t j = 0; j < trace.zones.size(); ++j) {
    const auto z = static_cast<Eigen::Index>(j);
    std::array<std::vector<double>, 24> buckets;
    std::vector<double> all;
    int largest = 0;
    for (Eigen::Index s = 0; s < trace.slot_count(); ++s) {
      if (!trace.present(s, z)) continue;
      const double v = trace.occupancy(s, z);
      buckets[static_cast<std::size_t>(hour_of_day(trace.time_of(s)))].push_back(v);
      all.push_back(v);
      largest = std::max(largest, trace.occupancy(s, z));
    }
    if (all.empty()) throw EmptyTraceError(fmt::format("zone '{}' has no observations", trace.zones[j]));
    const auto overall = stats_of(all);
    m.overall.push_back(overall);
    m.hours.push_back(hourly(buckets, overall));
    m.capacities.push_back(capacities.empty() ? std::max(1, largest) : capacities[j]);
  }
  return m;
}

std::string HourlyOccupancyModel::to_json() const {
  nlohmann::json j;
  j["zones"] = nlohmann::json::array();
  for (std::size_t z = 0; z < zones.size(); ++z) {
    nlohmann::json hrs = nlohmann::json::array();
    for (const auto& h : hours[z])
      hrs.push_back({{"mean", h.mean}, {"std", h.std}, {"count", h.count}, {"borrowed", h.borrowed}});
    j["zones"].push_back({{"name", zones[z]},
                          {"capacity", capacities[z]},
                          {"overall", {{"mean", overall[z].mean}, {"std", overall[z].std}, {"count", overall[z].count}}},
                          {"hours", hrs}});
  }
  return j.dump(2);
}

HourlyOccupancyModel HourlyOccupancyModel::from_json(std::string_view text) {
  HourlyOccupancyModel m;
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto& z : j.at("zones")) {
      m.zones.push_back(z.at("name").get<std::string>());
      m.capacities.push_back(z.at("capacity").get<int>());
      HourlyStats o;
      o.mean = z.at("overall").at("mean").get<double>();
      o.std = z.at("overall").at("std").get<double>();
      o.count = z.at("overall").at("count").get<std::size_t>();
      m.overall.push_back(o);
      std::array<HourlyStats, 24> hrs;
      if (z.at("hours").size() != 24) throw SchemaError("model needs 24 hourly buckets per zone");
      for (std::size_t h = 0; h < 24; ++h) {
        const auto& b = z.at("hours")[h];
        hrs[h] = {b.at("mean").get<double>(), b.at("std").get<double>(), b.at("count").get<std::size_t>(),
                  b.at("borrowed").get<bool>()};
      }
      m.hours.push_back(hrs);
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(fmt::format("bad occupancy model: {}", e.what()));
  }
  return m;
}

OccupancyTrace impute(const OccupancyTrace& trace, const HourlyOccupancyModel& model, std::uint64_t seed) {
  OccupancyTrace out = trace;
  for (std::size_t j = 0; j < trace.zones.size(); ++j) {
    const auto it = std::find(model.zones.begin(), model.zones.end(), trace.zones[j]);
    if (it == model.zones.end()) throw SchemaError(fmt::format("model has no zone '{}'", trace.zones[j]));
    const auto mz = static_cast<std::size_t>(it - model.zones.begin());
    const auto z = static_cast<Eigen::Index>(j);
    const double cap = model.capacities[mz];
    for (Eigen::Index s = 0; s < trace.slot_count(); ++s) {
      if (trace.present(s, z)) continue;
      const auto& st = model.hours[mz][static_cast<std::size_t>(hour_of_day(trace.time_of(s)))];
      const double x = draw_normal(cell_seed(seed, j, static_cast<std::uint64_t>(s)), st.mean, st.std);
      out.occupancy(s, z) = static_cast<int>(std::lround(std::clamp(x, 0.0, cap)));
      out.present(s, z) = true;
    }
  }
  return out;
}

OccupancyTrace resample(const OccupancyTrace& trace, seconds interval) {
  if (interval.count() <= 0) throw IntervalError("target interval must be positive");
  if (interval == trace.interval) return trace;
  OccupancyTrace out;
  out.zones = trace.zones;
  out.start = trace.start;
  out.interval = interval;
  const auto n = trace.slot_count();
  const auto zc = static_cast<Eigen::Index>(trace.zones.size());
  if (interval > trace.interval && interval % trace.interval == seconds(0)) {
    const auto k = static_cast<Eigen::Index>(interval / trace.interval);
    const Eigen::Index m = (n + k - 1) / k;
    out.occupancy = Eigen::MatrixXi::Zero(m, zc);
    out.present = MaskMatrix::Constant(m, zc, false);
    for (Eigen::Index b = 0; b < m; ++b)
      for (Eigen::Index z = 0; z < zc; ++z)
        for (Eigen::Index s = std::min(n, (b + 1) * k) - 1; s >= b * k; --s)
          if (trace.present(s, z)) {
            out.occupancy(b, z) = trace.occupancy(s, z);
            out.present(b, z) = true;
            break;
          }
    return out;
  }
  if (interval < trace.interval && trace.interval % interval == seconds(0)) {
    const auto k = static_cast<Eigen::Index>(trace.interval / interval);
    out.occupancy.resize(n * k, zc);
    out.present.resize(n * k, zc);
    for (Eigen::Index s = 0; s < n * k; ++s) {
      out.occupancy.row(s) = trace.occupancy.row(s / k);
      out.present.row(s) = trace.present.row(s / k);
    }
    return out;
  }
  throw IntervalError(fmt::format("cannot resample a {} s grid to {} s", trace.interval.count(), interval.count()));
}

OutdoorConditions WeatherSeries::at(TimePoint t) const {
  if (size() == 0) throw RangeError("weather series is empty");
  Eigen::Index i = t < start ? 0 : static_cast<Eigen::Index>((t - start) / interval);
  i = std::min(i, size() - 1);
  if (!present[i]) throw RangeError(fmt::format("weather missing at {}", format_timestamp(time_of(i))));
  return {temp_f[i], rh[i], co2_ppm[i]};
}

std::size_t WeatherSeries::missing() const { return static_cast<std::size_t>((!present).count()); }

WeatherSeries parse_weather(std::istream& in, std::optional<seconds> interval) {
  std::vector<std::string> names;
  const auto cols = header_columns(in, {"timestamp", "outdoor_temp_f", "outdoor_rh"}, names);
  const auto c_time = cols.at("timestamp"), c_temp = cols.at("outdoor_temp_f"), c_rh = cols.at("outdoor_rh");
  const auto co2_it = cols.find("outdoor_co2_ppm");

  struct Row {
    std::size_t line;
    TimePoint t;
    std::optional<double> temp, rh, co2;
  };
  std::vector<Row> rows;
  std::string line;
  std::size_t lineno = 1;
  while (read_line(in, line)) {
    ++lineno;
    if (strip(line).empty()) continue;
    const auto f = fields_of(line);
    if (f.size() != names.size())
      throw ParseError(fmt::format("expected {} fields, found {}", names.size(), f.size()), lineno);
    Row r{lineno, {}, {}, {}, {}};
    try {
      r.t = parse_timestamp(f[c_time]);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), lineno);
    }
    if (!rows.empty() && r.t <= rows.back().t) throw ParseError("timestamps must increase", lineno);
    if (!f[c_temp].empty()) r.temp = parse_double(f[c_temp], lineno, "temperature");
    if (!f[c_rh].empty()) {
      r.rh = parse_double(f[c_rh], lineno, "relative humidity");
      if (*r.rh < 0 || *r.rh > 1) throw ParseError("relative humidity must be a fraction in [0, 1]", lineno);
    }
    if (r.temp && (*r.temp < psychro::kMinTemperatureF || *r.temp > psychro::kMaxTemperatureF))
      throw ParseError(fmt::format("temperature {} F outside [32, 140]", *r.temp), lineno);
    if (co2_it != cols.end() && !f[co2_it->second].empty()) r.co2 = parse_double(f[co2_it->second], lineno, "CO2");
    rows.push_back(r);
  }
  WeatherSeries w;
  std::vector<std::vector<TimePoint>> stamps(1);
  for (const auto& r : rows) stamps[0].push_back(r.t);
  w.interval = gcd_interval(stamps, interval);
  if (rows.empty()) return w;
  w.start = rows.front().t;
  const auto n = static_cast<Eigen::Index>((rows.back().t - w.start) / w.interval + 1);
  w.temp_f = Eigen::VectorXd::Zero(n);
  w.rh = Eigen::VectorXd::Zero(n);
  w.co2_ppm = Eigen::VectorXd::Constant(n, 400.0);
  w.present = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(n, false);
  for (const auto& r : rows) {
    if ((r.t - w.start) % w.interval != seconds(0)) throw ParseError("timestamp off the weather grid", r.line);
    const auto i = static_cast<Eigen::Index>((r.t - w.start) / w.interval);
    if (r.temp && r.rh) {
      w.temp_f[i] = *r.temp;
      w.rh[i] = *r.rh;
      w.present[i] = true;
    }
    if (r.co2) w.co2_ppm[i] = *r.co2;
  }
  return w;
}

WeatherSeries load_weather(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open '{}'", path.string()));
  return parse_weather(in);
}

void write_weather(std::ostream& out, const WeatherSeries& w) {
  out << "timestamp,outdoor_temp_f,outdoor_rh,outdoor_co2_ppm\n";
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    out << format_timestamp(w.time_of(i)) << ',';
    if (w.present[i])
      out << fmt::format("{:.2f},{:.4f},", w.temp_f[i], w.rh[i]);
    else
      out << ",,";
    out << fmt::format("{:.1f}\n", w.co2_ppm[i]);
  }
}

WeatherSeries impute_weather(const WeatherSeries& w, std::uint64_t seed) {
  if (w.missing() == 0) return w;
  std::array<std::vector<double>, 24> tb, rb;
  std::vector<double> ta, ra;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (!w.present[i]) continue;
    const auto h = static_cast<std::size_t>(hour_of_day(w.time_of(i)));
    tb[h].push_back(w.temp_f[i]);
    rb[h].push_back(w.rh[i]);
    ta.push_back(w.temp_f[i]);
    ra.push_back(w.rh[i]);
  }
  if (ta.empty()) throw EmptyTraceError("weather series has no observations");
  const auto th = hourly(tb, stats_of(ta));
  const auto rh = hourly(rb, stats_of(ra));
  WeatherSeries out = w;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w.present[i]) continue;
    const auto h = static_cast<std::size_t>(hour_of_day(w.time_of(i)));
    const auto s = static_cast<std::uint64_t>(i);
    out.temp_f[i] = std::clamp(draw_normal(cell_seed(seed, 1000, s), th[h].mean, th[h].std),
                               psychro::kMinTemperatureF, psychro::kMaxTemperatureF);
    out.rh[i] = std::clamp(draw_normal(cell_seed(seed, 1001, s), rh[h].mean, rh[h].std), 0.0, 1.0);
    out.present[i] = true;
  }
  return out;
}

OccupancyTrace align_to_config(const OccupancyTrace& trace, const BuildingConfig& config) {
  OccupancyTrace out = trace;
  out.zones.clear();
  out.occupancy.resize(trace.slot_count(), static_cast<Eigen::Index>(config.zone_count()));
  out.present.resize(trace.slot_count(), static_cast<Eigen::Index>(config.zone_count()));
  for (std::size_t j = 0; j < config.zone_count(); ++j) {
    const auto src = static_cast<Eigen::Index>(trace.zone_index(config.zones[j].name));
    out.zones.push_back(config.zones[j].name);
    out.occupancy.col(static_cast<Eigen::Index>(j)) = trace.occupancy.col(src);
    out.present.col(static_cast<Eigen::Index>(j)) = trace.present.col(src);
  }
  if (trace.zones.size() != config.zone_count()) {
    for (const auto& z : trace.zones) config.zone_index(z);
  }
  return out;
}

}  // namespace biota
