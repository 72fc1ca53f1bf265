#include <gtest/gtest.h>

#include "biota/config_io.hpp"
#include "biota/errors.hpp"
#include "support.hpp"

using namespace biota;
using biota::testing::data_path;

namespace {

const char* kMinimal = R"({
  "electricity_rate": 0.1,
  "zones": [{"name": "a", "volume_ft3": 500, "co2_per_person_cfm": 0.02, "heat_per_person_kw": 0.1,
             "thermal_load_kw": 0.2, "capacity": 3}]
})";

}  // namespace

TEST(ConfigIo, FixturesLoad) {
  const auto cod = load_config(data_path("cod.json"));
  ASSERT_EQ(cod.zone_count(), 4u);
  EXPECT_EQ(cod.zones[3].name, "laboratory");
  EXPECT_DOUBLE_EQ(cod.zones[0].volume_ft3, 12570.36);
  const auto kth = load_config(data_path("kth.json"));
  EXPECT_EQ(kth.zone_index("bathroom"), 2u);
}

TEST(ConfigIo, DefaultsFillOptionalKeys) {
  const auto c = parse_config(kMinimal);
  EXPECT_EQ(c.zones[0].co2_setpoint_ppm, 1000);
  EXPECT_EQ(c.interval_minutes, 10);
  EXPECT_EQ(c.mixing.mode, MixingMode::fixed);
}

TEST(ConfigIo, RoundTripIsStable) {
  for (const char* name : {"cod.json", "kth.json"}) {
    const auto c = load_config(data_path(name));
    const auto once = dump_config(c);
    EXPECT_EQ(dump_config(parse_config(once)), once);
    const auto f = load_frame(data_path(name == std::string("cod.json") ? "cod_frame.json" : "kth_frame.json"), c);
    const auto fs = dump_frame(f, c);
    EXPECT_EQ(dump_frame(parse_frame(fs, c), c), fs);
  }
}

TEST(ConfigIo, SchemaErrors) {
  EXPECT_THROW(parse_config("{"), ParseError);
  EXPECT_THROW(parse_config("[]"), SchemaError);
  EXPECT_THROW(parse_config(R"({"zones": []})"), SchemaError);
  EXPECT_THROW(parse_config(R"({"electricity_rate": 1, "zones": [], "colour": 1})"), SchemaError);
  EXPECT_THROW(parse_config(R"({"electricity_rate": 1, "zones": []})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"electricity_rate": "x", "zones": []})"), SchemaError);
  EXPECT_THROW(parse_config(R"({"electricity_rate": 1, "zones": [{"name": "a"}]})"), SchemaError);
}

TEST(ConfigIo, RangeErrors) {
  auto text = std::string(kMinimal);
  text.replace(text.find("\"capacity\": 3"), 13, "\"capacity\": 0");
  EXPECT_THROW(parse_config(text), ConfigError);
  EXPECT_THROW(parse_config(R"({"electricity_rate": 1, "mixing": {"mode": "auto"},
      "zones": [{"name": "a", "volume_ft3": 1, "co2_per_person_cfm": 1, "heat_per_person_kw": 0,
                 "thermal_load_kw": 0, "capacity": 1}]})"),
               SchemaError);
}

TEST(ConfigIo, FrameNeedsEveryZone) {
  const auto c = parse_config(kMinimal);
  EXPECT_THROW(parse_frame(R"({"zones": {}})", c), SchemaError);
  EXPECT_THROW(parse_frame(R"({"zones": {"b": {"occupancy": 1, "indoor_co2_ppm": 900, "indoor_temp_f": 70}}})", c),
               ConfigError);
  EXPECT_THROW(parse_frame(R"({"zones": {"a": {"occupancy": 9, "indoor_co2_ppm": 900, "indoor_temp_f": 70}}})", c),
               RangeError);
  const auto f =
      parse_frame(R"({"zones": {"a": {"occupancy": 2, "indoor_co2_ppm": 900, "indoor_temp_f": 70}}})", c);
  EXPECT_EQ(f.occupancy[0], 2);
  EXPECT_EQ(f.outdoor_co2_ppm, c.design_outdoor.co2_ppm);
}

TEST(ConfigIo, Fnv1aKnownValues) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(ConfigIo, MissingFile) { EXPECT_THROW(read_text_file("/nonexistent/x.json"), ParseError); }
