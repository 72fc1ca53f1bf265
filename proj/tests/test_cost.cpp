#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "biota/config_io.hpp"
#include "biota/cost.hpp"
#include "biota/errors.hpp"
#include "support.hpp"

using namespace biota;
using biota::testing::Gen;
using biota::testing::data_path;

TEST(Cost, ChillerEqualsCoil) {
  Gen g(21);
  for (int i = 0; i < 10000; ++i) {
    const double m = g.uniform(0.0, 2.0);
    const double w_mix = g.uniform(0.001, 0.02);
    const double w_sup = g.uniform(0.001, 0.02);
    const double h_mix = g.uniform(-10, 90);
    const double h_sup = g.uniform(-10, 90);
    const double m_cond = condensate_mass_flow(m, w_mix, w_sup).kg_s;
    const double h_cond = g.uniform(0, 200);
    const double coil = coil_cost(m, h_sup, h_mix, m_cond, h_cond);
    const double cl = g.uniform(38, 50);
    const double mc = g.uniform(0.1, 5);
    const double sh = g.uniform(3.5, 4.5);
    const double chiller = chiller_cost(mc, sh, coil_refrigerant_temp(cl, coil, mc, sh), cl);
    EXPECT_NEAR(chiller, coil, 1e-9 * std::max(coil, 1e-300));
  }
}

TEST(Cost, CondensateOnlyWhenDrying) {
  EXPECT_TRUE(condensate_mass_flow(1.0, 0.008, 0.009).none);
  EXPECT_EQ(condensate_mass_flow(1.0, 0.008, 0.009).kg_s, 0.0);
  EXPECT_NEAR(condensate_mass_flow(2.0, 0.010, 0.008).kg_s, 0.004, 1e-15);
}

TEST(Cost, CoilIsAbsoluteEnthalpyChange) {
  EXPECT_DOUBLE_EQ(coil_cost(2.0, 30.0, 50.0, 0.0, 0.0), 40.0);
  EXPECT_DOUBLE_EQ(coil_cost(2.0, 50.0, 30.0, 0.0, 0.0), 40.0);
  EXPECT_DOUBLE_EQ(coil_cost(1.0, 30.0, 50.0, 0.01, 100.0), 19.0);
}

TEST(Cost, GuardsRejectNonsense) {
  EXPECT_THROW(mass_flow_from_volumetric(10, 0), DomainError);
  EXPECT_THROW(coil_refrigerant_temp(44, 1, 0, 4.186), DomainError);
  EXPECT_THROW(chiller_cost(1, 4.186, 40, 44), DomainError);
}

TEST(Cost, VolumetricToMass) {
  EXPECT_NEAR(mass_flow_from_volumetric(1000, 0.8), 1000 * 4.719474e-4 / 0.8, 1e-15);
}

TEST(Cost, TimeslotEnergyIsSumOfZones) {
  const auto c = load_config(data_path("cod.json"));
  const auto f = load_frame(data_path("cod_frame.json"), c);
  const auto t = decision_cost(c, control_step(c, f), 10);
  double sum = 0;
  for (const auto& z : t.zones) {
    EXPECT_NEAR(z.chiller_kw, z.coil_kw, 1e-9 * z.coil_kw);
    sum += (z.coil_kw + z.chiller_kw) / 6.0;
  }
  EXPECT_NEAR(t.energy_kwh(), sum, 1e-12);

  const auto h = total_cost({t, t}, c.electricity_rate);
  EXPECT_NEAR(h.total_energy_kwh, 2 * sum, 1e-12);
  EXPECT_NEAR(h.total_currency, 2 * sum * 7.02, 1e-9);
}

TEST(Cost, MoreOccupantsCostMore) {
  const auto c = load_config(data_path("cod.json"));
  auto f = load_frame(data_path("cod_frame.json"), c);
  double prev = -1;
  for (int n = 0; n <= c.zones[0].capacity; ++n) {
    f.occupancy[0] = n;
    const double e = zone_cost(c, control_zone(c, 0, n, f)).power_kw();
    EXPECT_GE(e, prev - 1e-12) << n;
    prev = e;
  }
}

TEST(Cost, CsvHasOneRowPerZoneAndSlot) {
  const auto c = load_config(data_path("kth.json"));
  const auto f = load_frame(data_path("kth_frame.json"), c);
  const auto t = decision_cost(c, control_step(c, f), 10);
  std::ostringstream out;
  write_cost_csv(out, c, total_cost({t, t}, c.electricity_rate));
  const auto s = out.str();
  EXPECT_EQ(s.rfind("timeslot,zone,coil_kW,chiller_kW,kWh,currency\n", 0), 0u);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 7);
  EXPECT_NE(s.find(",bathroom,"), std::string::npos);
}
