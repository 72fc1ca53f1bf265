#include <gtest/gtest.h>

#include "biota/attack.hpp"
#include "biota/config_io.hpp"
#include "biota/errors.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace biota;
using biota::testing::Gen;
using biota::testing::data_path;

namespace {

struct Fixture {
  BuildingConfig config;
  SensorFrame frame;
};

Fixture cod() {
  auto c = load_config(data_path("cod.json"));
  auto f = load_frame(data_path("cod_frame.json"), c);
  return {c, f};
}

Fixture kth() {
  auto c = load_config(data_path("kth.json"));
  auto f = load_frame(data_path("kth_frame.json"), c);
  return {c, f};
}

Eigen::VectorXi vec(std::initializer_list<int> v) {
  Eigen::VectorXi out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (int x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST(Attack, ConstraintTallies) {
  const auto [c, f] = cod();
  auto s = problem_stats(encode(c, {f}, EnergyIncrease{5, ThresholdUnit::percent}, AccessSet::all(4)));
  EXPECT_EQ(s.control, 52u);
  EXPECT_EQ(s.cost, 28u);
  EXPECT_EQ(s.attack, 16u);
  EXPECT_EQ(s.coupling_attack, 2u);
  EXPECT_EQ(s.coupling_cost, 1u);

  const auto [k, g] = kth();
  s = problem_stats(encode(k, {g}, EnergyIncrease{10, ThresholdUnit::percent}, AccessSet::all(3)));
  EXPECT_EQ(s.control, 39u);
  EXPECT_EQ(s.cost, 21u);
  EXPECT_EQ(s.attack, 12u);
}

TEST(Attack, CodEntranceWarholShift) {
  const auto [c, f] = cod();
  const auto access = AccessSet::of(c, {"entrance", "warhol"});
  const auto p = encode(c, {f}, parse_goal("energy:5%", c), access);
  const auto r = synthesize(p);
  ASSERT_EQ(r.verdict, Verdict::sat);
  const auto& d = r.vector->slots[0].deltas;
  EXPECT_EQ(d, vec({17, 0, -17, 0}));
  EXPECT_TRUE(r.vector->slots[0].evidence.sound());

  const auto& step = r.vector->slots[0].step;
  EXPECT_NEAR(step.decision.zones[0].flow_cfm, 1724, 0.005 * 1724);
  EXPECT_DOUBLE_EQ(step.decision.zones[2].flow_cfm, 41.09);
}

TEST(Attack, KthAllZoneShift) {
  const auto [c, f] = kth();
  const auto p = encode(c, {f}, parse_goal("energy:10%", c), AccessSet::all(3));
  const auto r = synthesize(p);
  ASSERT_EQ(r.verdict, Verdict::sat);
  EXPECT_EQ(r.vector->slots[0].deltas, vec({-2, 1, 1}));
  const auto best = maximize_impact(p, {true});
  EXPECT_EQ(best.slots[0].deltas, vec({-2, 1, 1}));
}

TEST(Attack, SingleZoneAccessIsUnsat) {
  for (const auto& [c, f] : {cod(), kth()}) {
    for (std::size_t j = 0; j < c.zone_count(); ++j) {
      AccessSet a(c.zone_count());
      a.grant(j);
      for (double t : {0.5, 1.0, 5.0, 10.0}) {
        const auto p = encode(c, {f}, EnergyIncrease{t, ThresholdUnit::percent}, a);
        EXPECT_EQ(synthesize(p).verdict, Verdict::unsat) << c.zones[j].name << " " << t;
      }
      const auto p = encode(c, {f}, EnergyIncrease{0.01, ThresholdUnit::kwh}, a);
      EXPECT_EQ(synthesize(p).verdict, Verdict::unsat);
      EXPECT_THROW(maximize_impact(p, {true}), InfeasibleError);
    }
  }
}

TEST(Attack, ForgedReadingsHaveZeroResidual) {
  Gen g(31);
  for (int i = 0; i < 300; ++i) {
    const auto in = biota::testing::random_instance(g, 4, 8);
    const auto& c = in.config;
    Eigen::VectorXi d = Eigen::VectorXi::Zero(in.frame.occupancy.size());
    const auto forgeable = in.access.forgeable();
    if (forgeable.size() >= 2) {
      const auto a = forgeable[0], b = forgeable[1];
      const int up = std::min(c.zones[a].capacity - in.frame.occupancy[static_cast<Eigen::Index>(a)],
                              in.frame.occupancy[static_cast<Eigen::Index>(b)]);
      const int k = up > 0 ? g.integer(0, up) : 0;
      d[static_cast<Eigen::Index>(a)] = k;
      d[static_cast<Eigen::Index>(b)] = -k;
    }
    const auto step = forge_step(c, in.frame, d, in.access);
    const auto v = verify_consistency(c, step.reported, step.decision, step.cover);
    EXPECT_TRUE(v.accepted);
    EXPECT_LT(v.max_abs_co2, 1e-6);
    EXPECT_LT(v.max_abs_temp, 1e-9);
  }
}

TEST(Attack, ForgingNeedsFullAccess) {
  const auto [c, f] = kth();
  AccessSet a(3);
  a.grant(0);
  a.grant(1, {true, true, false});
  EXPECT_FALSE(a.can_forge(1));
  EXPECT_THROW(forge_step(c, f, vec({-1, 1, 0}), a), CapabilityError);
  EXPECT_THROW(forge_step(c, f, vec({2, 0, -2}), AccessSet::all(3)), RangeError);
  EXPECT_THROW(encode(c, {f}, EnergyIncrease{}, AccessSet(3)), EmptyAccessError);
}

TEST(Attack, UnforgedZonesKeepTrueReadings) {
  const auto [c, f] = cod();
  const auto a = AccessSet::of(c, {"entrance", "warhol"});
  const auto step = forge_step(c, f, vec({5, 0, -5, 0}), a);
  EXPECT_EQ(step.cover.indoor_co2[1], step.physical.indoor_co2[1]);
  EXPECT_EQ(step.cover.indoor_temp[3], step.physical.indoor_temp[3]);
  EXPECT_NE(step.cover.indoor_co2[0], step.physical.indoor_co2[0]);
}

TEST(Attack, GoalParsing) {
  const auto [c, f] = cod();
  auto e = std::get<EnergyIncrease>(parse_goal("energy:5%", c));
  EXPECT_EQ(e.unit, ThresholdUnit::percent);
  EXPECT_EQ(e.threshold, 5);
  e = std::get<EnergyIncrease>(parse_goal("energy:2.5kwh:horizon", c));
  EXPECT_EQ(e.unit, ThresholdUnit::kwh);
  EXPECT_EQ(e.scope, GoalScope::horizon);
  auto k = std::get<ComfortDisruption>(parse_goal("comfort:co2=300,temp=4@entrance,laboratory", c));
  EXPECT_EQ(k.targets, (std::vector<std::size_t>{0, 3}));
  EXPECT_EQ(*k.co2_deviation_ppm, 300);
  EXPECT_FALSE(k.co2_excess_only);
  k = std::get<ComfortDisruption>(parse_goal("comfort:co2+=0", c));
  EXPECT_TRUE(k.co2_excess_only);
  EXPECT_EQ(k.targets.size(), 4u);
  for (const char* text : {"energy:5%", "energy:1.5kwh:horizon", "comfort:co2+=10,temp=1@warhol"})
    EXPECT_EQ(describe_goal(parse_goal(text, c), c), text);

  for (const char* bad : {"energy", "power:5", "energy:x%", "energy:-1%", "energy:5:forever", "comfort:",
                          "comfort:humidity=3", "comfort:co2=5@attic"})
    EXPECT_ANY_THROW(parse_goal(bad, c)) << bad;
}

TEST(Attack, Co2DeviationConventions) {
  ComfortDisruption g;
  EXPECT_EQ(co2_deviation(g, 900, 1000), 100);
  g.co2_excess_only = true;
  EXPECT_EQ(co2_deviation(g, 900, 1000), 0);
  EXPECT_EQ(co2_deviation(g, 1100, 1000), 100);
}

TEST(Attack, EncodeRejectsBadShapes) {
  const auto [c, f] = kth();
  EXPECT_THROW(encode(c, {}, EnergyIncrease{}, AccessSet::all(3)), DomainError);
  EXPECT_THROW(encode(c, {f}, EnergyIncrease{}, AccessSet::all(2)), DomainError);
}
