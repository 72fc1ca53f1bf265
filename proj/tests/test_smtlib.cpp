#include <gtest/gtest.h>

#include <cmath>
#include <regex>

#include "biota/config_io.hpp"
#include "biota/smtlib.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace biota;
using biota::testing::Gen;
using biota::testing::data_path;

namespace {

// Evaluates a literal produced by smt_real back to a long double.
long double eval_real(const std::string& s) {
  static const std::regex neg(R"(^\(- (.*)\)$)");
  static const std::regex div(R"(^\(/ (\d+)\.0 (\d+)\.0\)$)");
  std::smatch m;
  if (std::regex_match(s, m, neg)) return -eval_real(m[1].str());
  if (std::regex_match(s, m, div)) return std::stold(m[1].str()) / std::stold(m[2].str());
  return std::stold(s);
}

}  // namespace

TEST(Smtlib, RealLiteralsAreExact) {
  EXPECT_EQ(smt_real(0.0), "0.0");
  EXPECT_EQ(smt_real(0.75), "(/ 3.0 4.0)");
  EXPECT_EQ(smt_real(-2.0), "(- 2.0)");
  EXPECT_EQ(smt_real(1024.0), "1024.0");
  EXPECT_EQ(smt_real(0x1p60), "1152921504606846976.0");
  EXPECT_THROW(smt_real(std::nan("")), DomainError);
  Gen g(51);
  for (int i = 0; i < 2000; ++i) {
    const double x = std::ldexp(g.uniform(-1, 1), g.integer(-30, 30));
    EXPECT_EQ(static_cast<double>(eval_real(smt_real(x))), x) << smt_real(x);
  }
}

TEST(Smtlib, EmissionIsDeterministic) {
  const auto c = load_config(data_path("cod.json"));
  const auto f = load_frame(data_path("cod_frame.json"), c);
  const auto a = emit_smtlib(encode(c, {f}, EnergyIncrease{5, ThresholdUnit::percent}, AccessSet::all(4)));
  const auto b = emit_smtlib(encode(c, {f}, EnergyIncrease{5, ThresholdUnit::percent}, AccessSet::all(4)));
  EXPECT_EQ(a, b);
  EXPECT_NE(a.find("(set-logic QF_NIRA)"), std::string::npos);
  EXPECT_NE(a.find("(check-sat)"), std::string::npos);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_NE(a.find(smt_delta_name(0, j)), std::string::npos);
}

TEST(Smtlib, OneAssertionPerConstraintPlusBaseline) {
  const auto c = load_config(data_path("kth.json"));
  const auto f = load_frame(data_path("kth_frame.json"), c);
  const auto p = encode(c, {f}, parse_goal("comfort:co2+=5@kitchen", c), AccessSet::all(3));
  const auto s = emit_smtlib(p);
  auto count = [&](const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
    return n;
  };
  EXPECT_EQ(count("(assert ") - count("; baseline "), p.constraints.size());
}

TEST(Smtlib, ExternalSolverAgrees) {
  const auto solver = find_smt_solver();
  if (!solver) GTEST_SKIP() << "no SMT solver on PATH";
  Gen g(52);
  for (int i = 0; i < 25; ++i) {
    const auto in = biota::testing::random_instance(g);
    const auto p = encode(in.config, {in.frame}, in.goal, in.access);
    const auto native = synthesize(p);
    const auto run = run_smt_solver(*solver, emit_smtlib(p));
    ASSERT_NE(run.verdict, "error") << run.output;
    EXPECT_EQ(run.verdict, native.verdict == Verdict::sat ? "sat" : "unsat") << i;
    if (run.verdict == "sat") {
      const auto d = deltas_from_model(p, 0, run);
      EXPECT_EQ(d.sum(), 0);
      const auto v = realize_slot(p, 0, d);
      EXPECT_TRUE(v.evidence.stealth.accepted);
    }
  }
}
