#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "agentlab/core/episode.hpp"
#include "agentlab/env/economy.hpp"
#include "support/oracles.hpp"

using namespace agentlab;
using namespace agentlab::economy;

namespace {

EconomyState two_households() {
  EconomyState s;
  s.price_level = 1000;
  s.previous_price_level = 1000;
  s.households[AgentId(0)] = {AgentId(0), 1.0, 1000, 1000, false};
  s.households[AgentId(1)] = {AgentId(1), 0.5, 2000, 1000, false};
  return s;
}

}  // namespace

TEST(Month, WorkedExample) {
  EconomyState s = two_households();
  auto r = monthly_step({{AgentId(0), {1.0, 0.5}}, {AgentId(1), {0.2, 0.1}}}, s);
  // h0 earns 1000, pays 100, spends 0.5 * 1900 = 950, keeps 950.
  // h1 is idle, spends 200, keeps 1800.
  EXPECT_DOUBLE_EQ(r.ledger.income, 1000);
  EXPECT_DOUBLE_EQ(r.ledger.taxes, 100);
  EXPECT_DOUBLE_EQ(r.ledger.spending, 1150);
  // demand 1.15 vs supply 1: price * (1 + 0.2 * 0.15).
  EXPECT_NEAR(s.price_level, 1030, 1e-9);
  EXPECT_NEAR(s.households[AgentId(0)].wealth, 950 * (1 + 0.03 / 12), 1e-9);
  EXPECT_NEAR(s.households[AgentId(1)].wealth, 1800 * (1 + 0.03 / 12), 1e-9);
  EXPECT_DOUBLE_EQ(s.policy.government_revenue, 100);
  EXPECT_DOUBLE_EQ(r.indicators.unemployment, 0.5);
  EXPECT_NEAR(r.indicators.inflation, 0.03, 1e-12);
  EXPECT_EQ(s.month, 1);
  EXPECT_NEAR(r.ledger.residual(), 0, 1e-9);
  // Rate reacts to annualized inflation and hits the cap.
  EXPECT_DOUBLE_EQ(s.policy.interest_rate, 0.2);
}

TEST(Month, ClampsAndReports) {
  EconomyState s = two_households();
  auto r = monthly_step({{AgentId(0), {1.5, -0.2}}, {AgentId(1), {0.5, 0.5}}}, s);
  ASSERT_EQ(r.clamped.size(), 1u);
  EXPECT_EQ(r.clamped[0].agent, AgentId(0));
  EXPECT_DOUBLE_EQ(r.clamped[0].applied.work_propensity, 1.0);
  EXPECT_DOUBLE_EQ(r.clamped[0].applied.consumption_propensity, 0.0);
  EXPECT_TRUE(s.households[AgentId(1)].employed_this_month);
}

TEST(Month, MissingActionIsAContractViolation) {
  EconomyState s = two_households();
  EXPECT_THROW(monthly_step({{AgentId(0), {1, 1}}}, s), ContractViolation);
}

TEST(Month, RateFloorAndNoSupply) {
  EconomyState s = two_households();
  s.policy.interest_rate = 0.0;
  monthly_step({{AgentId(0), {0, 0}}, {AgentId(1), {0, 0}}}, s);
  // Nobody works or spends: price unchanged, inflation 0, rate falls to the floor.
  EXPECT_DOUBLE_EQ(s.price_level, 1000);
  EXPECT_DOUBLE_EQ(s.policy.interest_rate, 0.0);
  EXPECT_THROW(compute_indicators(s, 0), ContractViolation);
}

TEST(Month, MatchesOracleAndLedgerOverManyMonths) {
  RngStream rng(77);
  EconomyState s;
  s.price_level = 900;
  s.previous_price_level = 900;
  oracle::EconomyWorld w;
  w.price = w.previous_price = 900;
  for (std::uint32_t i = 0; i < 30; ++i) {
    const double skill = rng.uniform(0.5, 1.5);
    s.households[AgentId(i)] = {AgentId(i), skill, 1000, 1000, false};
    w.skill.push_back(skill);
    w.wealth.push_back(1000);
  }
  for (int month = 0; month < 120; ++month) {
    std::map<AgentId, HouseholdAction> acts;
    std::vector<std::pair<double, double>> pairs;
    for (std::uint32_t i = 0; i < 30; ++i) {
      const double a = rng.uniform(-0.2, 1.2);
      const double b = rng.uniform(-0.2, 1.2);
      acts[AgentId(i)] = {a, b};
      pairs.emplace_back(a, b);
    }
    auto r = monthly_step(acts, s);
    auto m = oracle::economy_month(w, pairs);
    const double scale = std::max(1.0, std::abs(r.ledger.wealth_after + r.ledger.revenue_after));
    ASSERT_LE(std::abs(r.ledger.residual()) / scale, 1e-12);
    ASSERT_NEAR(r.ledger.spending, m.spending, 1e-9 * std::max(1.0, m.spending));
    ASSERT_NEAR(s.price_level, w.price, 1e-9 * w.price);
    ASSERT_DOUBLE_EQ(r.indicators.unemployment, m.unemployment);
    ASSERT_NEAR(s.policy.interest_rate, w.rate, 1e-12);
    for (std::uint32_t i = 0; i < 30; ++i) {
      ASSERT_NEAR(s.households[AgentId(i)].wealth, w.wealth[i], 1e-9 * std::max(1.0, w.wealth[i]));
    }
  }
}

TEST(Fit, RecoversExactLine) {
  std::vector<double> xs{0, 1, 2, 3, 4};
  std::vector<double> ys;
  for (double x : xs) ys.push_back(-2.5 * x + 7);
  auto f = fit_line(xs, ys);
  EXPECT_NEAR(f.slope, -2.5, 1e-12);
  EXPECT_NEAR(f.intercept, 7, 1e-12);
  EXPECT_NEAR(f.r, -1, 1e-12);
}

TEST(Fit, MatchesNormalEquations) {
  RngStream rng(3);
  for (int k = 0; k < 100; ++k) {
    const auto n = 3 + rng.below(50);
    std::vector<double> xs, ys;
    for (std::uint64_t i = 0; i < n; ++i) {
      xs.push_back(rng.uniform(-1, 1));
      ys.push_back(rng.uniform(-1, 1));
    }
    const auto want = oracle::normal_equations(xs, ys);
    const auto got = fit_line(xs, ys);
    EXPECT_NEAR(got.slope, static_cast<double>(want.slope), 1e-9);
    EXPECT_NEAR(got.intercept, static_cast<double>(want.intercept), 1e-9);
    EXPECT_NEAR(got.r, static_cast<double>(want.r), 1e-9);
  }
}

TEST(Fit, DegenerateCases) {
  EXPECT_THROW(fit_line({1, 1, 1}, {1, 2, 3}), DegenerateX);
  EXPECT_THROW(fit_line({1}, {1}), DegenerateX);
  EXPECT_THROW(fit_line({1, 2}, {1}), ContractViolation);
  EXPECT_TRUE(std::isnan(fit_line({1, 2, 3}, {4, 4, 4}).r));
}

TEST(Analyze, ConstantUnemploymentLeavesFitsUndefined) {
  std::vector<MacroIndicators> s(5);
  for (int i = 0; i < 5; ++i) {
    s[i].month = i + 1;
    s[i].unemployment = 0.1;
    s[i].inflation = 0.01 * i;
  }
  auto r = analyze(s);
  EXPECT_FALSE(r.phillips);
  EXPECT_FALSE(r.okun);
  std::ostringstream os;
  write_regression_report(os, r);
  EXPECT_NE(os.str().find("undefined"), std::string::npos);
}

TEST(Environment, FullRunAndTaxHook) {
  EconomyConfig cfg;
  cfg.households = 20;
  cfg.months = 36;
  std::vector<int> years;
  cfg.tax_policy = [&years](int year, const MacroIndicators&) {
    years.push_back(year);
    return 0.1 + 0.05 * year;
  };
  EconomyEnvironment env(cfg);
  std::vector<std::unique_ptr<PropensityHousehold>> hs;
  AgentRoster roster;
  for (std::uint32_t i = 0; i < cfg.households; ++i) {
    hs.push_back(std::make_unique<PropensityHousehold>(AgentId(i), 0.8, 0.5, 0.4));
    roster[AgentId(i)] = hs.back().get();
  }
  auto log = run_episode(env, roster, 1000, 9);
  EXPECT_EQ(log.steps_executed, 36u);
  EXPECT_EQ(years, (std::vector<int>{1, 2, 3}));
  EXPECT_DOUBLE_EQ(env.indicators()[12].tax_rate, 0.15);
  EXPECT_EQ(filter_action(log.records, "decision").size(), 20u * 36u);
  for (const auto& l : env.ledgers()) EXPECT_NEAR(l.residual(), 0, 1e-6);
  std::ostringstream os;
  write_indicators_csv(os, env.indicators());
  const std::string csv = os.str();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 37);
}

TEST(Environment, InvalidActionBecomesIdle) {
  EconomyConfig cfg;
  cfg.households = 2;
  cfg.months = 1;
  EconomyEnvironment env(cfg);
  env.reset(0);
  ActionMap acts;
  acts[AgentId(0)] = {AgentId(0), 0, {{"work_propensity", "lots"}}, {}};
  env.step(acts);
  int rejects = 0;
  for (const auto& e : env.drain_events()) rejects += e.action == "reject_action";
  EXPECT_EQ(rejects, 2);
  EXPECT_DOUBLE_EQ(env.indicators()[0].unemployment, 1.0);
  EXPECT_TRUE(env.done());
}
