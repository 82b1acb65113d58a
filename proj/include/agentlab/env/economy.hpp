#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

#include "agentlab/core/environment.hpp"
#include "agentlab/core/errors.hpp"

namespace agentlab::economy {

struct HouseholdState {
  AgentId agent;
  double skill = 1.0;         // output units per month worked
  double wealth = 0.0;
  double monthly_wage = 1.0;  // currency per unit of skill
  bool employed_this_month = false;
};

struct PolicyState {
  double tax_rate = 0.1;
  double interest_rate = 0.03;
  double government_revenue = 0.0;
};

struct MacroIndicators {
  int month = 0;
  double unemployment = 0.0;
  double price_level = 1.0;
  double inflation = 0.0;
  double gdp = 0.0;
  double gdp_growth = 0.0;
  double interest_rate = 0.0;
  double tax_rate = 0.0;
};

struct HouseholdAction {
  double work_propensity = 0.0;
  double consumption_propensity = 0.0;
};

// Closed-form dynamics; every coefficient can be overridden.
struct EconomyParams {
  double price_adjustment = 0.2;  // kappa
  double supply_floor = 1.0;      // epsilon
  double work_threshold = 0.5;
  double rate_gain = 0.5;
  double inflation_target = 0.02;
  double rate_floor = 0.0;
  double rate_cap = 0.2;
};

struct EconomyState {
  std::map<AgentId, HouseholdState> households;
  PolicyState policy;
  double price_level = 1.0;
  int month = 0;
  // Values of the previous month, for growth rates.
  double previous_price_level = 1.0;
  double previous_gdp = 0.0;
};

// Monthly money flows; wealth and revenue are summed over all households.
struct MonthLedger {
  double income = 0.0;
  double taxes = 0.0;
  double spending = 0.0;
  double interest = 0.0;
  double wealth_before = 0.0;
  double wealth_after = 0.0;
  double revenue_before = 0.0;
  double revenue_after = 0.0;

  // (wealth + revenue) change minus (interest + income - spending).
  double residual() const {
    return (wealth_after + revenue_after) - (wealth_before + revenue_before) - (interest + income - spending);
  }
};

struct ClampNote {
  AgentId agent;
  HouseholdAction requested;
  HouseholdAction applied;
};

struct MonthResult {
  MacroIndicators indicators;
  MonthLedger ledger;
  std::vector<ClampNote> clamped;
};

// Indicators of the current state, with rates relative to the previous month.
// Growth against a zero GDP is reported as 0.
MacroIndicators compute_indicators(const EconomyState& state, int month);

// One month:
//  1. a household works iff work_propensity >= work_threshold
//  2. income = wage * skill when employed
//  3. tax = tax_rate * income, paid to the government
//  4. spending = consumption_propensity * (wealth + income - tax)
//  5. price *= 1 + kappa * (demand - supply) / max(supply, epsilon), where
//     demand = total spending / price and supply = skill of the employed
//  6. what is left after spending earns interest_rate / 12
//  7. interest_rate += gain * (annualized inflation - target), clamped
// Propensities outside [0, 1] are clamped and reported.
// Throws ContractViolation when a household has no action.
MonthResult monthly_step(const std::map<AgentId, HouseholdAction>& actions, EconomyState& state,
                         const EconomyParams& params = {});

class DegenerateX : public Error {
 public:
  DegenerateX() : Error("all x values are equal; the regression line is undefined") {}
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  // Pearson correlation; NaN when every y is equal.
  double r = 0.0;
};

// Ordinary least squares.
LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys);

struct MacroRegressions {
  std::optional<LineFit> phillips;  // x = unemployment, y = inflation
  std::optional<LineFit> okun;      // x = change in unemployment, y = gdp growth
};

MacroRegressions analyze(const std::vector<MacroIndicators>& series);

// Plain-text slope / intercept / r per law.
void write_regression_report(std::ostream& os, const MacroRegressions& report);

// Columns: month, unemployment, price_level, inflation, gdp, gdp_growth,
// interest_rate, tax_rate.
void write_indicators_csv(std::ostream& os, const std::vector<MacroIndicators>& series);

struct EconomyConfig {
  std::size_t households = 100;
  int months = 240;
  double wage = 1000.0;
  double skill_min = 0.5;
  double skill_max = 1.5;
  double initial_wealth = 1000.0;
  // Close to the market-clearing level for the default wage, so runs do not
  // open with a price jump.
  double initial_price = 1000.0;
  PolicyState policy;
  EconomyParams params;
  // Called after every 12th month with the year number (1-based); returns the
  // tax rate for the next year. Unset keeps the rate.
  std::function<double(int year, const MacroIndicators& latest)> tax_policy;
};

// Event log actions: decision, clamp_action, reject_action.
class EconomyEnvironment final : public Environment {
 public:
  explicit EconomyEnvironment(EconomyConfig config);

  std::string_view name() const override { return "economy"; }
  ObservationMap reset(std::uint64_t seed) override;
  ObservationMap step(const ActionMap& actions) override;
  bool done() const override { return state_.month >= config_.months; }
  TimeStep time() const override { return state_.month; }

  static Schema action_schema();
  static nlohmann::json passive_action() { return {{"work_propensity", 0.0}, {"consumption_propensity", 0.0}}; }

  const EconomyState& state() const { return state_; }
  const std::vector<MacroIndicators>& indicators() const { return indicators_; }
  const std::vector<MonthLedger>& ledgers() const { return ledgers_; }

 private:
  ObservationMap observe() const;

  EconomyConfig config_;
  EconomyState state_;
  std::vector<MacroIndicators> indicators_;
  std::vector<MonthLedger> ledgers_;
};

// Seeded household whose propensities wander around fixed means.
class PropensityHousehold final : public AgentPolicy {
 public:
  PropensityHousehold(AgentId id, double work, double consumption, double noise = 0.0);
  ActionEnvelope act(const Observation& obs) override;
  void seed(const RngStream& stream) override { rng_ = stream; }

 private:
  AgentId id_;
  double work_;
  double consumption_;
  double noise_;
  RngStream rng_{0};
};

}  // namespace agentlab::economy
