#include "agentlab/env/economy.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace agentlab::economy {

using nlohmann::json;

MacroIndicators compute_indicators(const EconomyState& state, int month) {
  if (month < 1) throw ContractViolation("indicator month must be at least 1");
  MacroIndicators m;
  m.month = month;
  std::size_t employed = 0;
  double output = 0.0;
  for (const auto& [id, h] : state.households) {
    if (!h.employed_this_month) continue;
    ++employed;
    output += h.skill;
  }
  const auto total = state.households.size();
  m.unemployment = total == 0 ? 0.0 : 1.0 - static_cast<double>(employed) / static_cast<double>(total);
  m.price_level = state.price_level;
  m.inflation = state.price_level / state.previous_price_level - 1.0;
  m.gdp = output * state.price_level;
  m.gdp_growth = state.previous_gdp > 0.0 ? m.gdp / state.previous_gdp - 1.0 : 0.0;
  m.interest_rate = state.policy.interest_rate;
  m.tax_rate = state.policy.tax_rate;
  return m;
}

MonthResult monthly_step(const std::map<AgentId, HouseholdAction>& actions, EconomyState& state,
                         const EconomyParams& params) {
  MonthResult out;
  MonthLedger& ledger = out.ledger;
  ledger.revenue_before = state.policy.government_revenue;
  for (const auto& [id, h] : state.households) ledger.wealth_before += h.wealth;

  const double rate = state.policy.interest_rate;
  double supply = 0.0;
  std::map<AgentId, double> leftover;
  for (auto& [id, h] : state.households) {
    auto it = actions.find(id);
    if (it == actions.end()) throw ContractViolation("no action for household " + to_string(id));
    HouseholdAction applied{std::clamp(it->second.work_propensity, 0.0, 1.0),
                            std::clamp(it->second.consumption_propensity, 0.0, 1.0)};
    if (applied.work_propensity != it->second.work_propensity ||
        applied.consumption_propensity != it->second.consumption_propensity) {
      out.clamped.push_back({id, it->second, applied});
    }

    h.employed_this_month = applied.work_propensity >= params.work_threshold;
    const double income = h.employed_this_month ? h.monthly_wage * h.skill : 0.0;
    const double tax = state.policy.tax_rate * income;
    const double net = income - tax;
    const double spending = applied.consumption_propensity * (h.wealth + net);
    if (h.employed_this_month) supply += h.skill;

    ledger.income += income;
    ledger.taxes += tax;
    ledger.spending += spending;
    leftover[id] = h.wealth + net - spending;
  }

  // Remitted in one transfer so revenue takes a single rounding per month.
  state.policy.government_revenue += ledger.taxes;

  const double demand = ledger.spending / state.price_level;
  state.previous_price_level = state.price_level;
  state.price_level *= 1.0 + params.price_adjustment * (demand - supply) / std::max(supply, params.supply_floor);

  for (auto& [id, h] : state.households) {
    const double interest = leftover[id] * rate / 12.0;
    ledger.interest += interest;
    h.wealth = leftover[id] + interest;
    ledger.wealth_after += h.wealth;
  }
  ledger.revenue_after = state.policy.government_revenue;

  ++state.month;
  out.indicators = compute_indicators(state, state.month);
  state.previous_gdp = out.indicators.gdp;

  const double annualized = std::pow(1.0 + out.indicators.inflation, 12.0) - 1.0;
  state.policy.interest_rate = std::clamp(rate + params.rate_gain * (annualized - params.inflation_target),
                                          params.rate_floor, params.rate_cap);
  return out;
}

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw ContractViolation("fit_line needs equally many x and y values");
  const auto n = static_cast<double>(xs.size());
  if (xs.size() < 2) throw DegenerateX();
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw DegenerateX();
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r = syy == 0.0 ? std::numeric_limits<double>::quiet_NaN() : sxy / std::sqrt(sxx * syy);
  return fit;
}

MacroRegressions analyze(const std::vector<MacroIndicators>& series) {
  MacroRegressions out;
  std::vector<double> u;
  std::vector<double> pi;
  for (const auto& m : series) {
    u.push_back(m.unemployment);
    pi.push_back(m.inflation);
  }
  try {
    out.phillips = fit_line(u, pi);
  } catch (const DegenerateX&) {
  }
  std::vector<double> du;
  std::vector<double> growth;
  for (std::size_t i = 1; i < series.size(); ++i) {
    du.push_back(series[i].unemployment - series[i - 1].unemployment);
    growth.push_back(series[i].gdp_growth);
  }
  try {
    out.okun = fit_line(du, growth);
  } catch (const DegenerateX&) {
  }
  return out;
}

void write_regression_report(std::ostream& os, const MacroRegressions& report) {
  auto line = [&os](std::string_view law, const std::optional<LineFit>& fit) {
    os << law << ": ";
    if (!fit) {
      os << "undefined (no variation in x)\n";
      return;
    }
    os << std::setprecision(10) << "slope=" << fit->slope << " intercept=" << fit->intercept << " r=" << fit->r << '\n';
  };
  line("phillips (unemployment vs inflation)", report.phillips);
  line("okun (change in unemployment vs gdp growth)", report.okun);
}

void write_indicators_csv(std::ostream& os, const std::vector<MacroIndicators>& series) {
  os << "month,unemployment,price_level,inflation,gdp,gdp_growth,interest_rate,tax_rate\n";
  const auto old = os.precision(17);
  for (const auto& m : series) {
    os << m.month << ',' << m.unemployment << ',' << m.price_level << ',' << m.inflation << ',' << m.gdp << ','
       << m.gdp_growth << ',' << m.interest_rate << ',' << m.tax_rate << '\n';
  }
  os.precision(old);
}

EconomyEnvironment::EconomyEnvironment(EconomyConfig config) : config_(std::move(config)) {
  if (config_.households == 0) throw std::invalid_argument("economy needs at least one household");
  if (!(config_.initial_price > 0.0)) throw std::invalid_argument("initial price must be positive");
  if (config_.params.price_adjustment >= 1.0 || config_.params.price_adjustment < 0.0) {
    throw std::invalid_argument("price_adjustment must lie in [0, 1) to keep prices positive");
  }
}

Schema EconomyEnvironment::action_schema() {
  using namespace schema;
  return object({required("work_propensity", number(), "how much to work this month, in [0, 1]"),
                 required("consumption_propensity", number(), "share of wealth plus income to spend, in [0, 1]")});
}

ObservationMap EconomyEnvironment::reset(std::uint64_t seed) {
  clear_events();
  state_ = EconomyState{};
  state_.policy = config_.policy;
  state_.price_level = config_.initial_price;
  state_.previous_price_level = config_.initial_price;
  RngStream skills = RngStream(seed).child("skills");
  for (std::uint32_t i = 0; i < config_.households; ++i) {
    HouseholdState h;
    h.agent = AgentId(i);
    h.skill = skills.uniform(config_.skill_min, config_.skill_max);
    h.wealth = config_.initial_wealth;
    h.monthly_wage = config_.wage;
    state_.households.emplace(h.agent, h);
  }
  indicators_.clear();
  ledgers_.clear();
  return observe();
}

ObservationMap EconomyEnvironment::observe() const {
  ObservationMap out;
  for (const auto& [id, h] : state_.households) {
    Observation obs;
    obs.agent_id = id;
    obs.time = state_.month;
    std::ostringstream os;
    os << std::setprecision(6);
    if (done()) {
      os << "The simulation has ended after " << state_.month << " months. Final wealth " << h.wealth << ".";
    } else {
      os << "Month " << state_.month + 1 << ". Your skill " << h.skill << ", wage " << h.monthly_wage
         << " per unit of skill, wealth " << h.wealth << ". Price level " << state_.price_level << ". Tax rate "
         << state_.policy.tax_rate << ", annual interest rate " << state_.policy.interest_rate << ".";
      if (!indicators_.empty()) {
        os << " Last month: unemployment " << indicators_.back().unemployment << ", inflation "
           << indicators_.back().inflation << ".";
      }
      obs.response_schema = action_schema();
    }
    obs.context_text = os.str();
    out.emplace(id, std::move(obs));
  }
  return out;
}

ObservationMap EconomyEnvironment::step(const ActionMap& actions) {
  if (done()) throw ContractViolation("economy step after the final month");
  const Schema schema = action_schema();
  std::map<AgentId, HouseholdAction> decisions;
  for (const auto& [id, h] : state_.households) {
    auto it = actions.find(id);
    HouseholdAction a;
    if (it == actions.end()) {
      emit(id, "reject_action", {{"reason", "no action submitted"}});
    } else if (auto violations = validate_action(it->second.body, schema); !violations.empty()) {
      emit(id, "reject_action", {{"reason", format_violations(violations)}});
    } else {
      a.work_propensity = it->second.body.at("work_propensity").get<double>();
      a.consumption_propensity = it->second.body.at("consumption_propensity").get<double>();
    }
    decisions[id] = a;
  }

  const std::map<AgentId, double> wealth_before = [&] {
    std::map<AgentId, double> w;
    for (const auto& [id, h] : state_.households) w[id] = h.wealth;
    return w;
  }();

  MonthResult result = monthly_step(decisions, state_, config_.params);
  for (const auto& c : result.clamped) {
    emit(c.agent, "clamp_action",
         {{"requested", {c.requested.work_propensity, c.requested.consumption_propensity}},
          {"applied", {c.applied.work_propensity, c.applied.consumption_propensity}}});
  }
  for (const auto& [id, h] : state_.households) {
    const auto& d = decisions.at(id);
    emit(id, "decision",
         {{"work_propensity", std::clamp(d.work_propensity, 0.0, 1.0)},
          {"consumption_propensity", std::clamp(d.consumption_propensity, 0.0, 1.0)},
          {"employed", h.employed_this_month},
          {"wealth_before", wealth_before.at(id)},
          {"wealth", h.wealth}});
  }
  indicators_.push_back(result.indicators);
  ledgers_.push_back(result.ledger);

  if (config_.tax_policy && state_.month % 12 == 0) {
    state_.policy.tax_rate = std::clamp(config_.tax_policy(state_.month / 12, result.indicators), 0.0, 1.0);
  }
  return observe();
}

PropensityHousehold::PropensityHousehold(AgentId id, double work, double consumption, double noise)
    : id_(id), work_(work), consumption_(consumption), noise_(noise) {}

ActionEnvelope PropensityHousehold::act(const Observation& obs) {
  double w = work_;
  double c = consumption_;
  if (noise_ > 0.0) {
    w = std::clamp(w + rng_.uniform(-noise_, noise_), 0.0, 1.0);
    c = std::clamp(c + rng_.uniform(-noise_, noise_), 0.0, 1.0);
  }
  return {id_, obs.time, {{"work_propensity", w}, {"consumption_propensity", c}}, {}};
}

}  // namespace agentlab::economy
