#include <cmath>
#include <mutex>
#include <ostream>

#include "agentlab/runners/runners.hpp"

namespace agentlab::runners {

RunInputs ablation_inputs(const RunInputs& base, const AblationSpec& spec, int level) {
  if (level < 1 || level > 4) throw ContractViolation("ablation settings are levels 1 to 4");
  if (base.environment.kind != EnvKind::market) throw ContractViolation("ablation runs need a market");
  RunInputs in = base;
  for (auto& g : in.agents) {
    if (g.policy != "llm") continue;
    if (level >= 2) g.persona.extra_directives.push_back(spec.headline);
    if (level >= 3) g.notes.push_back(spec.summary);
  }
  if (level >= 4) {
    auto& market = std::get<market::MarketConfig>(in.environment.params);
    market.news_tool = true;
    market.news = spec.news;
  }
  return in;
}

AblationResult run_tariff_ablation(const RunInputs& base, const AblationSpec& spec, std::uint64_t base_seed,
                                   int trials) {
  AblationResult result;
  const auto& market = std::get<market::MarketConfig>(base.environment.params);
  for (const auto& s : market.stocks) result.symbols.push_back(s.symbol);
  const int last_day = spec.last_day.value_or(market.days);

  for (int level : spec.settings) {
    const RunInputs inputs = ablation_inputs(base, spec, level);
    AblationRow row;
    row.setting = level;

    // The first prompt is captured from a separate run of trial 0 so the
    // trials themselves stay untouched.
    std::mutex mu;
    {
      auto probe = run_single(inputs, base_seed, [&](const CompletionRequest& req) {
        std::lock_guard lock(mu);
        if (row.sample_prompt.empty()) row.sample_prompt = render_turns(req.turns);
      });
    }
    row.trials = run_trials(inputs, base_seed, trials);

    for (const auto& symbol : result.symbols) {
      double sum = 0.0;
      int n = 0;
      for (const auto& t : row.trials.rows) {
        if (t.error) continue;
        double r = std::nan("");
        try {
          r = market::buy_sell_ratio(t.log.records, {symbol}, spec.first_day, last_day).at(symbol);
        } catch (const market::UndefinedRatio&) {
        }
        sum += r;
        ++n;
      }
      row.ratio[symbol] = n == 0 ? std::nan("") : sum / n;
    }
    if (!result.rows.empty()) {
      for (const auto& symbol : result.symbols) {
        row.delta[symbol] = row.ratio[symbol] - result.rows.back().ratio.at(symbol);
      }
    } else {
      for (const auto& symbol : result.symbols) row.delta[symbol] = std::nullopt;
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

void write_ablation_csv(std::ostream& os, const AblationResult& result) {
  const auto old = os.precision(17);
  os << "setting";
  for (const auto& s : result.symbols) os << ',' << s;
  for (const auto& s : result.symbols) os << ",delta_" << s;
  os << '\n';
  for (const auto& row : result.rows) {
    os << row.setting;
    for (const auto& s : result.symbols) os << ',' << row.ratio.at(s);
    for (const auto& s : result.symbols) {
      os << ',';
      if (const auto& d = row.delta.at(s)) os << *d;
    }
    os << '\n';
  }
  os.precision(old);
}

}  // namespace agentlab::runners
