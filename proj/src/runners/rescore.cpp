#include <cmath>
#include <limits>
#include <set>

#include "agentlab/runners/runners.hpp"

namespace agentlab::runners {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double count(const std::vector<EventRecord>& records, std::string_view action) {
  return static_cast<double>(filter_action(records, action).size());
}

}  // namespace

std::map<std::string, double> score_events(const std::vector<EventRecord>& records, const EnvSpec& spec) {
  std::map<std::string, double> m;
  switch (spec.kind) {
    case EnvKind::market: {
      const auto& c = std::get<market::MarketConfig>(spec.params);
      std::vector<std::string> symbols;
      for (const auto& s : c.stocks) {
        symbols.push_back(s.symbol);
        m[s.symbol + ".volume"] = 0.0;
        m[s.symbol + ".buy_sell_ratio"] = kNaN;
      }
      for (const auto& t : filter_action(records, "trade")) {
        m[t.info.at("symbol").get<std::string>() + ".volume"] += t.info.at("quantity").get<double>();
      }
      try {
        for (const auto& [s, r] : market::buy_sell_ratio(records, symbols, 1, c.days)) m[s + ".buy_sell_ratio"] = r;
      } catch (const market::UndefinedRatio&) {
      }
      m["trades"] = count(records, "trade");
      break;
    }
    case EnvKind::auction: {
      double revenue = 0.0;
      double profit = 0.0;
      for (const auto& s : filter_action(records, "sale")) {
        revenue += s.info.at("price").get<double>();
        profit += s.info.at("profit").get<double>();
      }
      m["items_sold"] = count(records, "sale");
      m["revenue"] = revenue;
      m["total_profit"] = profit;
      m["rejected_bids"] = count(records, "reject_bid");
      break;
    }
    case EnvKind::economy: {
      std::map<TimeStep, std::pair<double, double>> months;  // employed, total
      for (const auto& d : filter_action(records, "decision")) {
        auto& [employed, total] = months[d.current_time];
        employed += d.info.at("employed").get<bool>() ? 1.0 : 0.0;
        total += 1.0;
      }
      double sum = 0.0;
      for (const auto& [month, et] : months) sum += 1.0 - et.first / et.second;
      m["months"] = static_cast<double>(months.size());
      m["mean_unemployment"] = months.empty() ? kNaN : sum / static_cast<double>(months.size());
      m["clamped_actions"] = count(records, "clamp_action");
      break;
    }
    case EnvKind::social: {
      const auto state = social::replay_events(records);
      double likes = 0.0;
      for (const auto& p : state.posts) likes += static_cast<double>(p.likes.size());
      m["posts"] = static_cast<double>(state.posts.size());
      m["comments"] = static_cast<double>(state.comments.size());
      m["likes"] = likes;
      m["rejected"] = count(records, "reject_action");
      break;
    }
    case EnvKind::questionnaire: {
      const auto& items = std::get<questionnaire::QuestionnaireConfig>(spec.params).items;
      std::map<AgentId, questionnaire::ResponseSheet> sheets;
      for (const auto& a : filter_action(records, "answer")) {
        sheets[a.user_id].responses[a.info.at("item_id").get<std::string>()] = a.info.at("value").get<double>();
      }
      std::map<std::string, std::vector<double>> values;
      for (const auto& [id, sheet] : sheets) {
        const auto report = questionnaire::score(sheet, items);
        for (const auto& s : report.subscales) values["subscale." + s.subscale].push_back(s.normalized_mean);
        for (const auto& b : report.biases) values["bias." + b.pair_id].push_back(b.bias);
      }
      for (const auto& [k, v] : values) m[k] = mean_stddev(v).mean;
      break;
    }
  }
  return m;
}

}  // namespace agentlab::runners
