#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "agentlab/core/environment.hpp"
#include "agentlab/core/errors.hpp"

namespace agentlab::market {

enum class Side { buy, sell };

std::string_view to_string(Side side);

// Sessions advance session-major: (d,1) -> (d,2) -> ... -> (d+1,1).
struct MarketClock {
  int day = 1;
  int session = 1;

  void advance(int sessions_per_day);
  friend auto operator<=>(const MarketClock&, const MarketClock&) = default;
};

struct Order {
  std::int64_t id = 0;
  AgentId agent;
  std::string symbol;
  Side side = Side::buy;
  double limit_price = 0.0;
  std::int64_t quantity = 0;
  MarketClock submitted_at;
};

struct Trade {
  std::int64_t buy_order = 0;
  std::int64_t sell_order = 0;
  std::int64_t quantity = 0;

  friend bool operator==(const Trade&, const Trade&) = default;
};

struct ClearingResult {
  double price = 0.0;
  std::vector<Trade> trades;
  // Orders, or the unfilled remainder of orders, left after matching.
  std::vector<Order> unmatched;

  std::int64_t volume() const;
};

// Matched volume if the session cleared at `price`.
std::int64_t volume_at(std::span<const Order> book, double price);

// Single-price call auction over one symbol's book. Candidate prices are the
// distinct limit prices; the winner maximizes matched volume, then minimizes
// |price - prev_price|, then is the lower price. Buys are filled from the
// highest limit down and sells from the lowest up, by order id within a price
// level. Without a cross the price stays at prev_price and nothing trades.
// Throws ContractViolation if an agent's buy limit reaches its own sell limit.
ClearingResult clear_session(std::span<const Order> book, double prev_price);

struct TraderAccount {
  double cash = 0.0;
  std::map<std::string, std::int64_t> holdings;
  double loan_principal = 0.0;
  std::string style;
};

using Accounts = std::map<AgentId, TraderAccount>;

// Moves cash and shares for every trade at the clearing price.
void settle(const ClearingResult& result, std::span<const Order> book, Accounts& accounts);

class LoanRefused : public Error {
 public:
  LoanRefused(double requested, double available)
      : Error("loan of " + std::to_string(requested) + " refused; at most " + std::to_string(available) +
              " available under the loan-to-value limit"),
        available_(available) {}
  double available() const { return available_; }

 private:
  double available_;
};

// cash + marked-to-market holdings.
double portfolio_value(const TraderAccount& account, const std::map<std::string, double>& prices);
// loan_to_value * portfolio value - existing principal, floored at 0.
double max_new_loan(const TraderAccount& account, const std::map<std::string, double>& prices, double loan_to_value);
// Compounds every principal by (1 + rate); returns the total interest added.
double accrue_interest(Accounts& accounts, double rate);
// Adds `amount` to cash and principal, or throws LoanRefused.
void grant_loan(TraderAccount& account, double amount, const std::map<std::string, double>& prices, double loan_to_value);

struct NewsItem {
  std::string date;  // YYYY-MM-DD
  std::string headline;
  std::string body;
};

// Newline-delimited {date, headline, body}; dates must be unique.
std::vector<NewsItem> parse_news_feed(std::istream& in);
std::vector<NewsItem> load_news_feed(const std::string& path);

// The item dated `date`, or "no news available".
std::string fetch_news(std::span<const NewsItem> feed, std::string_view date);

// Calendar date `offset` days after `start` (both YYYY-MM-DD).
std::string add_days(const std::string& start, int offset);

struct StockProfile {
  std::string symbol;
  double initial_price = 0.0;
  std::string profile_text;
};

struct DayEvent {
  int day = 1;
  std::string text;
};

struct MarketConfig {
  std::size_t agents = 50;
  int days = 10;
  int sessions_per_day = 3;
  double initial_cash = 100000.0;
  std::map<std::string, std::int64_t> initial_holdings{{"A", 100}, {"B", 100}};
  std::vector<StockProfile> stocks{
      {"A", 30.0, "Chemical manufacturer, listed for ten years, steady operations."},
      {"B", 45.0, "Technology company, listed three years ago, fast growing."}};
  double interest_rate = 0.01;
  double loan_to_value = 0.5;
  std::string start_date = "2025-04-01";
  bool forum_tool = true;
  bool news_tool = false;
  std::vector<NewsItem> news;
  std::vector<DayEvent> events;
  std::vector<std::string> styles{"Conservative", "Aggressive", "Balanced", "Growth-Oriented"};
};

struct SessionMetrics {
  int day = 0;
  int session = 0;
  std::string symbol;
  double price = 0.0;
  std::int64_t volume = 0;
  int n_buys = 0;
  int n_sells = 0;
};

struct ForumPost {
  AgentId agent;
  int day = 0;
  std::string text;
};

// Two-stock market with one call auction per symbol per session. Event log
// actions: submit_order, reject_order, trade, loan, forum_post.
class MarketEnvironment final : public Environment {
 public:
  explicit MarketEnvironment(MarketConfig config);

  std::string_view name() const override { return "market"; }
  ObservationMap reset(std::uint64_t seed) override;
  ObservationMap step(const ActionMap& actions) override;
  bool done() const override { return clock_.day > config_.days; }
  TimeStep time() const override { return time_; }

  static Schema action_schema();
  static nlohmann::json passive_action() { return {{"orders", nlohmann::json::array()}}; }

  const MarketConfig& config() const { return config_; }
  const MarketClock& clock() const { return clock_; }
  std::string current_date() const { return add_days(config_.start_date, clock_.day - 1); }
  const Accounts& accounts() const { return accounts_; }
  const std::map<std::string, double>& prices() const { return prices_; }
  const std::vector<double>& price_history(const std::string& symbol) const { return history_.at(symbol); }
  const std::vector<SessionMetrics>& metrics() const { return metrics_; }
  const std::vector<ForumPost>& forum() const { return forum_; }
  double total_interest() const { return total_interest_; }
  double total_loans() const { return total_loans_; }
  std::string style_of(AgentId id) const;

  // Forum posts from the day before `day`.
  std::string read_forum(int day) const;

 private:
  void process_action(AgentId id, const nlohmann::json& body, std::vector<Order>& book,
                      std::map<AgentId, double>& reserved_cash,
                      std::map<std::pair<AgentId, std::string>, std::int64_t>& reserved_shares);
  ObservationMap observe() const;
  std::string context_for(AgentId id) const;

  MarketConfig config_;
  MarketClock clock_;
  TimeStep time_ = 0;
  Accounts accounts_;
  std::map<std::string, double> prices_;
  std::map<std::string, std::vector<double>> history_;
  std::vector<SessionMetrics> metrics_;
  std::vector<ForumPost> forum_;
  std::int64_t next_order_id_ = 1;
  double total_interest_ = 0.0;
  double total_loans_ = 0.0;
};

class UndefinedRatio : public Error {
 public:
  using Error::Error;
};

// Mean over days in [first_day, last_day] of submitted buys / submitted sells,
// per symbol, from submit_order records. Throws UndefinedRatio for a day
// without sells.
std::map<std::string, double> buy_sell_ratio(const std::vector<EventRecord>& records,
                                             const std::vector<std::string>& symbols, int first_day, int last_day);

// (last - first) / first. Requires at least two prices.
double price_change_rate(std::span<const double> history);

// Columns: day, session, symbol, price, volume, n_buys, n_sells.
void write_metrics_csv(std::ostream& os, const std::vector<SessionMetrics>& metrics);

// Seeded random trader: at most one order per session near the last price.
class NoiseTrader final : public AgentPolicy {
 public:
  NoiseTrader(const MarketEnvironment& env, AgentId id, double activity = 0.6);
  ActionEnvelope act(const Observation& obs) override;
  void seed(const RngStream& stream) override { rng_ = stream; }

 private:
  const MarketEnvironment& env_;
  AgentId id_;
  double activity_;
  RngStream rng_{0};
};

}  // namespace agentlab::market
