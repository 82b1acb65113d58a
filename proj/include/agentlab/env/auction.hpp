#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "agentlab/core/environment.hpp"
#include "agentlab/core/episode.hpp"
#include "agentlab/core/errors.hpp"

namespace agentlab::auction {

// estimated_value is what bidders see; it overstates true_value on purpose.
struct AuctionItem {
  std::string name;
  double starting_price = 0.0;
  double true_value = 0.0;
  double estimated_value = 0.0;
};

enum class Objective { profit_first, item_first };

std::string_view to_string(Objective objective);
Objective objective_from_string(std::string_view s);

struct BidderState {
  AgentId agent;
  double initial_budget = 0.0;
  double budget = 0.0;
  std::vector<std::string> items_won;
  double profit = 0.0;
  Objective objective = Objective::profit_first;

  double spent() const { return initial_budget - budget; }
};

using Bidders = std::map<AgentId, BidderState>;

struct StandingBid {
  AgentId agent;
  double amount = 0.0;
};

struct RoundState {
  std::size_t item_index = 0;
  std::optional<StandingBid> standing;
  int round = 1;
  std::set<AgentId> active;
};

struct Sale {
  std::size_t item_index = 0;
  AgentId winner;
  double price = 0.0;
};

struct Unsold {
  std::size_t item_index = 0;
};

struct BidRejection {
  AgentId agent;
  double amount = 0.0;
  std::string reason;
};

struct RoundOutcome {
  std::variant<RoundState, Sale, Unsold> next;
  std::vector<BidRejection> rejected;
};

// One ascending-price round. A bid is valid when it is at least the starting
// price (no standing bid yet) or at least standing + min_increment, does not
// exceed the bidder's remaining budget, and does not come from the current
// standing bidder. Invalid bids count as passes. With no valid bid the item
// sells to the standing bidder, or goes unsold if nobody ever bid. Otherwise
// the highest bid stands, equal bids going to the lowest AgentId.
RoundOutcome resolve_round(const std::map<AgentId, std::optional<double>>& bids, const RoundState& round,
                           const AuctionItem& item, const std::map<AgentId, double>& budgets,
                           double min_increment = 1.0);

// budget -= price; items_won += item; profit += true_value - price.
void settle_sale(const Sale& sale, Bidders& bidders, const AuctionItem& item);

struct PriorityRow {
  int round = 0;
  AgentId agent;
  std::string item;
  double score = 0.0;
};

using PriorityReport = std::vector<PriorityRow>;

// Columns: round, agent, item, score.
void write_priority_csv(std::ostream& os, const PriorityReport& report);

// Newline-delimited {name, starting_price, true_value, estimated_value}.
std::vector<AuctionItem> parse_items(std::istream& in);
std::vector<AuctionItem> load_items(const std::string& path);

struct AuctionConfig {
  std::vector<AuctionItem> items;
  std::size_t bidders = 3;
  double budget = 20000.0;
  // Per-bidder budgets; when shorter than `bidders` the rest use `budget`.
  std::vector<double> budgets;
  std::vector<Objective> objectives;
  double min_increment = 1.0;
  bool shuffle_items = false;
};

// Sequential English auction. Event log actions: bid, reject_bid, sale.
class AuctionEnvironment final : public Environment {
 public:
  explicit AuctionEnvironment(AuctionConfig config);

  std::string_view name() const override { return "auction"; }
  ObservationMap reset(std::uint64_t seed) override;
  ObservationMap step(const ActionMap& actions) override;
  bool done() const override { return round_.item_index >= items_.size(); }
  TimeStep time() const override { return time_; }

  static Schema action_schema();
  static nlohmann::json passive_action() { return {{"priorities", nlohmann::json::object()}}; }

  const AuctionConfig& config() const { return config_; }
  const std::vector<AuctionItem>& items() const { return items_; }
  const Bidders& bidders() const { return bidders_; }
  const RoundState& round() const { return round_; }
  const std::optional<AuctionItem> current_item() const;
  const PriorityReport& priorities() const { return priorities_; }
  const std::vector<Sale>& sales() const { return sales_; }
  const std::vector<Unsold>& unsold() const { return unsold_; }
  // Standing amounts in the order they were set, per item index.
  const std::map<std::size_t, std::vector<double>>& standing_history() const { return standing_history_; }
  int rounds_played() const { return global_round_; }

 private:
  ObservationMap observe() const;
  std::string context_for(AgentId id) const;
  void start_item(std::size_t index);

  AuctionConfig config_;
  std::vector<AuctionItem> items_;
  Bidders bidders_;
  RoundState round_;
  TimeStep time_ = 0;
  int global_round_ = 0;
  PriorityReport priorities_;
  std::vector<Sale> sales_;
  std::vector<Unsold> unsold_;
  std::map<std::size_t, std::vector<double>> standing_history_;
};

struct AuctionOutcome {
  Bidders bidders;
  PriorityReport priorities;
  EpisodeLog log;
  std::vector<Sale> sales;
};

// Runs every item to completion with the given agents.
AuctionOutcome run_auction(const AuctionConfig& config, const AgentRoster& agents, std::uint64_t seed,
                           std::size_t max_steps = 1'000'000);

// Raises the standing bid by a fixed increment while it can afford to. With
// participation below 1 it sits out a round at random.
class IncrementBidder final : public AgentPolicy {
 public:
  IncrementBidder(const AuctionEnvironment& env, AgentId id, double increment, double participation = 1.0,
                  std::optional<double> spend_cap = std::nullopt);
  ActionEnvelope act(const Observation& obs) override;
  void seed(const RngStream& stream) override { rng_ = stream; }

 private:
  const AuctionEnvironment& env_;
  AgentId id_;
  double increment_;
  double participation_;
  std::optional<double> spend_cap_;
  RngStream rng_{0};
};

}  // namespace agentlab::auction
