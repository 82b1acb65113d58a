#include "agentlab/env/auction.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace agentlab::auction {

using nlohmann::json;

std::string_view to_string(Objective objective) {
  return objective == Objective::profit_first ? "profit_first" : "item_first";
}

Objective objective_from_string(std::string_view s) {
  if (s == "profit_first") return Objective::profit_first;
  if (s == "item_first") return Objective::item_first;
  throw std::invalid_argument("unknown bidder objective '" + std::string(s) + "'");
}

RoundOutcome resolve_round(const std::map<AgentId, std::optional<double>>& bids, const RoundState& round,
                           const AuctionItem& item, const std::map<AgentId, double>& budgets, double min_increment) {
  RoundOutcome out;
  std::optional<StandingBid> best;
  for (const auto& [agent, bid] : bids) {
    if (!bid) continue;
    const double amount = *bid;
    auto reject = [&](std::string reason) { out.rejected.push_back({agent, amount, std::move(reason)}); };
    if (!round.active.empty() && !round.active.contains(agent)) {
      reject("not an active bidder");
      continue;
    }
    if (round.standing && round.standing->agent == agent) {
      reject("already holds the standing bid");
      continue;
    }
    const double floor = round.standing ? round.standing->amount + min_increment : item.starting_price;
    if (!(amount >= floor)) {
      reject("below the minimum acceptable bid");
      continue;
    }
    auto budget = budgets.find(agent);
    if (budget == budgets.end() || amount > budget->second) {
      reject("exceeds remaining budget");
      continue;
    }
    // Map iteration is ascending by AgentId, so strict > keeps the lowest id on ties.
    if (!best || amount > best->amount) best = StandingBid{agent, amount};
  }

  if (!best) {
    if (round.standing) {
      out.next = Sale{round.item_index, round.standing->agent, round.standing->amount};
    } else {
      out.next = Unsold{round.item_index};
    }
    return out;
  }
  RoundState next = round;
  next.standing = best;
  next.round = round.round + 1;
  out.next = std::move(next);
  return out;
}

void settle_sale(const Sale& sale, Bidders& bidders, const AuctionItem& item) {
  BidderState& winner = bidders.at(sale.winner);
  if (winner.budget < sale.price) {
    throw ContractViolation("winner " + to_string(sale.winner) + " cannot cover the sale price");
  }
  winner.budget -= sale.price;
  winner.items_won.push_back(item.name);
  winner.profit += item.true_value - sale.price;
}

void write_priority_csv(std::ostream& os, const PriorityReport& report) {
  os << "round,agent,item,score\n";
  const auto old = os.precision(17);
  for (const auto& r : report) os << r.round << ',' << r.agent << ',' << r.item << ',' << r.score << '\n';
  os.precision(old);
}

std::vector<AuctionItem> parse_items(std::istream& in) {
  std::vector<AuctionItem> items;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json j = json::parse(line);
    AuctionItem item{j.at("name").get<std::string>(), j.at("starting_price").get<double>(),
                     j.at("true_value").get<double>(), j.at("estimated_value").get<double>()};
    if (!(item.starting_price > 0 && item.true_value > 0 && item.estimated_value > 0)) {
      throw std::invalid_argument("item " + item.name + ": prices and values must be positive");
    }
    if (item.estimated_value < item.true_value) {
      throw std::invalid_argument("item " + item.name + ": estimated_value must not be below true_value");
    }
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<AuctionItem> load_items(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open items file " + path);
  return parse_items(in);
}

AuctionEnvironment::AuctionEnvironment(AuctionConfig config) : config_(std::move(config)) {
  if (config_.bidders < 2) throw std::invalid_argument("an auction needs at least two bidders");
  if (!(config_.min_increment > 0.0)) throw std::invalid_argument("min_increment must be positive");
}

Schema AuctionEnvironment::action_schema() {
  using namespace schema;
  return object({
      optional("bid", number(), "amount to bid on the current item; omit or null to pass"),
      required("priorities", map_of(within(number(), 0.0, 100.0)),
               "priority score in [0, 100] for each remaining item"),
  });
}

const std::optional<AuctionItem> AuctionEnvironment::current_item() const {
  if (done()) return std::nullopt;
  return items_[round_.item_index];
}

void AuctionEnvironment::start_item(std::size_t index) {
  round_ = RoundState{};
  round_.item_index = index;
  for (const auto& [id, b] : bidders_) round_.active.insert(id);
}

ObservationMap AuctionEnvironment::reset(std::uint64_t seed) {
  clear_events();
  items_ = config_.items;
  if (config_.shuffle_items) {
    RngStream rng = RngStream(seed).child("item-order");
    for (std::size_t i = items_.size(); i > 1; --i) std::swap(items_[i - 1], items_[rng.below(i)]);
  }
  bidders_.clear();
  for (std::uint32_t i = 0; i < config_.bidders; ++i) {
    BidderState b;
    b.agent = AgentId(i);
    b.initial_budget = i < config_.budgets.size() ? config_.budgets[i] : config_.budget;
    b.budget = b.initial_budget;
    b.objective = i < config_.objectives.size() ? config_.objectives[i] : Objective::profit_first;
    bidders_.emplace(b.agent, std::move(b));
  }
  time_ = 0;
  global_round_ = 0;
  priorities_.clear();
  sales_.clear();
  unsold_.clear();
  standing_history_.clear();
  start_item(0);
  return observe();
}

std::string AuctionEnvironment::context_for(AgentId id) const {
  const BidderState& me = bidders_.at(id);
  const AuctionItem& item = items_[round_.item_index];
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "Item " << round_.item_index + 1 << " of " << items_.size() << ": " << item.name << ", starting price "
     << item.starting_price << ", estimated value " << item.estimated_value << ". Round " << round_.round << ".";
  if (round_.standing) {
    os << "\nStanding bid: " << round_.standing->amount << " by "
       << (round_.standing->agent == id ? std::string("you") : "bidder " + to_string(round_.standing->agent)) << ".";
  } else {
    os << "\nNo bids yet.";
  }
  os << "\nYour remaining budget: " << me.budget << ". Items won: " << me.items_won.size() << ". Profit so far: "
     << me.profit << ". Objective: " << to_string(me.objective) << ".";
  os << "\nRemaining items:";
  for (std::size_t i = round_.item_index; i < items_.size(); ++i) {
    os << "\n- " << items_[i].name << " (starting " << items_[i].starting_price << ", estimated "
       << items_[i].estimated_value << ")";
  }
  return os.str();
}

ObservationMap AuctionEnvironment::observe() const {
  ObservationMap out;
  for (const auto& [id, b] : bidders_) {
    Observation obs;
    obs.agent_id = id;
    obs.time = time_;
    if (done()) {
      std::ostringstream os;
      os << std::fixed << std::setprecision(2) << "The auction is over. Final profit " << b.profit << ", items won "
         << b.items_won.size() << ".";
      obs.context_text = os.str();
    } else {
      obs.context_text = context_for(id);
      obs.response_schema = action_schema();
    }
    out.emplace(id, std::move(obs));
  }
  return out;
}

ObservationMap AuctionEnvironment::step(const ActionMap& actions) {
  if (done()) throw ContractViolation("auction step after the last item");
  ++global_round_;
  const AuctionItem& item = items_[round_.item_index];
  const Schema schema = action_schema();

  std::map<AgentId, std::optional<double>> bids;
  std::map<AgentId, double> budgets;
  for (const auto& [id, b] : bidders_) {
    bids[id] = std::nullopt;
    budgets[id] = b.budget;
  }
  for (const auto& [id, envelope] : actions) {
    if (!bidders_.contains(id)) throw ContractViolation("bid from unknown agent " + to_string(id));
    if (auto violations = validate_action(envelope.body, schema); !violations.empty()) {
      emit(id, "reject_bid", {{"item", item.name}, {"round", round_.round}, {"reason", format_violations(violations)}});
      continue;
    }
    for (const auto& [name, score] : envelope.body.at("priorities").items()) {
      priorities_.push_back({global_round_, id, name, score.get<double>()});
    }
    if (envelope.body.contains("bid") && envelope.body["bid"].is_number()) bids[id] = envelope.body["bid"].get<double>();
  }

  RoundOutcome outcome = resolve_round(bids, round_, item, budgets, config_.min_increment);
  std::set<AgentId> rejected;
  for (const auto& r : outcome.rejected) {
    rejected.insert(r.agent);
    emit(r.agent, "reject_bid", {{"item", item.name}, {"round", round_.round}, {"amount", r.amount}, {"reason", r.reason}});
  }
  for (const auto& [id, bid] : bids) {
    if (bid && !rejected.contains(id)) {
      emit(id, "bid", {{"item", item.name}, {"round", round_.round}, {"amount", *bid}});
    }
  }

  if (auto* next = std::get_if<RoundState>(&outcome.next)) {
    round_ = std::move(*next);
    standing_history_[round_.item_index].push_back(round_.standing->amount);
  } else {
    if (auto* sale = std::get_if<Sale>(&outcome.next)) {
      settle_sale(*sale, bidders_, item);
      sales_.push_back(*sale);
      emit(sale->winner, "sale",
           {{"item", item.name},
            {"price", sale->price},
            {"true_value", item.true_value},
            {"profit", item.true_value - sale->price}});
    } else {
      unsold_.push_back(std::get<Unsold>(outcome.next));
    }
    start_item(round_.item_index + 1);
  }
  ++time_;
  return observe();
}

AuctionOutcome run_auction(const AuctionConfig& config, const AgentRoster& agents, std::uint64_t seed,
                           std::size_t max_steps) {
  AuctionEnvironment env(config);
  AuctionOutcome out;
  out.log = run_episode(env, agents, max_steps, seed);
  out.bidders = env.bidders();
  out.priorities = env.priorities();
  out.sales = env.sales();
  return out;
}

IncrementBidder::IncrementBidder(const AuctionEnvironment& env, AgentId id, double increment, double participation,
                                 std::optional<double> spend_cap)
    : env_(env), id_(id), increment_(increment), participation_(participation), spend_cap_(spend_cap) {}

ActionEnvelope IncrementBidder::act(const Observation& obs) {
  ActionEnvelope out{id_, obs.time, AuctionEnvironment::passive_action(), {}};
  const auto item = env_.current_item();
  if (!item) return out;

  const auto& round = env_.round();
  for (std::size_t i = round.item_index; i < env_.items().size(); ++i) {
    out.body["priorities"][env_.items()[i].name] = i == round.item_index ? 100.0 : 50.0;
  }
  if (participation_ < 1.0 && !rng_.bernoulli(participation_)) return out;
  if (round.standing && round.standing->agent == id_) return out;

  const double next = round.standing ? round.standing->amount + increment_ : item->starting_price;
  double limit = env_.bidders().at(id_).budget;
  if (spend_cap_) limit = std::min(limit, *spend_cap_ - env_.bidders().at(id_).spent());
  if (next <= limit) out.body["bid"] = next;
  return out;
}

}  // namespace agentlab::auction
