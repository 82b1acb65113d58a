#include <gtest/gtest.h>

#include <sstream>

#include "agentlab/env/auction.hpp"

using namespace agentlab;
using namespace agentlab::auction;

namespace {

const AuctionItem kVase{"vase", 100, 300, 400};

RoundState open_round() {
  RoundState r;
  r.active = {AgentId(0), AgentId(1), AgentId(2)};
  return r;
}

std::map<AgentId, double> budgets(double b = 1000) { return {{AgentId(0), b}, {AgentId(1), b}, {AgentId(2), b}}; }

std::vector<AuctionItem> catalog(std::size_t n) {
  std::vector<AuctionItem> items;
  for (std::size_t i = 0; i < n; ++i) {
    const double start = 500.0 + 250.0 * static_cast<double>(i);
    items.push_back({"item" + std::to_string(i), start, start * 2, start * 2.5});
  }
  return items;
}

struct Run {
  std::unique_ptr<AuctionEnvironment> env;
  std::vector<std::unique_ptr<IncrementBidder>> bidders;
  EpisodeLog log;
};

Run run(const AuctionConfig& cfg, std::uint64_t seed, double increment, double participation) {
  Run r;
  r.env = std::make_unique<AuctionEnvironment>(cfg);
  AgentRoster roster;
  for (std::uint32_t i = 0; i < cfg.bidders; ++i) {
    r.bidders.push_back(std::make_unique<IncrementBidder>(*r.env, AgentId(i), increment, participation));
    roster[AgentId(i)] = r.bidders.back().get();
  }
  r.log = run_episode(*r.env, roster, 1'000'000, seed);
  return r;
}

}  // namespace

TEST(Round, FirstBidMustReachStartingPrice) {
  auto out = resolve_round({{AgentId(0), 99.0}, {AgentId(1), 100.0}, {AgentId(2), std::nullopt}}, open_round(), kVase,
                           budgets());
  auto* next = std::get_if<RoundState>(&out.next);
  ASSERT_NE(next, nullptr);
  EXPECT_EQ(next->standing->agent, AgentId(1));
  EXPECT_EQ(next->round, 2);
  ASSERT_EQ(out.rejected.size(), 1u);
  EXPECT_EQ(out.rejected[0].reason, "below the minimum acceptable bid");
}

TEST(Round, TiesGoToLowestId) {
  auto out = resolve_round({{AgentId(2), 150.0}, {AgentId(1), 150.0}}, open_round(), kVase, budgets());
  EXPECT_EQ(std::get<RoundState>(out.next).standing->agent, AgentId(1));
}

TEST(Round, IncrementBudgetAndStandingRules) {
  RoundState r = open_round();
  r.standing = StandingBid{AgentId(0), 200};
  auto out = resolve_round({{AgentId(0), 500.0}, {AgentId(1), 200.5}, {AgentId(2), 2000.0}}, r, kVase, budgets(), 1.0);
  ASSERT_EQ(out.rejected.size(), 3u);
  EXPECT_EQ(out.rejected[0].reason, "already holds the standing bid");
  EXPECT_EQ(out.rejected[1].reason, "below the minimum acceptable bid");
  EXPECT_EQ(out.rejected[2].reason, "exceeds remaining budget");
  auto* sale = std::get_if<Sale>(&out.next);
  ASSERT_NE(sale, nullptr);
  EXPECT_EQ(sale->winner, AgentId(0));
  EXPECT_DOUBLE_EQ(sale->price, 200);
}

TEST(Round, NoBidsAtAllIsUnsold) {
  auto out = resolve_round({{AgentId(0), std::nullopt}}, open_round(), kVase, budgets());
  EXPECT_TRUE(std::holds_alternative<Unsold>(out.next));
}

TEST(Settle, UpdatesWinner) {
  Bidders b{{AgentId(0), {AgentId(0), 1000, 1000, {}, 0, Objective::profit_first}}};
  settle_sale({0, AgentId(0), 250}, b, kVase);
  EXPECT_DOUBLE_EQ(b[AgentId(0)].budget, 750);
  EXPECT_DOUBLE_EQ(b[AgentId(0)].profit, 50);
  EXPECT_DOUBLE_EQ(b[AgentId(0)].spent(), 250);
  EXPECT_EQ(b[AgentId(0)].items_won, std::vector<std::string>{"vase"});
  EXPECT_THROW(settle_sale({0, AgentId(0), 751}, b, kVase), ContractViolation);
}

TEST(Items, ParseAndValidate) {
  std::istringstream ok(R"({"name":"a","starting_price":10,"true_value":20,"estimated_value":25})");
  EXPECT_EQ(parse_items(ok).size(), 1u);
  std::istringstream under(R"({"name":"a","starting_price":10,"true_value":20,"estimated_value":15})");
  EXPECT_THROW(parse_items(under), std::invalid_argument);
  EXPECT_EQ(objective_from_string("item_first"), Objective::item_first);
  EXPECT_THROW(objective_from_string("x"), std::invalid_argument);
}

TEST(Environment, SeededRunsHoldInvariants) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    AuctionConfig cfg;
    cfg.items = catalog(6);
    cfg.bidders = 3;
    cfg.budget = 6000;
    cfg.shuffle_items = seed % 2 == 1;
    auto r = run(cfg, seed, 100.0 + static_cast<double>(seed % 7) * 50.0, 0.7);
    const auto& env = *r.env;
    ASSERT_TRUE(env.done());
    EXPECT_EQ(env.sales().size() + env.unsold().size(), env.items().size());
    std::set<std::size_t> sold;
    double revenue = 0;
    for (const auto& s : env.sales()) {
      EXPECT_TRUE(sold.insert(s.item_index).second);
      const auto& item = env.items()[s.item_index];
      EXPECT_GE(s.price, item.starting_price);
      const auto& hist = env.standing_history().at(s.item_index);
      EXPECT_DOUBLE_EQ(hist.back(), s.price);
      for (std::size_t k = 1; k < hist.size(); ++k) EXPECT_GE(hist[k], hist[k - 1] + cfg.min_increment);
      revenue += s.price;
    }
    double spent = 0;
    double profit = 0;
    for (const auto& [id, b] : env.bidders()) {
      EXPECT_GE(b.budget, 0);
      spent += b.spent();
      profit += b.profit;
    }
    EXPECT_NEAR(spent, revenue, 1e-9);
    double value = 0;
    for (const auto& s : env.sales()) value += env.items()[s.item_index].true_value;
    EXPECT_NEAR(profit, value - revenue, 1e-9);
    EXPECT_EQ(filter_action(r.log.records, "sale").size(), env.sales().size());
  }
}

TEST(Environment, ShuffleIsSeeded) {
  AuctionConfig cfg;
  cfg.items = catalog(8);
  cfg.shuffle_items = true;
  AuctionEnvironment a(cfg);
  AuctionEnvironment b(cfg);
  a.reset(5);
  b.reset(5);
  std::vector<std::string> na, nb;
  for (const auto& i : a.items()) na.push_back(i.name);
  for (const auto& i : b.items()) nb.push_back(i.name);
  EXPECT_EQ(na, nb);
  b.reset(6);
  nb.clear();
  for (const auto& i : b.items()) nb.push_back(i.name);
  EXPECT_NE(na, nb);
}

TEST(Environment, PrioritiesAreRecordedAndValidated) {
  AuctionConfig cfg;
  cfg.items = catalog(2);
  AuctionEnvironment env(cfg);
  env.reset(0);
  ActionMap acts;
  acts[AgentId(0)] = {AgentId(0), 0, {{"bid", 500}, {"priorities", {{"item0", 90}, {"item1", 10}}}}, {}};
  acts[AgentId(1)] = {AgentId(1), 0, {{"priorities", {{"item0", 150}}}}, {}};
  acts[AgentId(2)] = {AgentId(2), 0, AuctionEnvironment::passive_action(), {}};
  env.step(acts);
  EXPECT_EQ(env.priorities().size(), 2u);
  std::ostringstream os;
  write_priority_csv(os, env.priorities());
  EXPECT_EQ(os.str(), "round,agent,item,score\n1,0,item0,90\n1,0,item1,10\n");
  bool rejected = false;
  for (const auto& e : env.drain_events()) rejected |= e.action == "reject_bid" && e.user_id == AgentId(1);
  EXPECT_TRUE(rejected);
  EXPECT_EQ(env.round().standing->agent, AgentId(0));
}
