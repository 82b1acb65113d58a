#include <gtest/gtest.h>

#include <sstream>

#include "agentlab/core/episode.hpp"
#include "agentlab/env/market.hpp"
#include "support/oracles.hpp"

using namespace agentlab;
using namespace agentlab::market;
using nlohmann::json;

namespace {

Order order(std::int64_t id, std::uint32_t agent, Side side, double price, std::int64_t qty) {
  return {id, AgentId(agent), "A", side, price, qty, {}};
}

std::vector<Order> random_book(RngStream& rng, std::size_t max_orders) {
  std::vector<Order> book;
  const auto n = rng.below(max_orders + 1);
  for (std::uint64_t i = 0; i < n; ++i) {
    // Agent i places one order, so no self-cross is possible.
    book.push_back(order(static_cast<std::int64_t>(i + 1), static_cast<std::uint32_t>(i),
                         rng.bernoulli(0.5) ? Side::buy : Side::sell, 95.0 + static_cast<double>(rng.below(11)),
                         rng.between(1, 10)));
  }
  return book;
}

ActionEnvelope orders_for(AgentId id, json orders, json extra = json::object()) {
  json body{{"orders", std::move(orders)}};
  for (auto& [k, v] : extra.items()) body[k] = v;
  return {id, 0, std::move(body), {}};
}

MarketConfig small_config(std::size_t agents = 2) {
  MarketConfig c;
  c.agents = agents;
  c.days = 2;
  c.sessions_per_day = 2;
  c.forum_tool = false;
  return c;
}

}  // namespace

TEST(Clock, SessionMajorOrder) {
  MarketClock c;
  std::vector<std::pair<int, int>> seen;
  for (int i = 0; i < 7; ++i) {
    seen.emplace_back(c.day, c.session);
    c.advance(3);
  }
  EXPECT_EQ(seen, (std::vector<std::pair<int, int>>{{1, 1}, {1, 2}, {1, 3}, {2, 1}, {2, 2}, {2, 3}, {3, 1}}));
}

TEST(Clearing, SimpleCross) {
  std::vector<Order> book{order(1, 0, Side::buy, 101, 5), order(2, 1, Side::sell, 99, 3)};
  auto r = clear_session(book, 100);
  EXPECT_EQ(r.volume(), 3);
  // 99 and 101 both match 3 and are equidistant from 100; the lower wins.
  EXPECT_DOUBLE_EQ(r.price, 99);
  ASSERT_EQ(r.unmatched.size(), 1u);
  EXPECT_EQ(r.unmatched[0].quantity, 2);
}

TEST(Clearing, NoCrossKeepsPrice) {
  std::vector<Order> book{order(1, 0, Side::buy, 90, 5), order(2, 1, Side::sell, 110, 3)};
  auto r = clear_session(book, 100);
  EXPECT_DOUBLE_EQ(r.price, 100);
  EXPECT_TRUE(r.trades.empty());
  EXPECT_EQ(r.unmatched.size(), 2u);
  EXPECT_DOUBLE_EQ(clear_session({}, 42).price, 42);
}

TEST(Clearing, PriorityByPriceThenId) {
  std::vector<Order> book{order(1, 0, Side::buy, 100, 2), order(2, 1, Side::buy, 105, 2), order(3, 2, Side::buy, 100, 2),
                          order(4, 3, Side::sell, 100, 3)};
  auto r = clear_session(book, 100);
  ASSERT_EQ(r.trades.size(), 2u);
  EXPECT_EQ(r.trades[0], (Trade{2, 4, 2}));
  EXPECT_EQ(r.trades[1], (Trade{1, 4, 1}));
}

TEST(Clearing, SelfCrossIsAContractViolation) {
  std::vector<Order> crossing{order(1, 0, Side::buy, 101, 1), order(2, 0, Side::sell, 100, 1)};
  EXPECT_THROW(clear_session(crossing, 100), ContractViolation);
  std::vector<Order> spread{order(1, 0, Side::buy, 99, 1), order(2, 0, Side::sell, 101, 1)};
  EXPECT_NO_THROW(clear_session(spread, 100));
}

TEST(Clearing, MatchesOracleOnRandomBooks) {
  RngStream rng(2024);
  for (int i = 0; i < 2000; ++i) {
    auto book = random_book(rng, 8);
    const double prev = 95.0 + static_cast<double>(rng.below(11));
    const auto want = oracle::clear(book, prev);
    const auto got = clear_session(book, prev);
    ASSERT_DOUBLE_EQ(got.price, want.price) << "book " << i;
    ASSERT_EQ(got.volume(), want.volume);
    ASSERT_EQ(volume_at(book, got.price), got.volume());
    // Conservation per order.
    std::map<std::int64_t, std::int64_t> filled;
    for (const auto& t : got.trades) {
      filled[t.buy_order] += t.quantity;
      filled[t.sell_order] += t.quantity;
    }
    std::map<std::int64_t, std::int64_t> rest;
    for (const auto& o : got.unmatched) rest[o.id] = o.quantity;
    for (const auto& o : book) {
      ASSERT_EQ(filled[o.id] + rest[o.id], o.quantity);
      if (filled[o.id] > 0) {
        ASSERT_TRUE(o.side == Side::buy ? o.limit_price >= got.price : o.limit_price <= got.price);
      }
    }
  }
}

TEST(Settlement, MovesCashAndShares) {
  std::vector<Order> book{order(1, 0, Side::buy, 101, 5), order(2, 1, Side::sell, 101, 5)};
  Accounts accts{{AgentId(0), {1000, {{"A", 0}}, 0, ""}}, {AgentId(1), {0, {{"A", 5}}, 0, ""}}};
  settle(clear_session(book, 101), book, accts);
  EXPECT_DOUBLE_EQ(accts[AgentId(0)].cash, 495);
  EXPECT_EQ(accts[AgentId(0)].holdings["A"], 5);
  EXPECT_DOUBLE_EQ(accts[AgentId(1)].cash, 505);
  EXPECT_EQ(accts[AgentId(1)].holdings["A"], 0);
}

TEST(Loans, LimitAndInterest) {
  TraderAccount a{1000, {{"A", 10}}, 0, ""};
  const std::map<std::string, double> prices{{"A", 100}};
  EXPECT_DOUBLE_EQ(portfolio_value(a, prices), 2000);
  EXPECT_DOUBLE_EQ(max_new_loan(a, prices, 0.5), 1000);
  grant_loan(a, 600, prices, 0.5);
  EXPECT_DOUBLE_EQ(a.cash, 1600);
  // Value is now 2600; limit 1300 minus 600 owed.
  EXPECT_DOUBLE_EQ(max_new_loan(a, prices, 0.5), 700);
  EXPECT_THROW(grant_loan(a, 701, prices, 0.5), LoanRefused);
  EXPECT_THROW(grant_loan(a, 0, prices, 0.5), ContractViolation);
  Accounts accts{{AgentId(0), a}};
  EXPECT_DOUBLE_EQ(accrue_interest(accts, 0.01), 6);
  EXPECT_DOUBLE_EQ(accts[AgentId(0)].loan_principal, 606);
}

TEST(News, ParseFetchAndDates) {
  std::istringstream in(R"({"date":"2025-04-02","headline":"Tariffs announced","body":"Details."}
{"date":"2025-04-03","headline":"Calm"}
)");
  const auto feed = parse_news_feed(in);
  EXPECT_EQ(fetch_news(feed, "2025-04-02"), "Tariffs announced\nDetails.");
  EXPECT_EQ(fetch_news(feed, "2025-04-03"), "Calm");
  EXPECT_EQ(fetch_news(feed, "2025-04-09"), "no news available");
  std::istringstream dup(R"({"date":"2025-04-02","headline":"a"}
{"date":"2025-04-02","headline":"b"})");
  EXPECT_THROW(parse_news_feed(dup), std::runtime_error);
  EXPECT_EQ(add_days("2025-04-01", 0), "2025-04-01");
  EXPECT_EQ(add_days("2024-02-28", 1), "2024-02-29");
  EXPECT_EQ(add_days("2025-12-31", 1), "2026-01-01");
}

TEST(Environment, OrderValidationAndRejections) {
  MarketEnvironment env(small_config(2));
  env.reset(0);
  ActionMap acts;
  acts[AgentId(0)] = orders_for(AgentId(0), {{{"symbol", "Z"}, {"side", "buy"}, {"price", 10}, {"quantity", 1}},
                                             {{"symbol", "A"}, {"side", "buy"}, {"price", -1}, {"quantity", 1}},
                                             {{"symbol", "A"}, {"side", "buy"}, {"price", 10}, {"quantity", 0}},
                                             {{"symbol", "A"}, {"side", "sell"}, {"price", 31}, {"quantity", 101}},
                                             {{"symbol", "A"}, {"side", "buy"}, {"price", 1e6}, {"quantity", 1}},
                                             {{"symbol", "A"}, {"side", "buy"}, {"price", 29}, {"quantity", 1}},
                                             {{"symbol", "A"}, {"side", "sell"}, {"price", 29}, {"quantity", 1}},
                                             {{"symbol", "A"}, {"side", "sell"}, {"price", 32}, {"quantity", 1}}});
  acts[AgentId(1)] = {AgentId(1), 0, {{"orders", "none"}}, {}};
  env.step(acts);
  std::vector<std::string> reasons;
  int submitted = 0;
  for (const auto& r : env.drain_events()) {
    if (r.action == "reject_order") reasons.push_back(r.info["reason"]);
    if (r.action == "submit_order") ++submitted;
    if (r.action == "reject_action") EXPECT_EQ(r.user_id, AgentId(1));
  }
  EXPECT_EQ(submitted, 2);
  EXPECT_EQ(reasons, (std::vector<std::string>{"unknown symbol", "limit price must be positive",
                                               "quantity must be positive", "insufficient shares", "insufficient cash",
                                               "self-cross: crosses an own opposite order on the same symbol"}));
}

TEST(Environment, LoansOnlyInFirstSession) {
  MarketEnvironment env(small_config(1));
  env.reset(0);
  env.step({{AgentId(0), orders_for(AgentId(0), json::array(), {{"loan", 1000}})}});
  env.step({{AgentId(0), orders_for(AgentId(0), json::array(), {{"loan", 1000}})}});
  env.step({{AgentId(0), orders_for(AgentId(0), json::array())}});
  std::vector<bool> granted;
  for (const auto& r : env.drain_events()) {
    if (r.action == "loan") granted.push_back(r.info["granted"]);
  }
  EXPECT_EQ(granted, (std::vector<bool>{true, false}));
  EXPECT_DOUBLE_EQ(env.total_loans(), 1000);
  EXPECT_DOUBLE_EQ(env.total_interest(), 10);
  EXPECT_DOUBLE_EQ(env.accounts().at(AgentId(0)).loan_principal, 1010);
}

TEST(Environment, ForumShowsPreviousDay) {
  auto cfg = small_config(1);
  cfg.sessions_per_day = 1;
  cfg.forum_tool = true;
  MarketEnvironment env(cfg);
  auto obs = env.reset(0);
  ASSERT_EQ(obs.at(AgentId(0)).tools.size(), 1u);
  EXPECT_EQ(obs.at(AgentId(0)).tools[0].handler({}), "no posts from the previous day");
  obs = env.step({{AgentId(0), orders_for(AgentId(0), json::array(), {{"forum_post", "buy A"}})}});
  EXPECT_EQ(obs.at(AgentId(0)).tools[0].handler({}), "agent 0: buy A");
  obs = env.step({{AgentId(0), orders_for(AgentId(0), json::array())}});
  EXPECT_TRUE(env.done());
  EXPECT_FALSE(obs.at(AgentId(0)).expects_action());
  EXPECT_THROW(env.step({}), ContractViolation);
}

TEST(Environment, NoiseTradersConserveSharesAndCash) {
  MarketConfig cfg;
  cfg.agents = 20;
  cfg.days = 5;
  cfg.interest_rate = 0;
  MarketEnvironment env(cfg);
  std::vector<std::unique_ptr<NoiseTrader>> traders;
  AgentRoster roster;
  for (std::uint32_t i = 0; i < cfg.agents; ++i) {
    traders.push_back(std::make_unique<NoiseTrader>(env, AgentId(i), 0.9));
    roster[AgentId(i)] = traders.back().get();
  }
  auto log = run_episode(env, roster, 1000, 5);
  EXPECT_EQ(log.steps_executed, 15u);
  std::int64_t a = 0;
  double cash = 0;
  for (const auto& [id, acct] : env.accounts()) {
    a += acct.holdings.at("A");
    cash += acct.cash;
    EXPECT_GE(acct.cash, 0);
    EXPECT_GE(acct.holdings.at("A"), 0);
  }
  EXPECT_EQ(a, 2000);
  EXPECT_NEAR(cash, 2e6, 1e-6);
  EXPECT_EQ(env.price_history("A").size(), 16u);
  EXPECT_FALSE(filter_action(log.records, "trade").empty());
}

TEST(Metrics, BuySellRatioAndChange) {
  auto rec = [](std::string side, int day) {
    return EventRecord{AgentId(0), 0, "submit_order", {{"symbol", "A"}, {"side", side}, {"day", day}}};
  };
  std::vector<EventRecord> log{rec("buy", 1), rec("buy", 1), rec("sell", 1), rec("buy", 2), rec("sell", 2),
                               rec("sell", 2)};
  EXPECT_DOUBLE_EQ(buy_sell_ratio(log, {"A"}, 1, 2).at("A"), (2.0 + 0.5) / 2);
  EXPECT_THROW(buy_sell_ratio(log, {"A"}, 1, 3), UndefinedRatio);
  const std::vector<double> h{10, 12, 15};
  EXPECT_DOUBLE_EQ(price_change_rate(h), 0.5);
  EXPECT_THROW(price_change_rate(std::span<const double>(h.data(), 1)), ContractViolation);
}

TEST(Metrics, CsvHeader) {
  std::ostringstream os;
  write_metrics_csv(os, {{1, 2, "A", 30.5, 7, 3, 4}});
  EXPECT_EQ(os.str(), "day,session,symbol,price,volume,n_buys,n_sells\n1,2,A,30.5,7,3,4\n");
}
