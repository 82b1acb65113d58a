#include "agentlab/env/market.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace agentlab::market {

using nlohmann::json;

std::string_view to_string(Side side) { return side == Side::buy ? "buy" : "sell"; }

void MarketClock::advance(int sessions_per_day) {
  if (++session > sessions_per_day) {
    session = 1;
    ++day;
  }
}

std::int64_t ClearingResult::volume() const {
  std::int64_t v = 0;
  for (const auto& t : trades) v += t.quantity;
  return v;
}

std::int64_t volume_at(std::span<const Order> book, double price) {
  std::int64_t demand = 0;
  std::int64_t supply = 0;
  for (const auto& o : book) {
    if (o.side == Side::buy && o.limit_price >= price) demand += o.quantity;
    if (o.side == Side::sell && o.limit_price <= price) supply += o.quantity;
  }
  return std::min(demand, supply);
}

ClearingResult clear_session(std::span<const Order> book, double prev_price) {
  {
    std::map<AgentId, double> max_buy;
    std::map<AgentId, double> min_sell;
    for (const auto& o : book) {
      if (o.side == Side::buy) {
        auto [it, fresh] = max_buy.emplace(o.agent, o.limit_price);
        if (!fresh) it->second = std::max(it->second, o.limit_price);
      } else {
        auto [it, fresh] = min_sell.emplace(o.agent, o.limit_price);
        if (!fresh) it->second = std::min(it->second, o.limit_price);
      }
    }
    for (const auto& [id, buy] : max_buy) {
      auto it = min_sell.find(id);
      if (it != min_sell.end() && buy >= it->second) {
        throw ContractViolation("agent " + to_string(id) + " has crossing orders on both sides of one book");
      }
    }
  }


  std::set<double> candidates;
  for (const auto& o : book) candidates.insert(o.limit_price);

  double best_price = prev_price;
  std::int64_t best_volume = 0;
  for (double p : candidates) {
    const std::int64_t v = volume_at(book, p);
    if (v == 0) continue;
    const bool better = v > best_volume ||
                        (v == best_volume && (std::abs(p - prev_price) < std::abs(best_price - prev_price) ||
                                              (std::abs(p - prev_price) == std::abs(best_price - prev_price) &&
                                               p < best_price)));
    if (better) {
      best_volume = v;
      best_price = p;
    }
  }

  ClearingResult result;
  result.price = best_price;
  std::vector<std::int64_t> remaining(book.size());
  for (std::size_t i = 0; i < book.size(); ++i) remaining[i] = book[i].quantity;

  if (best_volume > 0) {
    std::vector<std::size_t> buys;
    std::vector<std::size_t> sells;
    for (std::size_t i = 0; i < book.size(); ++i) {
      if (book[i].side == Side::buy && book[i].limit_price >= best_price) buys.push_back(i);
      if (book[i].side == Side::sell && book[i].limit_price <= best_price) sells.push_back(i);
    }
    std::stable_sort(buys.begin(), buys.end(), [&](std::size_t a, std::size_t b) {
      if (book[a].limit_price != book[b].limit_price) return book[a].limit_price > book[b].limit_price;
      return book[a].id < book[b].id;
    });
    std::stable_sort(sells.begin(), sells.end(), [&](std::size_t a, std::size_t b) {
      if (book[a].limit_price != book[b].limit_price) return book[a].limit_price < book[b].limit_price;
      return book[a].id < book[b].id;
    });

    std::int64_t left = best_volume;
    std::size_t bi = 0;
    std::size_t si = 0;
    while (left > 0 && bi < buys.size() && si < sells.size()) {
      const std::size_t b = buys[bi];
      const std::size_t s = sells[si];
      const std::int64_t q = std::min({remaining[b], remaining[s], left});
      result.trades.push_back({book[b].id, book[s].id, q});
      remaining[b] -= q;
      remaining[s] -= q;
      left -= q;
      if (remaining[b] == 0) ++bi;
      if (remaining[s] == 0) ++si;
    }
  }

  for (std::size_t i = 0; i < book.size(); ++i) {
    if (remaining[i] > 0) {
      Order rest = book[i];
      rest.quantity = remaining[i];
      result.unmatched.push_back(std::move(rest));
    }
  }
  return result;
}

void settle(const ClearingResult& result, std::span<const Order> book, Accounts& accounts) {
  std::map<std::int64_t, const Order*> by_id;
  for (const auto& o : book) by_id[o.id] = &o;
  for (const auto& t : result.trades) {
    const Order& buy = *by_id.at(t.buy_order);
    const Order& sell = *by_id.at(t.sell_order);
    const double amount = result.price * static_cast<double>(t.quantity);
    TraderAccount& buyer = accounts.at(buy.agent);
    TraderAccount& seller = accounts.at(sell.agent);
    buyer.cash -= amount;
    buyer.holdings[buy.symbol] += t.quantity;
    seller.cash += amount;
    seller.holdings[sell.symbol] -= t.quantity;
  }
}

double portfolio_value(const TraderAccount& account, const std::map<std::string, double>& prices) {
  double value = account.cash;
  for (const auto& [symbol, shares] : account.holdings) {
    if (auto it = prices.find(symbol); it != prices.end()) value += it->second * static_cast<double>(shares);
  }
  return value;
}

double max_new_loan(const TraderAccount& account, const std::map<std::string, double>& prices, double loan_to_value) {
  return std::max(0.0, loan_to_value * portfolio_value(account, prices) - account.loan_principal);
}

double accrue_interest(Accounts& accounts, double rate) {
  double added = 0.0;
  for (auto& [id, account] : accounts) {
    const double interest = account.loan_principal * rate;
    account.loan_principal += interest;
    added += interest;
  }
  return added;
}

void grant_loan(TraderAccount& account, double amount, const std::map<std::string, double>& prices,
                double loan_to_value) {
  if (!(amount > 0.0)) throw ContractViolation("loan amount must be positive");
  const double available = max_new_loan(account, prices, loan_to_value);
  if (amount > available) throw LoanRefused(amount, available);
  account.cash += amount;
  account.loan_principal += amount;
}

std::vector<NewsItem> parse_news_feed(std::istream& in) {
  std::vector<NewsItem> out;
  std::set<std::string> dates;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json j = json::parse(line);
    NewsItem item{j.at("date").get<std::string>(), j.at("headline").get<std::string>(), j.value("body", "")};
    if (!dates.insert(item.date).second) throw std::runtime_error("duplicate news date " + item.date);
    out.push_back(std::move(item));
  }
  return out;
}

std::vector<NewsItem> load_news_feed(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open news feed " + path);
  return parse_news_feed(in);
}

std::string fetch_news(std::span<const NewsItem> feed, std::string_view date) {
  for (const auto& item : feed) {
    if (item.date == date) return item.body.empty() ? item.headline : item.headline + "\n" + item.body;
  }
  return "no news available";
}

std::string add_days(const std::string& start, int offset) {
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  if (std::sscanf(start.c_str(), "%d-%u-%u", &y, &m, &d) != 3) throw std::invalid_argument("bad date " + start);
  using namespace std::chrono;
  const year_month_day first{year{y}, month{m}, day{d}};
  if (!first.ok()) throw std::invalid_argument("bad date " + start);
  const year_month_day shifted{sys_days{first} + days{offset}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(shifted.year()),
                static_cast<unsigned>(shifted.month()), static_cast<unsigned>(shifted.day()));
  return buf;
}

MarketEnvironment::MarketEnvironment(MarketConfig config) : config_(std::move(config)) {
  if (config_.sessions_per_day < 1) throw std::invalid_argument("sessions_per_day must be at least 1");
  if (config_.stocks.empty()) throw std::invalid_argument("market needs at least one stock");
  for (const auto& s : config_.stocks) {
    if (!(s.initial_price > 0.0)) throw std::invalid_argument("initial price of " + s.symbol + " must be positive");
  }
}

Schema MarketEnvironment::action_schema() {
  using namespace schema;
  return object({
      optional("loan", within(number(), 0.0, std::nullopt), "amount to borrow; granted in session 1 only"),
      required("orders", array_of(object({required("symbol", text()), required("side", one_of({"buy", "sell"})),
                                          required("price", number(), "limit price per share"),
                                          required("quantity", integer(), "number of shares")})),
               "limit orders for this session; may be empty"),
      optional("forum_post", text(), "comment shared with other traders tomorrow"),
  });
}

std::string MarketEnvironment::style_of(AgentId id) const {
  if (config_.styles.empty()) return {};
  return config_.styles[id.value % config_.styles.size()];
}

ObservationMap MarketEnvironment::reset(std::uint64_t /*seed*/) {
  clear_events();
  clock_ = MarketClock{};
  time_ = 0;
  accounts_.clear();
  prices_.clear();
  history_.clear();
  metrics_.clear();
  forum_.clear();
  next_order_id_ = 1;
  total_interest_ = 0.0;
  total_loans_ = 0.0;
  for (const auto& s : config_.stocks) {
    prices_[s.symbol] = s.initial_price;
    history_[s.symbol] = {s.initial_price};
  }
  for (std::uint32_t i = 0; i < config_.agents; ++i) {
    TraderAccount account;
    account.cash = config_.initial_cash;
    for (const auto& s : config_.stocks) {
      auto it = config_.initial_holdings.find(s.symbol);
      account.holdings[s.symbol] = it == config_.initial_holdings.end() ? 0 : it->second;
    }
    account.style = style_of(AgentId(i));
    accounts_.emplace(AgentId(i), std::move(account));
  }
  return observe();
}

std::string MarketEnvironment::read_forum(int day) const {
  std::ostringstream os;
  bool any = false;
  for (const auto& p : forum_) {
    if (p.day != day - 1) continue;
    os << (any ? "\n" : "") << "agent " << p.agent << ": " << p.text;
    any = true;
  }
  return any ? os.str() : "no posts from the previous day";
}

std::string MarketEnvironment::context_for(AgentId id) const {
  const TraderAccount& acct = accounts_.at(id);
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "Day " << clock_.day << " (" << current_date() << "), session " << clock_.session << " of "
     << config_.sessions_per_day << ".";
  for (const auto& s : config_.stocks) {
    os << "\nStock " << s.symbol << ": price " << prices_.at(s.symbol) << ". " << s.profile_text;
  }
  os << "\nYour account: cash " << acct.cash;
  for (const auto& [symbol, shares] : acct.holdings) os << ", " << symbol << " " << shares << " shares";
  os << ", loan principal " << acct.loan_principal << ".";
  for (const auto& e : config_.events) {
    if (e.day == clock_.day) os << "\nToday's event: " << e.text;
  }
  if (clock_.session == 1) {
    os << "\nLoans are available this session, up to " << max_new_loan(acct, prices_, config_.loan_to_value) << ".";
  }
  return os.str();
}

ObservationMap MarketEnvironment::observe() const {
  ObservationMap out;
  const bool active = !done();
  std::vector<ToolSpec> tools;
  if (active && config_.forum_tool) {
    const int day = clock_.day;
    tools.push_back({"read_forum", "Read the comments other traders posted on the previous day.", schema::object({}),
                     [this, day](const json&) { return read_forum(day); }});
  }
  if (active && config_.news_tool) {
    const std::string date = current_date();
    tools.push_back({"fetch_news", "Fetch today's market news headline.", schema::object({}),
                     [this, date](const json&) { return fetch_news(config_.news, date); }});
  }
  for (const auto& [id, account] : accounts_) {
    Observation obs;
    obs.agent_id = id;
    obs.time = time_;
    obs.context_text = active ? context_for(id) : "The market is closed.";
    if (active) {
      obs.tools = tools;
      obs.response_schema = action_schema();
    }
    out.emplace(id, std::move(obs));
  }
  return out;
}

void MarketEnvironment::process_action(AgentId id, const json& body, std::vector<Order>& book,
                                       std::map<AgentId, double>& reserved_cash,
                                       std::map<std::pair<AgentId, std::string>, std::int64_t>& reserved_shares) {
  TraderAccount& acct = accounts_.at(id);

  if (body.contains("loan") && body["loan"].is_number()) {
    const double amount = body["loan"].get<double>();
    if (amount > 0.0) {
      if (clock_.session != 1) {
        emit(id, "loan", {{"amount", amount}, {"granted", false}, {"reason", "loans are granted in session 1 only"}});
      } else {
        try {
          grant_loan(acct, amount, prices_, config_.loan_to_value);
          total_loans_ += amount;
          emit(id, "loan", {{"amount", amount}, {"granted", true}, {"principal", acct.loan_principal}});
        } catch (const LoanRefused& e) {
          emit(id, "loan",
               {{"amount", amount}, {"granted", false}, {"reason", "exceeds loan-to-value limit"}, {"available", e.available()}});
        }
      }
    }
  }

  if (body.contains("forum_post") && body["forum_post"].is_string()) {
    const auto& text = body["forum_post"].get_ref<const std::string&>();
    if (!text.empty()) {
      forum_.push_back({id, clock_.day, text});
      emit(id, "forum_post", {{"day", clock_.day}, {"text", text}});
    }
  }

  // Best own buy and sell limit per symbol, to stop an agent trading with itself.
  std::map<std::string, double> own_max_buy;
  std::map<std::string, double> own_min_sell;
  for (const auto& o : body.at("orders")) {
    Order order;
    order.agent = id;
    order.symbol = o.at("symbol").get<std::string>();
    order.side = o.at("side").get<std::string>() == "buy" ? Side::buy : Side::sell;
    order.limit_price = o.at("price").get<double>();
    order.quantity = o.at("quantity").get<std::int64_t>();
    order.submitted_at = clock_;

    json info{{"symbol", order.symbol},
              {"side", to_string(order.side)},
              {"price", order.limit_price},
              {"quantity", order.quantity},
              {"day", clock_.day},
              {"session", clock_.session}};
    auto reject = [&](std::string reason) {
      info["reason"] = std::move(reason);
      emit(id, "reject_order", std::move(info));
    };

    if (!prices_.contains(order.symbol)) {
      reject("unknown symbol");
      continue;
    }
    if (!(order.limit_price > 0.0) || !std::isfinite(order.limit_price)) {
      reject("limit price must be positive");
      continue;
    }
    if (order.quantity <= 0) {
      reject("quantity must be positive");
      continue;
    }
    const bool crosses =
        order.side == Side::buy
            ? own_min_sell.contains(order.symbol) && order.limit_price >= own_min_sell[order.symbol]
            : own_max_buy.contains(order.symbol) && order.limit_price <= own_max_buy[order.symbol];
    if (crosses) {
      reject("self-cross: crosses an own opposite order on the same symbol");
      continue;
    }
    if (order.side == Side::sell) {
      auto& reserved = reserved_shares[{id, order.symbol}];
      if (acct.holdings[order.symbol] - reserved < order.quantity) {
        reject("insufficient shares");
        continue;
      }
      reserved += order.quantity;
    } else {
      const double cost = order.limit_price * static_cast<double>(order.quantity);
      auto& reserved = reserved_cash[id];
      if (acct.cash - reserved < cost) {
        reject("insufficient cash");
        continue;
      }
      reserved += cost;
    }
    if (order.side == Side::buy) {
      auto [it, fresh] = own_max_buy.emplace(order.symbol, order.limit_price);
      if (!fresh) it->second = std::max(it->second, order.limit_price);
    } else {
      auto [it, fresh] = own_min_sell.emplace(order.symbol, order.limit_price);
      if (!fresh) it->second = std::min(it->second, order.limit_price);
    }
    order.id = next_order_id_++;
    info["order_id"] = order.id;
    emit(id, "submit_order", std::move(info));
    book.push_back(std::move(order));
  }
}

ObservationMap MarketEnvironment::step(const ActionMap& actions) {
  if (done()) throw ContractViolation("market step after the last session");

  if (clock_.session == 1 && clock_.day > 1) total_interest_ += accrue_interest(accounts_, config_.interest_rate);

  const Schema schema = action_schema();
  std::vector<Order> book;
  std::map<AgentId, double> reserved_cash;
  std::map<std::pair<AgentId, std::string>, std::int64_t> reserved_shares;
  for (const auto& [id, envelope] : actions) {
    if (!accounts_.contains(id)) throw ContractViolation("action from unknown trader " + to_string(id));
    if (auto violations = validate_action(envelope.body, schema); !violations.empty()) {
      emit(id, "reject_action", {{"reason", format_violations(violations)}});
      continue;
    }
    process_action(id, envelope.body, book, reserved_cash, reserved_shares);
  }

  for (const auto& stock : config_.stocks) {
    std::vector<Order> symbol_book;
    for (const auto& o : book) {
      if (o.symbol == stock.symbol) symbol_book.push_back(o);
    }
    ClearingResult result = clear_session(symbol_book, prices_.at(stock.symbol));
    settle(result, symbol_book, accounts_);

    std::map<std::int64_t, const Order*> by_id;
    for (const auto& o : symbol_book) by_id[o.id] = &o;
    for (const auto& t : result.trades) {
      emit(by_id.at(t.buy_order)->agent, "trade",
           {{"symbol", stock.symbol},
            {"price", result.price},
            {"quantity", t.quantity},
            {"buy_order", t.buy_order},
            {"sell_order", t.sell_order},
            {"seller", by_id.at(t.sell_order)->agent.value},
            {"day", clock_.day},
            {"session", clock_.session}});
    }

    prices_[stock.symbol] = result.price;
    history_[stock.symbol].push_back(result.price);
    SessionMetrics row{clock_.day, clock_.session, stock.symbol, result.price, result.volume(), 0, 0};
    for (const auto& o : symbol_book) (o.side == Side::buy ? row.n_buys : row.n_sells)++;
    metrics_.push_back(std::move(row));
  }

  clock_.advance(config_.sessions_per_day);
  ++time_;
  return observe();
}

std::map<std::string, double> buy_sell_ratio(const std::vector<EventRecord>& records,
                                             const std::vector<std::string>& symbols, int first_day, int last_day) {
  std::map<std::pair<std::string, int>, std::pair<int, int>> counts;
  for (const auto& r : records) {
    if (r.action != "submit_order") continue;
    const int day = r.info.at("day").get<int>();
    if (day < first_day || day > last_day) continue;
    auto& c = counts[{r.info.at("symbol").get<std::string>(), day}];
    (r.info.at("side").get<std::string>() == "buy" ? c.first : c.second)++;
  }
  std::map<std::string, double> out;
  for (const auto& symbol : symbols) {
    double sum = 0.0;
    for (int day = first_day; day <= last_day; ++day) {
      const auto [buys, sells] = counts[{symbol, day}];
      if (sells == 0) {
        throw UndefinedRatio("no sell orders for " + symbol + " on day " + std::to_string(day));
      }
      sum += static_cast<double>(buys) / static_cast<double>(sells);
    }
    out[symbol] = sum / static_cast<double>(last_day - first_day + 1);
  }
  return out;
}

double price_change_rate(std::span<const double> history) {
  if (history.size() < 2) throw ContractViolation("price_change_rate needs at least two prices");
  return (history.back() - history.front()) / history.front();
}

void write_metrics_csv(std::ostream& os, const std::vector<SessionMetrics>& metrics) {
  os << "day,session,symbol,price,volume,n_buys,n_sells\n";
  const auto old_precision = os.precision(17);
  for (const auto& m : metrics) {
    os << m.day << ',' << m.session << ',' << m.symbol << ',' << m.price << ',' << m.volume << ',' << m.n_buys << ','
       << m.n_sells << '\n';
  }
  os.precision(old_precision);
}

NoiseTrader::NoiseTrader(const MarketEnvironment& env, AgentId id, double activity)
    : env_(env), id_(id), activity_(activity) {}

ActionEnvelope NoiseTrader::act(const Observation& obs) {
  ActionEnvelope out{id_, obs.time, MarketEnvironment::passive_action(), {}};
  if (!rng_.bernoulli(activity_)) return out;

  const auto& stocks = env_.config().stocks;
  const auto& stock = stocks[rng_.below(stocks.size())];
  const TraderAccount& acct = env_.accounts().at(id_);
  const double last = env_.prices().at(stock.symbol);
  const auto held_it = acct.holdings.find(stock.symbol);
  const std::int64_t held = held_it == acct.holdings.end() ? 0 : held_it->second;

  const bool sell = held > 0 && rng_.bernoulli(0.5);
  const double price = std::max(0.01, std::round(last * rng_.uniform(0.97, 1.03) * 100.0) / 100.0);
  std::int64_t qty = rng_.between(1, 5);
  if (sell) {
    qty = std::min(qty, held);
  } else {
    qty = std::min<std::int64_t>(qty, static_cast<std::int64_t>(acct.cash / price));
    if (qty <= 0) return out;
  }
  out.body["orders"].push_back(
      {{"symbol", stock.symbol}, {"side", sell ? "sell" : "buy"}, {"price", price}, {"quantity", qty}});
  return out;
}

}  // namespace agentlab::market
