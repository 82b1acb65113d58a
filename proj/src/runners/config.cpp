#include "agentlab/runners/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace agentlab::runners {

using nlohmann::json;

std::string_view to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::market: return "market";
    case EnvKind::auction: return "auction";
    case EnvKind::economy: return "economy";
    case EnvKind::social: return "social";
    case EnvKind::questionnaire: return "questionnaire";
  }
  return "market";
}

std::size_t ExperimentConfig::population() const {
  std::size_t n = 0;
  for (const auto& g : agents) n += g.count;
  return n;
}

namespace {

// Reads one JSON object, remembering which keys were consumed so leftovers
// can be reported as unknown.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it != j_.end() && !it->is_null();
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  template <class T>
  T need(const std::string& key) {
    if (!has(key)) throw ConfigError(field(key), "required field is missing");
    return convert<T>(j_.at(key), field(key));
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return convert<T>(j_.at(key), field(key));
  }

  template <class T>
  void maybe(const std::string& key, T& target) {
    if (has(key)) target = convert<T>(j_.at(key), field(key));
  }

  Reader object(const std::string& key) {
    seen_.insert(key);
    return Reader(j_.at(key), field(key));
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw ConfigError(field(key), "unknown key '" + key + "'");
    }
  }

  template <class T>
  static T convert(const json& v, const std::string& where) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(where, "expected a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(where, "expected a string");
      return v.get<std::string>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(where, "expected a number");
      return v.get<T>();
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!v.is_number_unsigned()) throw ConfigError(where, "expected a non-negative integer");
      return v.get<T>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(where, "expected an integer");
      return v.get<T>();
    } else if constexpr (std::is_same_v<T, std::vector<std::string>> || std::is_same_v<T, std::vector<double>> ||
                         std::is_same_v<T, std::vector<int>>) {
      if (!v.is_array()) throw ConfigError(where, "expected an array");
      T out;
      for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(convert<typename T::value_type>(v[i], where + "[" + std::to_string(i) + "]"));
      }
      return out;
    } else {
      static_assert(sizeof(T) == 0, "unsupported config type");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path.string();
}

template <class F>
auto with_field(const std::string& field, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(field, e.what());
  }
}

const json& array_at(Reader& r, const std::string& key) {
  const json& v = r.raw(key);
  if (!v.is_array()) throw ConfigError(r.field(key), "expected an array");
  return v;
}

std::string element(const std::string& field, std::size_t i) { return field + "[" + std::to_string(i) + "]"; }

market::MarketConfig parse_market(Reader& r, const std::filesystem::path& base) {
  market::MarketConfig c;
  r.maybe("days", c.days);
  r.maybe("sessions_per_day", c.sessions_per_day);
  r.maybe("initial_cash", c.initial_cash);
  if (r.has("initial_holdings")) {
    const json& h = r.raw("initial_holdings");
    if (!h.is_object()) throw ConfigError(r.field("initial_holdings"), "expected an object");
    c.initial_holdings.clear();
    for (const auto& [symbol, n] : h.items()) {
      c.initial_holdings[symbol] = Reader::convert<std::int64_t>(n, r.field("initial_holdings") + "." + symbol);
    }
  }
  if (r.has("stocks")) {
    const json& arr = array_at(r, "stocks");
    c.stocks.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Reader s(arr[i], element(r.field("stocks"), i));
      c.stocks.push_back({s.need<std::string>("symbol"), s.need<double>("initial_price"),
                          s.get<std::string>("profile", "")});
      s.finish();
    }
  }
  r.maybe("interest_rate", c.interest_rate);
  r.maybe("loan_to_value", c.loan_to_value);
  r.maybe("start_date", c.start_date);
  r.maybe("forum_tool", c.forum_tool);
  r.maybe("news_tool", c.news_tool);
  if (r.has("news_feed")) {
    const std::string path = resolve(base, r.get<std::string>("news_feed", ""));
    c.news = with_field(r.field("news_feed"), [&] { return market::load_news_feed(path); });
  }
  if (r.has("events")) {
    const json& arr = array_at(r, "events");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Reader e(arr[i], element(r.field("events"), i));
      c.events.push_back({e.need<int>("day"), e.need<std::string>("text")});
      e.finish();
    }
  }
  r.maybe("styles", c.styles);
  return c;
}

auction::AuctionConfig parse_auction(Reader& r, const std::filesystem::path& base) {
  auction::AuctionConfig c;
  if (!r.has("items")) throw ConfigError(r.field("items"), "required field is missing");
  const json& items = r.raw("items");
  if (items.is_string()) {
    const std::string path = resolve(base, items.get<std::string>());
    c.items = with_field(r.field("items"), [&] { return auction::load_items(path); });
  } else if (items.is_array()) {
    for (std::size_t i = 0; i < items.size(); ++i) {
      Reader it(items[i], element(r.field("items"), i));
      auction::AuctionItem item{it.need<std::string>("name"), it.need<double>("starting_price"),
                                it.need<double>("true_value"), 0.0};
      item.estimated_value = it.get<double>("estimated_value", item.true_value);
      it.finish();
      c.items.push_back(item);
    }
  } else {
    throw ConfigError(r.field("items"), "expected an item file path or an array of items");
  }
  r.maybe("budget", c.budget);
  r.maybe("budgets", c.budgets);
  if (r.has("objectives")) {
    for (const auto& s : r.get<std::vector<std::string>>("objectives", {})) {
      c.objectives.push_back(with_field(r.field("objectives"), [&] { return auction::objective_from_string(s); }));
    }
  }
  r.maybe("min_increment", c.min_increment);
  r.maybe("shuffle_items", c.shuffle_items);
  return c;
}

economy::EconomyConfig parse_economy(Reader& r) {
  economy::EconomyConfig c;
  r.maybe("months", c.months);
  r.maybe("wage", c.wage);
  r.maybe("skill_min", c.skill_min);
  r.maybe("skill_max", c.skill_max);
  r.maybe("initial_wealth", c.initial_wealth);
  r.maybe("initial_price", c.initial_price);
  r.maybe("tax_rate", c.policy.tax_rate);
  r.maybe("interest_rate", c.policy.interest_rate);
  r.maybe("price_adjustment", c.params.price_adjustment);
  r.maybe("supply_floor", c.params.supply_floor);
  r.maybe("work_threshold", c.params.work_threshold);
  r.maybe("rate_gain", c.params.rate_gain);
  r.maybe("inflation_target", c.params.inflation_target);
  r.maybe("rate_cap", c.params.rate_cap);
  if (r.has("tax_schedule")) {
    // Entry k is the tax rate of year k + 1.
    auto schedule = r.get<std::vector<double>>("tax_schedule", {});
    if (schedule.empty()) throw ConfigError(r.field("tax_schedule"), "must not be empty");
    c.policy.tax_rate = schedule.front();
    c.tax_policy = [schedule](int year, const economy::MacroIndicators& latest) {
      const auto i = static_cast<std::size_t>(year);
      return i < schedule.size() ? schedule[i] : latest.tax_rate;
    };
  }
  return c;
}

social::SocialConfig parse_social(Reader& r, const std::filesystem::path& base) {
  social::SocialConfig c;
  r.maybe("steps", c.steps);
  r.maybe("feed_cap", c.feed_cap);
  if (r.has("influencer")) c.influencer = AgentId(r.get<std::uint32_t>("influencer", 0));
  r.maybe("seed_posts", c.seed_posts);
  if (r.has("profiles")) {
    const std::string path = resolve(base, r.get<std::string>("profiles", ""));
    c.profiles = with_field(r.field("profiles"), [&] { return social::load_profiles(path); });
  }
  r.maybe("extra_follow_probability", c.extra_follow_probability);
  r.maybe("bios", c.bios);
  return c;
}

questionnaire::QuestionnaireConfig parse_questionnaire(Reader& r, const std::filesystem::path& base) {
  questionnaire::QuestionnaireConfig c;
  if (!r.has("items")) throw ConfigError(r.field("items"), "required field is missing");
  const json& items = r.raw("items");
  if (items.is_string()) {
    const std::string path = resolve(base, items.get<std::string>());
    c.items = with_field(r.field("items"), [&] { return questionnaire::load_items(path); });
  } else if (items.is_array()) {
    std::ostringstream lines;
    for (const auto& item : items) lines << item.dump() << '\n';
    std::istringstream in(lines.str());
    c.items = with_field(r.field("items"), [&] { return questionnaire::parse_items(in); });
  } else {
    throw ConfigError(r.field("items"), "expected an item bank path or an array of items");
  }
  r.maybe("shuffle", c.shuffle);
  r.maybe("preamble", c.preamble);
  return c;
}

EnvSpec parse_env(const json& j, const std::string& field, const std::filesystem::path& base) {
  Reader r(j, field);
  EnvSpec spec;
  const auto kind = r.need<std::string>("kind");
  r.maybe("max_steps", spec.max_steps);
  if (kind == "market") {
    spec.kind = EnvKind::market;
    spec.params = parse_market(r, base);
  } else if (kind == "auction") {
    spec.kind = EnvKind::auction;
    spec.params = parse_auction(r, base);
  } else if (kind == "economy") {
    spec.kind = EnvKind::economy;
    spec.params = parse_economy(r);
  } else if (kind == "social") {
    spec.kind = EnvKind::social;
    spec.params = parse_social(r, base);
  } else if (kind == "questionnaire") {
    spec.kind = EnvKind::questionnaire;
    spec.params = parse_questionnaire(r, base);
  } else {
    throw ConfigError(r.field("kind"), "unknown environment kind '" + kind + "'");
  }
  r.finish();
  return spec;
}

// Built-in policy parameter names, checked strictly.
const std::map<std::string, std::pair<EnvKind, std::vector<std::string>>>& builtin_policies() {
  static const std::map<std::string, std::pair<EnvKind, std::vector<std::string>>> table{
      {"noise", {EnvKind::market, {"activity"}}},
      {"increment", {EnvKind::auction, {"increment", "participation", "spend_cap"}}},
      {"propensity", {EnvKind::economy, {"work", "consumption", "noise"}}},
      {"random", {EnvKind::social, {}}},
      {"fixed", {EnvKind::questionnaire, {"position", "jitter"}}},
  };
  return table;
}

AgentGroup parse_group(const json& j, const std::string& field) {
  Reader r(j, field);
  AgentGroup g;
  r.maybe("count", g.count);
  if (g.count == 0) throw ConfigError(r.field("count"), "must be at least 1");
  r.maybe("policy", g.policy);
  if (g.policy != "llm" && !builtin_policies().contains(g.policy)) {
    throw ConfigError(r.field("policy"), "unknown policy '" + g.policy + "'");
  }
  r.maybe("persona", g.persona.persona_text);
  r.maybe("role", g.persona.role_tag);
  r.maybe("directives", g.persona.extra_directives);
  if (r.has("memory")) {
    Reader m = r.object("memory");
    g.memory.variant = m.need<std::string>("variant");
    g.memory.parameters = json::object();
    if (g.memory.variant == "buffer") {
      g.memory.parameters["capacity"] = m.need<std::size_t>("capacity");
    } else if (g.memory.variant == "chat_history") {
      g.memory.parameters["window"] = m.need<std::size_t>("window");
      g.memory.parameters["token_limit"] = m.need<std::size_t>("token_limit");
    } else if (g.memory.variant != "null") {
      throw ConfigError(m.field("variant"), "unknown memory variant '" + g.memory.variant + "'");
    }
    m.finish();
  }
  r.maybe("model", g.options.model_id);
  r.maybe("parser_model", g.options.parser_model);
  r.maybe("temperature", g.options.temperature);
  r.maybe("max_tool_rounds", g.options.max_tool_rounds);
  r.maybe("max_parse_retries", g.options.max_parse_retries);
  r.maybe("max_request_retries", g.options.max_request_retries);
  r.maybe("notes", g.notes);
  if (r.has("params")) {
    if (g.policy == "llm") throw ConfigError(r.field("params"), "llm agents take no policy params");
    Reader p = r.object("params");
    for (const auto& name : builtin_policies().at(g.policy).second) {
      if (p.has(name)) g.params[name] = p.raw(name);
      if (g.params.contains(name) && !g.params[name].is_number()) throw ConfigError(p.field(name), "expected a number");
    }
    p.finish();
  }
  r.finish();
  return g;
}

CompletionResult parse_reply(Reader& r, const std::string& content_key) {
  CompletionResult result;
  if (r.has(content_key)) {
    const json& c = r.raw(content_key);
    result.content = c.is_string() ? c.get<std::string>() : c.dump();
  }
  if (r.has("tool_calls")) {
    const json& calls = array_at(r, "tool_calls");
    for (std::size_t i = 0; i < calls.size(); ++i) {
      Reader t(calls[i], element(r.field("tool_calls"), i));
      ToolCallRequest call;
      call.id = "call_" + std::to_string(i + 1);
      call.name = t.need<std::string>("name");
      if (t.has("arguments")) {
        const json& a = t.raw("arguments");
        call.arguments_text = a.is_string() ? a.get<std::string>() : a.dump();
      } else {
        call.arguments_text = "{}";
      }
      t.finish();
      result.tool_calls.push_back(std::move(call));
    }
  }
  return result;
}

BackendSpec parse_backend(const json& j, const std::string& field, const std::filesystem::path& base) {
  Reader r(j, field);
  BackendSpec b;
  r.maybe("kind", b.kind);
  if (b.kind == "scripted") {
    if (r.has("rules")) {
      const json& rules = array_at(r, "rules");
      for (std::size_t i = 0; i < rules.size(); ++i) {
        Reader rule(rules[i], element(r.field("rules"), i));
        ScriptRule s;
        if (rule.has("if_contains")) s.if_contains = rule.get<std::string>("if_contains", "");
        s.result = parse_reply(rule, "content");
        rule.finish();
        b.rules.push_back(std::move(s));
      }
    }
    if (r.has("default")) {
      const json& d = r.raw("default");
      b.default_content = d.is_string() ? d.get<std::string>() : d.dump();
    }
  } else if (b.kind == "replay") {
    b.transcript = resolve(base, r.need<std::string>("transcript"));
    r.maybe("strict", b.strict);
  } else if (b.kind == "remote") {
    b.remote.endpoint = r.need<std::string>("endpoint");
    r.maybe("token_env", b.remote.token_env);
    r.maybe("in_flight_limit", b.remote.in_flight_limit);
    if (r.has("timeout_ms")) b.remote.timeout = std::chrono::milliseconds(r.get<std::int64_t>("timeout_ms", 0));
    if (r.has("backoff_ms")) b.remote.backoff_base = std::chrono::milliseconds(r.get<std::int64_t>("backoff_ms", 0));
    r.maybe("jitter_seed", b.remote.jitter_seed);
  } else {
    throw ConfigError(r.field("kind"), "unknown backend kind '" + b.kind + "'");
  }
  r.finish();
  return b;
}

void check_policies(const ExperimentConfig& c, const std::vector<EnvKind>& kinds, bool llm_only) {
  for (std::size_t i = 0; i < c.agents.size(); ++i) {
    const auto& g = c.agents[i];
    const std::string field = element("agents", i) + ".policy";
    if (g.policy == "llm") continue;
    if (llm_only) throw ConfigError(field, "memory transfer and multi-world runs need llm agents");
    const EnvKind wanted = builtin_policies().at(g.policy).first;
    for (auto k : kinds) {
      if (k != wanted) {
        throw ConfigError(field, "policy '" + g.policy + "' cannot act in a " + std::string(to_string(k)) +
                                     " environment");
      }
    }
  }
}

}  // namespace

ExperimentConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
  Reader r(j, "");
  ExperimentConfig c;
  r.maybe("seed", c.seed);
  r.maybe("trials", c.trials);
  if (c.trials < 1) throw ConfigError("trials", "must be at least 1");
  r.maybe("output", c.output);
  r.maybe("parallel_agents", c.parallel_agents);

  if (r.has("multiworld")) {
    Reader m = r.object("multiworld");
    MultiWorldSpec spec;
    const json& worlds = array_at(m, "worlds");
    for (std::size_t i = 0; i < worlds.size(); ++i) {
      spec.worlds.push_back(parse_env(worlds[i], element(m.field("worlds"), i), base_dir));
    }
    if (spec.worlds.size() < 2) throw ConfigError(m.field("worlds"), "needs at least two environments");
    m.maybe("cycles", spec.cycles);
    if (spec.cycles < 0) throw ConfigError(m.field("cycles"), "must not be negative");
    m.maybe("steps_per_visit", spec.steps_per_visit);
    if (spec.steps_per_visit == 0) throw ConfigError(m.field("steps_per_visit"), "must be at least 1");
    m.finish();
    c.multiworld = std::move(spec);
  }

  if (r.has("environment")) {
    c.environment = parse_env(r.raw("environment"), "environment", base_dir);
  } else if (!c.multiworld) {
    throw ConfigError("environment", "required field is missing");
  } else {
    c.environment = c.multiworld->worlds.front();
  }

  if (!r.has("agents")) throw ConfigError("agents", "required field is missing");
  const json& groups = array_at(r, "agents");
  for (std::size_t i = 0; i < groups.size(); ++i) c.agents.push_back(parse_group(groups[i], element("agents", i)));
  if (c.population() == 0) throw ConfigError("agents", "the roster is empty");

  if (r.has("backend")) c.backend = parse_backend(r.raw("backend"), "backend", base_dir);

  if (r.has("transfer")) {
    Reader t = r.object("transfer");
    TransferSpec spec;
    spec.target = parse_env(t.raw("target"), t.field("target"), base_dir);
    if (spec.target.kind != EnvKind::questionnaire) {
      throw ConfigError(t.field("target.kind"), "the transfer target must be a questionnaire");
    }
    t.maybe("carry_memory", spec.carry_memory);
    t.finish();
    c.transfer = std::move(spec);
  }

  if (r.has("ablation")) {
    Reader a = r.object("ablation");
    AblationSpec spec;
    a.maybe("settings", spec.settings);
    for (int s : spec.settings) {
      if (s < 1 || s > 4) throw ConfigError(a.field("settings"), "settings are levels 1 to 4");
    }
    a.maybe("headline", spec.headline);
    a.maybe("summary", spec.summary);
    if (a.has("news_feed")) {
      const std::string path = resolve(base_dir, a.get<std::string>("news_feed", ""));
      spec.news = with_field(a.field("news_feed"), [&] { return market::load_news_feed(path); });
    }
    a.maybe("first_day", spec.first_day);
    if (a.has("last_day")) spec.last_day = a.get<int>("last_day", 0);
    a.finish();
    int top = 1;
    for (int s : spec.settings) top = std::max(top, s);
    if (top >= 2 && spec.headline.empty()) throw ConfigError(a.field("headline"), "needed for setting 2 and above");
    if (top >= 3 && spec.summary.empty()) throw ConfigError(a.field("summary"), "needed for setting 3 and above");
    if (top >= 4 && spec.news.empty()) throw ConfigError(a.field("news_feed"), "needed for setting 4");
    if (c.environment.kind != EnvKind::market) throw ConfigError("environment.kind", "ablation runs need a market");
    c.ablation = std::move(spec);
  }
  r.finish();

  if (c.multiworld) {
    std::vector<EnvKind> kinds;
    for (const auto& w : c.multiworld->worlds) kinds.push_back(w.kind);
    check_policies(c, kinds, true);
  } else {
    check_policies(c, {c.environment.kind}, c.transfer.has_value());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ConfigError("", "invalid JSON in " + path + ": " + e.what());
  }
  ExperimentConfig c = parse_config(j, std::filesystem::path(path).parent_path());
  c.source_text = buf.str();
  return c;
}

}  // namespace agentlab::runners
