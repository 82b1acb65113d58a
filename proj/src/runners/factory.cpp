#include "agentlab/runners/factory.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "agentlab/backends/remote.hpp"

namespace agentlab::runners {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class Env>
const Env& as(const Environment& env) {
  const auto* p = dynamic_cast<const Env*>(&env);
  if (p == nullptr) throw ContractViolation("environment kind mismatch for " + std::string(env.name()));
  return *p;
}

template <class Env>
Env& as(Environment& env) {
  auto* p = dynamic_cast<Env*>(&env);
  if (p == nullptr) throw ContractViolation("environment kind mismatch for " + std::string(env.name()));
  return *p;
}

double param(const json& p, const char* name, double fallback) {
  return p.contains(name) ? p.at(name).get<double>() : fallback;
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return kNaN;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// Replay with an optional scripted fallback that it owns.
class ReplayWithFallback final : public CompletionBackend {
 public:
  ReplayWithFallback(std::map<std::string, CompletionResult> transcript, bool strict,
                     std::unique_ptr<CompletionBackend> fallback)
      : fallback_(std::move(fallback)),
        replay_(std::move(transcript), ReplayOptions{strict, false}, strict ? nullptr : fallback_.get()) {}
  CompletionResult complete(const CompletionRequest& request) override { return replay_.complete(request); }

 private:
  std::unique_ptr<CompletionBackend> fallback_;
  ReplayBackend replay_;
};

std::unique_ptr<ScriptedBackend> scripted(const BackendSpec& spec, const std::string& fallback_content) {
  auto backend = std::make_unique<ScriptedBackend>();
  for (const auto& rule : spec.rules) {
    backend->on(rule.if_contains ? ScriptedBackend::contains(*rule.if_contains) : ScriptedBackend::always(),
                rule.result);
  }
  const std::string text = spec.default_content.value_or(fallback_content);
  backend->on(ScriptedBackend::always(), [text](const CompletionRequest& req) {
    if (req.response_schema) return CompletionResult{minimal_instance(*req.response_schema).dump(), {}};
    return CompletionResult{text, {}};
  });
  return backend;
}

}  // namespace

Schema action_schema(EnvKind kind) {
  switch (kind) {
    case EnvKind::market: return market::MarketEnvironment::action_schema();
    case EnvKind::auction: return auction::AuctionEnvironment::action_schema();
    case EnvKind::economy: return economy::EconomyEnvironment::action_schema();
    case EnvKind::social: return social::SocialEnvironment::action_schema();
    case EnvKind::questionnaire: return questionnaire::QuestionnaireEnvironment::action_schema();
  }
  throw ContractViolation("unknown environment kind");
}

json passive_action(EnvKind kind) {
  switch (kind) {
    case EnvKind::market: return market::MarketEnvironment::passive_action();
    case EnvKind::auction: return auction::AuctionEnvironment::passive_action();
    case EnvKind::economy: return economy::EconomyEnvironment::passive_action();
    case EnvKind::social: return social::SocialEnvironment::passive_action();
    case EnvKind::questionnaire: return questionnaire::QuestionnaireEnvironment::passive_action();
  }
  throw ContractViolation("unknown environment kind");
}

json minimal_instance(const TypeSpec& type) {
  switch (type.kind) {
    case ValueKind::integer: return static_cast<std::int64_t>(std::ceil(type.minimum.value_or(0.0)));
    case ValueKind::number: return type.minimum.value_or(0.0);
    case ValueKind::string: return type.allowed.empty() ? std::string() : type.allowed.front();
    case ValueKind::boolean: return false;
    case ValueKind::array: return json::array();
    case ValueKind::map: return json::object();
    case ValueKind::object: {
      json out = json::object();
      for (const auto& f : type.fields) {
        if (f.required) out[f.name] = minimal_instance(f.type);
      }
      return out;
    }
  }
  return nullptr;
}

std::unique_ptr<CompletionBackend> make_backend(const BackendSpec& spec, const std::string& fallback_content) {
  if (spec.kind == "scripted") return scripted(spec, fallback_content);
  if (spec.kind == "replay") {
    return std::make_unique<ReplayWithFallback>(ReplayBackend::load_transcript(spec.transcript), spec.strict,
                                                scripted(spec, fallback_content));
  }
  if (spec.kind == "remote") return std::make_unique<RemoteBackend>(spec.remote);
  throw ConfigError("backend.kind", "unknown backend kind '" + spec.kind + "'");
}

std::unique_ptr<Environment> make_environment(const EnvSpec& spec, std::size_t population) {
  switch (spec.kind) {
    case EnvKind::market: {
      auto c = std::get<market::MarketConfig>(spec.params);
      c.agents = population;
      return std::make_unique<market::MarketEnvironment>(std::move(c));
    }
    case EnvKind::auction: {
      auto c = std::get<auction::AuctionConfig>(spec.params);
      c.bidders = population;
      return std::make_unique<auction::AuctionEnvironment>(std::move(c));
    }
    case EnvKind::economy: {
      auto c = std::get<economy::EconomyConfig>(spec.params);
      c.households = population;
      return std::make_unique<economy::EconomyEnvironment>(std::move(c));
    }
    case EnvKind::social: {
      auto c = std::get<social::SocialConfig>(spec.params);
      if (!c.profiles.empty() && c.profiles.size() != population) {
        throw ConfigError("environment.profiles", "has " + std::to_string(c.profiles.size()) +
                                                      " profiles for a roster of " + std::to_string(population));
      }
      c.agents = population;
      return std::make_unique<social::SocialEnvironment>(std::move(c));
    }
    case EnvKind::questionnaire: {
      auto c = std::get<questionnaire::QuestionnaireConfig>(spec.params);
      c.respondents.clear();
      for (std::uint32_t i = 0; i < population; ++i) c.respondents.emplace_back(i);
      return std::make_unique<questionnaire::QuestionnaireEnvironment>(std::move(c));
    }
  }
  throw ContractViolation("unknown environment kind");
}

Roster make_roster(const std::vector<AgentGroup>& groups, Environment* env, CompletionBackend& backend,
                   std::string_view notes_world) {
  Roster roster;
  std::uint32_t next = 0;
  for (const auto& g : groups) {
    for (std::size_t k = 0; k < g.count; ++k) {
      const AgentId id(next++);
      std::unique_ptr<AgentPolicy> policy;
      if (g.policy == "llm") {
        auto agent = std::make_unique<LlmAgent>(id, g.persona, make_memory(g.memory.variant, g.memory.parameters),
                                                backend, g.options);
        for (const auto& note : g.notes) {
          agent->memory().record({0, std::string(notes_world), MemoryRole::note, note});
        }
        roster.llm[id] = agent.get();
        policy = std::move(agent);
      } else {
        if (env == nullptr) throw ContractViolation("built-in policies need an environment");
        const json& p = g.params;
        if (g.policy == "noise") {
          policy = std::make_unique<market::NoiseTrader>(as<market::MarketEnvironment>(*env), id,
                                                         param(p, "activity", 0.6));
        } else if (g.policy == "increment") {
          std::optional<double> cap;
          if (p.contains("spend_cap")) cap = p.at("spend_cap").get<double>();
          policy = std::make_unique<auction::IncrementBidder>(as<auction::AuctionEnvironment>(*env), id,
                                                              param(p, "increment", 100.0),
                                                              param(p, "participation", 1.0), cap);
        } else if (g.policy == "propensity") {
          policy = std::make_unique<economy::PropensityHousehold>(id, param(p, "work", 0.8), param(p, "consumption", 0.5),
                                                                  param(p, "noise", 0.0));
        } else if (g.policy == "random") {
          policy = std::make_unique<social::RandomSocialUser>(as<social::SocialEnvironment>(*env), id);
        } else if (g.policy == "fixed") {
          policy = std::make_unique<questionnaire::FixedResponder>(
              as<questionnaire::QuestionnaireEnvironment>(*env), id, param(p, "position", 0.5),
              static_cast<int>(param(p, "jitter", 0.0)));
        } else {
          throw ContractViolation("unknown policy " + g.policy);
        }
      }
      roster.view[id] = policy.get();
      roster.owned.push_back(std::move(policy));
    }
  }
  return roster;
}

std::map<std::string, double> collect_metrics(const Environment& env, EnvKind kind, const EpisodeLog& log) {
  std::map<std::string, double> m;
  switch (kind) {
    case EnvKind::market: {
      const auto& e = as<market::MarketEnvironment>(env);
      std::vector<std::string> symbols;
      for (const auto& s : e.config().stocks) symbols.push_back(s.symbol);
      for (const auto& s : symbols) {
        const auto& h = e.price_history(s);
        m[s + ".final_price"] = h.back();
        m[s + ".price_change"] = h.size() >= 2 ? market::price_change_rate(h) : 0.0;
        double volume = 0.0;
        for (const auto& row : e.metrics()) {
          if (row.symbol == s) volume += static_cast<double>(row.volume);
        }
        m[s + ".volume"] = volume;
        m[s + ".buy_sell_ratio"] = kNaN;
      }
      try {
        for (const auto& [s, r] : market::buy_sell_ratio(log.records, symbols, 1, e.config().days)) {
          m[s + ".buy_sell_ratio"] = r;
        }
      } catch (const market::UndefinedRatio&) {
      }
      m["trades"] = static_cast<double>(filter_action(log.records, "trade").size());
      m["total_loans"] = e.total_loans();
      m["total_interest"] = e.total_interest();
      break;
    }
    case EnvKind::auction: {
      const auto& e = as<auction::AuctionEnvironment>(env);
      double revenue = 0.0;
      for (const auto& s : e.sales()) revenue += s.price;
      double profit = 0.0;
      for (const auto& [id, b] : e.bidders()) profit += b.profit;
      m["items_sold"] = static_cast<double>(e.sales().size());
      m["items_unsold"] = static_cast<double>(e.unsold().size());
      m["revenue"] = revenue;
      m["total_profit"] = profit;
      m["rounds"] = e.rounds_played();
      break;
    }
    case EnvKind::economy: {
      const auto& e = as<economy::EconomyEnvironment>(env);
      const auto& series = e.indicators();
      std::vector<double> u;
      std::vector<double> pi;
      for (const auto& x : series) {
        u.push_back(x.unemployment);
        pi.push_back(x.inflation);
      }
      m["mean_unemployment"] = mean_of(u);
      m["mean_inflation"] = mean_of(pi);
      m["final_price_level"] = series.empty() ? kNaN : series.back().price_level;
      m["final_gdp"] = series.empty() ? kNaN : series.back().gdp;
      m["final_interest_rate"] = series.empty() ? kNaN : series.back().interest_rate;
      const auto reg = economy::analyze(series);
      m["phillips_slope"] = reg.phillips ? reg.phillips->slope : kNaN;
      m["okun_slope"] = reg.okun ? reg.okun->slope : kNaN;
      break;
    }
    case EnvKind::social: {
      const auto& e = as<social::SocialEnvironment>(env);
      double likes = 0.0;
      for (const auto& p : e.state().posts) likes += static_cast<double>(p.likes.size());
      m["posts"] = static_cast<double>(e.state().posts.size());
      m["comments"] = static_cast<double>(e.state().comments.size());
      m["likes"] = likes;
      m["rejected"] = static_cast<double>(filter_action(log.records, "reject_action").size());
      break;
    }
    case EnvKind::questionnaire: {
      const auto& e = as<questionnaire::QuestionnaireEnvironment>(env);
      std::map<std::string, std::vector<double>> values;
      for (const auto& [id, sheet] : e.sheets()) {
        if (sheet.responses.size() != e.items().size()) continue;
        const auto report = questionnaire::score(sheet, e.items());
        for (const auto& s : report.subscales) values["subscale." + s.subscale].push_back(s.normalized_mean);
        for (const auto& b : report.biases) values["bias." + b.pair_id].push_back(b.bias);
      }
      for (const auto& [k, v] : values) m[k] = mean_of(v);
      break;
    }
  }
  return m;
}

void write_detail_csv(std::ostream& os, const Environment& env, EnvKind kind) {
  switch (kind) {
    case EnvKind::market:
      market::write_metrics_csv(os, as<market::MarketEnvironment>(env).metrics());
      return;
    case EnvKind::auction:
      auction::write_priority_csv(os, as<auction::AuctionEnvironment>(env).priorities());
      return;
    case EnvKind::economy:
      economy::write_indicators_csv(os, as<economy::EconomyEnvironment>(env).indicators());
      return;
    case EnvKind::social: {
      const auto& state = as<social::SocialEnvironment>(env).state();
      os << "post_id,author,time,likes,comments\n";
      for (const auto& p : state.posts) {
        os << p.post_id << ',' << p.author.value << ',' << p.time << ',' << p.likes.size() << ','
           << state.comments_on(p.post_id).size() << '\n';
      }
      return;
    }
    case EnvKind::questionnaire: {
      const auto& e = as<questionnaire::QuestionnaireEnvironment>(env);
      const auto old = os.precision(17);
      os << "agent,kind,name,items,raw_mean,normalized_mean,bias\n";
      for (const auto& [id, sheet] : e.sheets()) {
        if (sheet.responses.size() != e.items().size()) continue;
        const auto report = questionnaire::score(sheet, e.items());
        for (const auto& s : report.subscales) {
          os << id.value << ",subscale," << s.subscale << ',' << s.items << ',' << s.raw_mean << ','
             << s.normalized_mean << ",\n";
        }
        for (const auto& b : report.biases) os << id.value << ",pair," << b.pair_id << ",,,," << b.bias << '\n';
      }
      os.precision(old);
      return;
    }
  }
}

RunInputs RunInputs::from(const ExperimentConfig& config) {
  return {config.environment, config.agents, config.backend, config.parallel_agents};
}

std::unique_ptr<EpisodeRun> run_single(const RunInputs& inputs, std::uint64_t seed,
                                       std::function<void(const CompletionRequest&)> observer) {
  auto run = std::make_unique<EpisodeRun>();
  std::size_t population = 0;
  for (const auto& g : inputs.agents) population += g.count;
  run->backend = make_backend(inputs.backend, passive_action(inputs.environment.kind).dump());
  CompletionBackend* backend = run->backend.get();
  if (observer) {
    run->observed = std::make_unique<ObservingBackend>(*run->backend, std::move(observer));
    backend = run->observed.get();
  }
  run->env = make_environment(inputs.environment, population);
  run->roster = make_roster(inputs.agents, run->env.get(), *backend, run->env->name());
  EpisodeOptions options;
  options.parallel_agents = inputs.parallel_agents;
  run->log = run_episode(*run->env, run->roster.view, inputs.environment.max_steps, seed, options);
  run->metrics = collect_metrics(*run->env, inputs.environment.kind, run->log);
  return run;
}

}  // namespace agentlab::runners
