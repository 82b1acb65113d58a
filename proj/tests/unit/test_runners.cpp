#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "agentlab/runners/config.hpp"
#include "agentlab/runners/factory.hpp"
#include "agentlab/runners/runners.hpp"
#include "agentlab/runners/stats.hpp"
#include "support/oracles.hpp"

using namespace agentlab;
using namespace agentlab::runners;
using nlohmann::json;

namespace {

const std::string kConfigs = std::string(AGENTLAB_SOURCE_DIR) + "/configs/";

json market_config() {
  return json::parse(R"({
    "environment": {"kind": "market", "days": 2},
    "agents": [{"count": 2}],
    "backend": {"kind": "scripted"}
  })");
}

std::string config_error(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "no error";
}

}  // namespace

TEST(Config, DefaultsAndPopulation) {
  auto c = parse_config(market_config());
  EXPECT_EQ(c.population(), 2u);
  EXPECT_EQ(c.trials, 1);
  EXPECT_EQ(c.environment.kind, EnvKind::market);
  EXPECT_EQ(std::get<market::MarketConfig>(c.environment.params).days, 2);
  EXPECT_EQ(c.agents[0].memory.variant, "chat_history");
  EXPECT_EQ(c.agents[0].memory.parameters["window"], 5);
}

TEST(Config, ErrorsNameTheField) {
  auto j = market_config();
  j["foo"] = 1;
  EXPECT_EQ(config_error(j), "foo: unknown key 'foo'");
  j = market_config();
  j["environment"]["days"] = "two";
  EXPECT_EQ(config_error(j), "environment.days: expected an integer");
  j = market_config();
  j["agents"][0]["memory"] = {{"variant", "buffer"}};
  EXPECT_NE(config_error(j).find("agents[0].memory.capacity"), std::string::npos);
  j = market_config();
  j.erase("agents");
  EXPECT_NE(config_error(j).find("agents"), std::string::npos);
  j = market_config();
  j["environment"]["kind"] = "casino";
  EXPECT_NE(config_error(j).find("environment.kind"), std::string::npos);
  j = market_config();
  j["agents"][0]["policy"] = "increment";
  EXPECT_NE(config_error(j), "no error");
}

TEST(Config, ShippedConfigsLoad) {
  for (const char* name : {"minimal.json", "market_scripted.json", "market_noise.json", "auction.json", "economy.json",
                           "social.json", "transfer.json", "multiworld.json", "ablation.json"}) {
    EXPECT_NO_THROW(load_config(kConfigs + name)) << name;
  }
  EXPECT_THROW(load_config(kConfigs + "missing.json"), ConfigError);
}

TEST(Factory, MinimalInstanceValidates) {
  for (auto kind : {EnvKind::market, EnvKind::auction, EnvKind::economy, EnvKind::social, EnvKind::questionnaire}) {
    const auto schema = action_schema(kind);
    EXPECT_TRUE(validate(minimal_instance(schema), schema).empty()) << to_string(kind);
    EXPECT_TRUE(validate(passive_action(kind), schema).empty()) << to_string(kind);
  }
  EXPECT_EQ(minimal_instance(action_schema(EnvKind::social)), json({{"action", "do_nothing"}}));
}

TEST(Stats, MeanStd) {
  const std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
  const auto m = mean_stddev(v);
  EXPECT_DOUBLE_EQ(m.mean, 5);
  EXPECT_NEAR(m.stddev, std::sqrt(32.0 / 7.0), 1e-12);
  EXPECT_DOUBLE_EQ(mean_stddev(std::vector<double>{3}).stddev, 0);
  EXPECT_THROW(mean_stddev(std::vector<double>{}), ContractViolation);
}

TEST(Stats, PairedTTestMatchesIntegratedDensity) {
  RngStream rng(12);
  for (int df = 1; df <= 30; ++df) {
    std::vector<double> d;
    for (int i = 0; i <= df; ++i) d.push_back(rng.uniform(-1, 2));
    const auto r = paired_t_test(d);
    EXPECT_EQ(r.df, df);
    const auto m = mean_stddev(d);
    EXPECT_NEAR(r.t, m.mean / (m.stddev / std::sqrt(d.size())), 1e-12);
    EXPECT_NEAR(r.p, oracle::t_two_sided_p(r.t, df), 1e-6) << "df " << df;
  }
  EXPECT_THROW(paired_t_test(std::vector<double>{1}), TooFewSamples);
  EXPECT_THROW(paired_t_test(std::vector<double>{1, 1, 1}), ZeroVariance);
}

TEST(Trials, SeedsAndCsvAggregation) {
  auto inputs = RunInputs::from(load_config(kConfigs + "market_noise.json"));
  inputs.environment.max_steps = 6;
  const auto r = run_trials(inputs, 40, 3);
  ASSERT_EQ(r.rows.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(r.rows[i].seed, 40u + i);
    EXPECT_FALSE(r.rows[i].error);
  }
  const auto again = run_trials(inputs, 40, 3, true);
  EXPECT_EQ(to_jsonl(again.rows[2].log), to_jsonl(r.rows[2].log));

  std::ostringstream os;
  write_trials_csv(os, r);
  std::istringstream in(os.str());
  std::string header, line;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("trial,seed,", 0), 0u);
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[3].rfind("mean,,", 0), 0u);
  EXPECT_EQ(lines[4].rfind("stddev,,", 0), 0u);
  std::vector<double> trades;
  for (const auto& row : r.rows) trades.push_back(row.metrics.at("trades"));
  EXPECT_DOUBLE_EQ(r.summary.at("trades").mean, mean_stddev(trades).mean);
}

TEST(Trials, RescoreAgreesWithLiveMetrics) {
  auto inputs = RunInputs::from(load_config(kConfigs + "market_noise.json"));
  auto run = run_single(inputs, 3);
  const auto offline = score_events(run->log.records, inputs.environment);
  EXPECT_DOUBLE_EQ(offline.at("trades"), run->metrics.at("trades"));
  EXPECT_DOUBLE_EQ(offline.at("A.volume"), run->metrics.at("A.volume"));
}

TEST(Transfer, WithoutCarryTheArmsAgree) {
  auto cfg = load_config(kConfigs + "transfer.json");
  const auto r = run_memory_transfer(RunInputs::from(cfg), cfg.transfer->target, false, cfg.seed);
  ASSERT_FALSE(r.subscales.empty());
  for (const auto& d : r.subscales) EXPECT_DOUBLE_EQ(d.difference, 0.0) << d.name;
  for (const auto& d : r.pairs) EXPECT_DOUBLE_EQ(d.difference, 0.0) << d.name;
  EXPECT_FALSE(r.t_test);
  EXPECT_FALSE(r.t_test_note.empty());
}

TEST(Transfer, CarriedMemoryShiftsAnswers) {
  auto cfg = load_config(kConfigs + "transfer.json");
  const auto r = run_memory_transfer(RunInputs::from(cfg), cfg.transfer->target, true, cfg.seed);
  bool shifted = false;
  for (const auto& d : r.subscales) shifted |= d.difference != 0.0;
  EXPECT_TRUE(shifted);
  EXPECT_EQ(to_jsonl(r.fresh_log).size() > 0, true);
  std::ostringstream os;
  write_transfer_csv(os, r);
  EXPECT_EQ(os.str().rfind("kind,name,carry,fresh,difference\n", 0), 0u);
}

TEST(MultiWorld, ScheduleAndPersistentMemory) {
  auto cfg = load_config(kConfigs + "multiworld.json");
  const auto& mw = *cfg.multiworld;
  const auto r = run_multiworld(mw.worlds, cfg.agents, cfg.backend, mw.cycles, mw.steps_per_visit, cfg.seed);
  EXPECT_EQ(r.visits, (std::vector<std::string>{"market", "social", "market", "social", "market", "social"}));
  for (const auto& rec : r.log.records) EXPECT_TRUE(rec.info.contains("world"));
  for (const auto& [id, sizes] : r.archive_sizes) {
    ASSERT_EQ(sizes.size(), 6u);
    for (std::size_t i = 1; i < sizes.size(); ++i) EXPECT_GT(sizes[i], sizes[i - 1]);
  }
}

TEST(Ablation, LevelsAreCumulative) {
  auto cfg = load_config(kConfigs + "ablation.json");
  const auto base = RunInputs::from(cfg);
  const auto& spec = *cfg.ablation;
  const auto l1 = ablation_inputs(base, spec, 1);
  const auto l2 = ablation_inputs(base, spec, 2);
  const auto l3 = ablation_inputs(base, spec, 3);
  const auto l4 = ablation_inputs(base, spec, 4);
  EXPECT_TRUE(l1.agents[0].persona.extra_directives.empty());
  EXPECT_EQ(l2.agents[0].persona.extra_directives.back(), spec.headline);
  EXPECT_TRUE(l2.agents[0].notes.empty());
  EXPECT_EQ(l3.agents[0].notes.back(), spec.summary);
  EXPECT_EQ(l3.agents[0].persona.extra_directives, l2.agents[0].persona.extra_directives);
  EXPECT_FALSE(std::get<market::MarketConfig>(l3.environment.params).news_tool);
  EXPECT_TRUE(std::get<market::MarketConfig>(l4.environment.params).news_tool);
  EXPECT_EQ(l4.agents[0].notes, l3.agents[0].notes);

  const auto r = run_tariff_ablation(base, spec, cfg.seed, 2);
  ASSERT_EQ(r.rows.size(), 4u);
  EXPECT_FALSE(r.rows[0].delta.at("A"));
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    EXPECT_NE(r.rows[i].sample_prompt.find(spec.headline), std::string::npos);
    ASSERT_TRUE(r.rows[i].delta.at("A"));
    EXPECT_DOUBLE_EQ(*r.rows[i].delta.at("A"), r.rows[i].ratio.at("A") - r.rows[i - 1].ratio.at("A"));
  }
  EXPECT_EQ(r.rows[0].sample_prompt.find(spec.headline), std::string::npos);
  EXPECT_NE(r.rows[2].sample_prompt.find(spec.summary), std::string::npos);
  EXPECT_NE(r.rows[3].sample_prompt.find("fetch_news"), std::string::npos);
  std::ostringstream os;
  write_ablation_csv(os, r);
  EXPECT_EQ(os.str().rfind("setting,A,B,delta_A,delta_B\n1,", 0), 0u);
}
