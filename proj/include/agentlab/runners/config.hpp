#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "agentlab/backends/remote.hpp"
#include "agentlab/cognition/agent.hpp"
#include "agentlab/env/auction.hpp"
#include "agentlab/env/economy.hpp"
#include "agentlab/env/market.hpp"
#include "agentlab/env/questionnaire.hpp"
#include "agentlab/env/social.hpp"

namespace agentlab::runners {

// Names the offending field, e.g. "agents[0].memory.capacity".
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class EnvKind { market, auction, economy, social, questionnaire };

std::string_view to_string(EnvKind kind);

// Population size is not part of the environment parameters; it always equals
// the roster size.
struct EnvSpec {
  EnvKind kind = EnvKind::market;
  std::variant<market::MarketConfig, auction::AuctionConfig, economy::EconomyConfig, social::SocialConfig,
               questionnaire::QuestionnaireConfig>
      params;
  std::size_t max_steps = 1'000'000;
};

struct MemorySpec {
  std::string variant = "chat_history";
  nlohmann::json parameters = {{"window", 5}, {"token_limit", 100000}};
};

// `count` agents with consecutive ids sharing one composition. policy "llm"
// uses the backend; the other policies are built-in scripted agents:
// noise (market), increment (auction), propensity (economy), random (social),
// fixed (questionnaire).
struct AgentGroup {
  std::size_t count = 1;
  std::string policy = "llm";
  PersonaConfig persona;
  MemorySpec memory;
  AgentStepOptions options;
  // Entries with role note recorded before the first step.
  std::vector<std::string> notes;
  nlohmann::json params = nlohmann::json::object();
};

struct ScriptRule {
  std::optional<std::string> if_contains;  // absent matches every request
  CompletionResult result;
};

struct BackendSpec {
  std::string kind = "scripted";  // scripted | replay | remote
  std::vector<ScriptRule> rules;
  // Reply when no rule matches; the environment's passive action if unset.
  std::optional<std::string> default_content;
  std::string transcript;  // replay
  bool strict = true;      // replay
  RemoteOptions remote;
};

struct TransferSpec {
  EnvSpec target;  // a questionnaire
  bool carry_memory = true;
};

struct MultiWorldSpec {
  std::vector<EnvSpec> worlds;
  int cycles = 1;
  std::size_t steps_per_visit = 1;
};

struct AblationSpec {
  std::vector<int> settings{1, 2, 3, 4};
  std::string headline;
  std::string summary;
  std::vector<market::NewsItem> news;
  int first_day = 1;
  std::optional<int> last_day;  // defaults to the final day
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  int trials = 1;
  std::string output = "out";
  bool parallel_agents = false;
  EnvSpec environment;
  std::vector<AgentGroup> agents;
  BackendSpec backend;
  std::optional<TransferSpec> transfer;
  std::optional<MultiWorldSpec> multiworld;
  std::optional<AblationSpec> ablation;
  // Raw file content, kept for hashing and for the manifest.
  std::string source_text;

  std::size_t population() const;
};

// Strict: unknown keys and wrong types raise ConfigError. Relative file paths
// inside the config resolve against base_dir.
ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::string& path);

}  // namespace agentlab::runners
