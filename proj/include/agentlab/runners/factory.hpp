#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "agentlab/core/episode.hpp"
#include "agentlab/runners/config.hpp"

namespace agentlab::runners {

Schema action_schema(EnvKind kind);
nlohmann::json passive_action(EnvKind kind);

// Smallest payload accepted by `type`: first enum value, lower bound or 0 for
// numbers, empty text/arrays/maps, optional fields left out.
nlohmann::json minimal_instance(const TypeSpec& type);

// Scripted backends answer unmatched requests with `fallback_content`, or
// with minimal_instance of the response schema when the request carries one.
std::unique_ptr<CompletionBackend> make_backend(const BackendSpec& spec, const std::string& fallback_content);

std::unique_ptr<Environment> make_environment(const EnvSpec& spec, std::size_t population);

struct Roster {
  std::vector<std::unique_ptr<AgentPolicy>> owned;
  AgentRoster view;
  std::map<AgentId, LlmAgent*> llm;
};

// Ids are assigned in group order starting at 0. Built-in policies bind to
// `env`, which must then be of the matching kind. Group notes are recorded
// with `notes_world` as their world tag.
Roster make_roster(const std::vector<AgentGroup>& groups, Environment* env, CompletionBackend& backend,
                   std::string_view notes_world);

// Flat per-run numbers used for trial tables. Undefined values are NaN.
std::map<std::string, double> collect_metrics(const Environment& env, EnvKind kind, const EpisodeLog& log);

// The environment's detailed table (session prices, indicators, ...).
void write_detail_csv(std::ostream& os, const Environment& env, EnvKind kind);

// Passes requests to `inner` after showing them to `observer`.
class ObservingBackend final : public CompletionBackend {
 public:
  ObservingBackend(CompletionBackend& inner, std::function<void(const CompletionRequest&)> observer)
      : inner_(inner), observer_(std::move(observer)) {}
  CompletionResult complete(const CompletionRequest& request) override {
    observer_(request);
    return inner_.complete(request);
  }

 private:
  CompletionBackend& inner_;
  std::function<void(const CompletionRequest&)> observer_;
};

struct RunInputs {
  EnvSpec environment;
  std::vector<AgentGroup> agents;
  BackendSpec backend;
  bool parallel_agents = false;

  static RunInputs from(const ExperimentConfig& config);
};

struct EpisodeRun {
  std::unique_ptr<CompletionBackend> backend;
  std::unique_ptr<CompletionBackend> observed;
  std::unique_ptr<Environment> env;
  Roster roster;
  EpisodeLog log;
  std::map<std::string, double> metrics;
};

// Builds everything from scratch and runs one episode with `seed`.
std::unique_ptr<EpisodeRun> run_single(const RunInputs& inputs, std::uint64_t seed,
                                       std::function<void(const CompletionRequest&)> observer = {});

}  // namespace agentlab::runners
