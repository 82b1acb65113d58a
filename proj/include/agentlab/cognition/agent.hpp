#pragma once

#include <memory>
#include <string>

#include "agentlab/backends/backend.hpp"
#include "agentlab/backends/parsing.hpp"
#include "agentlab/backends/tool_loop.hpp"
#include "agentlab/cognition/memory.hpp"
#include "agentlab/cognition/persona.hpp"
#include "agentlab/cognition/prompt.hpp"
#include "agentlab/core/environment.hpp"

namespace agentlab {

struct AgentStepOptions {
  std::string model_id;
  double temperature = 0.0;
  int max_tool_rounds = 5;
  int max_parse_retries = 2;
  // Transport retries per completion request (remote backends).
  int max_request_retries = 2;
  // Model used for the second parsing stage; defaults to model_id.
  std::string parser_model;
};

struct AgentStepTrace {
  PromptBundle prompt;
  std::string raw_text;
  std::vector<ToolTraceEntry> tool_trace;
  std::size_t completions = 0;
  int parser_calls = 0;
};

// One policy evaluation: prompt -> tool loop -> two-stage parse. Records the
// observation, every tool result and the chosen action into `mem`.
// Throws ContractViolation when obs carries no response schema and
// ParseFailure when no valid action could be parsed.
ActionEnvelope agent_step(const Observation& obs, const PersonaConfig& cfg, MemoryStore& mem,
                          CompletionBackend& backend, CompletionBackend& parser, const AgentStepOptions& options,
                          std::string_view world_tag, AgentStepTrace* trace = nullptr);

// Config + memory + backend bound into an AgentPolicy.
class LlmAgent final : public AgentPolicy {
 public:
  LlmAgent(AgentId id, PersonaConfig config, std::unique_ptr<MemoryStore> memory, CompletionBackend& backend,
           AgentStepOptions options = {}, CompletionBackend* parser = nullptr);

  ActionEnvelope act(const Observation& obs) override;
  void enter_world(std::string_view world_tag) override { world_ = world_tag; }

  AgentId id() const { return id_; }
  PersonaConfig& config() { return config_; }
  const PersonaConfig& config() const { return config_; }
  MemoryStore& memory() { return *memory_; }
  const MemoryStore& memory() const { return *memory_; }
  void replace_memory(std::unique_ptr<MemoryStore> memory) { memory_ = std::move(memory); }
  const std::string& world() const { return world_; }
  const AgentStepTrace& last_trace() const { return last_trace_; }

 private:
  AgentId id_;
  PersonaConfig config_;
  std::unique_ptr<MemoryStore> memory_;
  CompletionBackend& backend_;
  CompletionBackend& parser_;
  AgentStepOptions options_;
  std::string world_;
  AgentStepTrace last_trace_;
};

}  // namespace agentlab
