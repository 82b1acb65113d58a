#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "agentlab/core/observation.hpp"
#include "agentlab/core/schema.hpp"

namespace agentlab {

enum class Role { system, user, assistant, tool };

std::string_view to_string(Role role);
Role role_from_string(std::string_view s);

struct ToolCallRequest {
  std::string id;
  std::string name;
  std::string arguments_text;

  friend bool operator==(const ToolCallRequest&, const ToolCallRequest&) = default;
};

struct ChatTurn {
  Role role = Role::user;
  std::string content;
  std::vector<ToolCallRequest> tool_calls;
  // Required when role == tool; names the assistant request it answers.
  std::optional<std::string> tool_call_id;

  friend bool operator==(const ChatTurn&, const ChatTurn&) = default;
};

struct CompletionRequest {
  std::vector<ChatTurn> turns;
  std::string model_id;
  double temperature = 0.0;
  // Only name, description and parameters are read; handlers stay local.
  std::vector<ToolSpec> tools;
  std::optional<Schema> response_schema;
  int max_retries = 0;
};

struct CompletionResult {
  std::string content;
  std::vector<ToolCallRequest> tool_calls;

  bool has_tool_calls() const { return !tool_calls.empty(); }
  friend bool operator==(const CompletionResult&, const CompletionResult&) = default;
};

// "role: content" lines; what scripted rule predicates look at.
std::string render_turns(const std::vector<ChatTurn>& turns);

nlohmann::json to_json(const ChatTurn& turn);
nlohmann::json to_json(const CompletionResult& result);
CompletionResult completion_result_from_json(const nlohmann::json& j);

// Chat-completions request body: model, temperature, messages, tools,
// response_format.
nlohmann::json to_wire(const CompletionRequest& request);
// Reads choices[0].message.{content, tool_calls}.
CompletionResult from_wire(const nlohmann::json& response);

// SHA-256 over the canonical JSON of (turns, tools, response schema).
// model_id and temperature join the hash only when include_sampling is set.
std::string fingerprint(const CompletionRequest& request, bool include_sampling = false);

// Every tool turn must answer exactly one earlier assistant request.
// Returns the problems found; empty means the transcript is well formed.
std::vector<std::string> check_turn_structure(const std::vector<ChatTurn>& turns);

}  // namespace agentlab
