#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "agentlab/core/ids.hpp"
#include "agentlab/core/message.hpp"
#include "agentlab/core/schema.hpp"

namespace agentlab {

// Tool handlers answer intra-step queries. They must not mutate environment
// state and may be called concurrently.
using ToolHandler = std::function<std::string(const nlohmann::json& arguments)>;

struct ToolSpec {
  std::string name;
  std::string description;
  Schema parameters = schema::object({});
  ToolHandler handler;
};

struct Observation {
  AgentId agent_id;
  TimeStep time = 0;
  std::string context_text;
  std::vector<Message> inbox;
  std::vector<ToolSpec> tools;
  // Absent when the agent only observes this step.
  std::optional<Schema> response_schema;
  std::optional<double> reward;

  bool expects_action() const { return response_schema.has_value(); }
};

struct ActionEnvelope {
  AgentId agent_id;
  TimeStep time = 0;
  nlohmann::json body = nlohmann::json::object();
  std::vector<Message> outgoing_messages;
};

using ObservationMap = std::map<AgentId, Observation>;
using ActionMap = std::map<AgentId, ActionEnvelope>;

}  // namespace agentlab
