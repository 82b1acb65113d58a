#include "agentlab/backends/types.hpp"

#include <map>
#include <set>
#include <stdexcept>

#include "agentlab/core/hash.hpp"

namespace agentlab {

using nlohmann::json;

std::string_view to_string(Role role) {
  switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
    case Role::tool: return "tool";
  }
  return "user";
}

Role role_from_string(std::string_view s) {
  if (s == "system") return Role::system;
  if (s == "user") return Role::user;
  if (s == "assistant") return Role::assistant;
  if (s == "tool") return Role::tool;
  throw std::invalid_argument("unknown chat role '" + std::string(s) + "'");
}

std::string render_turns(const std::vector<ChatTurn>& turns) {
  std::string out;
  for (const auto& t : turns) {
    out += to_string(t.role);
    out += ": ";
    out += t.content;
    for (const auto& call : t.tool_calls) {
      out += "\n[tool call " + call.id + "] " + call.name + " " + call.arguments_text;
    }
    out += '\n';
  }
  return out;
}

namespace {

json tool_calls_json(const std::vector<ToolCallRequest>& calls) {
  json arr = json::array();
  for (const auto& c : calls) {
    arr.push_back({{"id", c.id}, {"type", "function"}, {"function", {{"name", c.name}, {"arguments", c.arguments_text}}}});
  }
  return arr;
}

std::vector<ToolCallRequest> tool_calls_from_json(const json& arr) {
  std::vector<ToolCallRequest> out;
  if (!arr.is_array()) return out;
  for (const auto& c : arr) {
    const auto& fn = c.at("function");
    std::string args;
    if (fn.contains("arguments")) {
      args = fn["arguments"].is_string() ? fn["arguments"].get<std::string>() : fn["arguments"].dump();
    }
    out.push_back({c.value("id", ""), fn.at("name").get<std::string>(), std::move(args)});
  }
  return out;
}

json tools_json(const std::vector<ToolSpec>& tools) {
  json arr = json::array();
  for (const auto& t : tools) {
    arr.push_back({{"type", "function"},
                   {"function", {{"name", t.name}, {"description", t.description}, {"parameters", to_json_schema(t.parameters)}}}});
  }
  return arr;
}

}  // namespace

json to_json(const ChatTurn& t) {
  json j{{"role", to_string(t.role)}, {"content", t.content}};
  if (!t.tool_calls.empty()) j["tool_calls"] = tool_calls_json(t.tool_calls);
  if (t.tool_call_id) j["tool_call_id"] = *t.tool_call_id;
  return j;
}

json to_json(const CompletionResult& r) {
  json j{{"content", r.content}};
  j["tool_calls"] = tool_calls_json(r.tool_calls);
  return j;
}

CompletionResult completion_result_from_json(const json& j) {
  CompletionResult r;
  if (j.contains("content") && j["content"].is_string()) r.content = j["content"].get<std::string>();
  if (j.contains("tool_calls")) r.tool_calls = tool_calls_from_json(j["tool_calls"]);
  return r;
}

json to_wire(const CompletionRequest& req) {
  json messages = json::array();
  for (const auto& t : req.turns) messages.push_back(to_json(t));
  json body{{"model", req.model_id}, {"temperature", req.temperature}, {"messages", std::move(messages)}};
  if (!req.tools.empty()) body["tools"] = tools_json(req.tools);
  if (req.response_schema) {
    body["response_format"] = {{"type", "json_schema"},
                               {"json_schema", {{"name", "response"}, {"schema", to_json_schema(*req.response_schema)}}}};
  }
  return body;
}

CompletionResult from_wire(const json& response) {
  const auto& choices = response.at("choices");
  if (!choices.is_array() || choices.empty()) throw std::runtime_error("completion response has no choices");
  return completion_result_from_json(choices[0].at("message"));
}

std::string fingerprint(const CompletionRequest& req, bool include_sampling) {
  json turns = json::array();
  for (const auto& t : req.turns) turns.push_back(to_json(t));
  json canonical{{"turns", std::move(turns)},
                 {"tools", tools_json(req.tools)},
                 {"schema", req.response_schema ? to_json_schema(*req.response_schema) : json(nullptr)}};
  if (include_sampling) {
    canonical["model"] = req.model_id;
    canonical["temperature"] = req.temperature;
  }
  return sha256_hex(canonical.dump());
}

std::vector<std::string> check_turn_structure(const std::vector<ChatTurn>& turns) {
  std::vector<std::string> problems;
  std::set<std::string> requested;
  std::set<std::string> answered;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const auto& t = turns[i];
    const std::string where = "turn " + std::to_string(i);
    if (t.role == Role::assistant) {
      std::set<std::string> local;
      for (const auto& c : t.tool_calls) {
        if (!local.insert(c.id).second) problems.push_back(where + ": duplicate tool call id " + c.id);
        if (!requested.insert(c.id).second) problems.push_back(where + ": tool call id reused " + c.id);
      }
    } else if (!t.tool_calls.empty()) {
      problems.push_back(where + ": only assistant turns may request tools");
    }
    if (t.role == Role::tool) {
      if (!t.tool_call_id) {
        problems.push_back(where + ": tool turn without tool_call_id");
      } else if (!requested.contains(*t.tool_call_id)) {
        problems.push_back(where + ": tool turn answers unknown request " + *t.tool_call_id);
      } else if (!answered.insert(*t.tool_call_id).second) {
        problems.push_back(where + ": request answered twice " + *t.tool_call_id);
      }
    } else if (t.tool_call_id) {
      problems.push_back(where + ": tool_call_id on a non-tool turn");
    }
  }
  return problems;
}

}  // namespace agentlab
