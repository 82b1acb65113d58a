#include "agentlab/backends/tool_loop.hpp"

namespace agentlab {

using nlohmann::json;

std::vector<ChatTurn> initial_turns(const PromptBundle& bundle) {
  std::vector<ChatTurn> turns;
  if (!bundle.system_text.empty()) turns.push_back({Role::system, bundle.system_text, {}, std::nullopt});
  turns.push_back({Role::user, bundle.user_text(), {}, std::nullopt});
  return turns;
}

namespace {

// Runs one requested tool. Failures become error text for the model.
ToolTraceEntry execute(const ToolCallRequest& call, std::span<const ToolSpec> tools) {
  const ToolSpec* tool = nullptr;
  for (const auto& t : tools) {
    if (t.name == call.name) {
      tool = &t;
      break;
    }
  }
  if (tool == nullptr) return {call, "error: unknown tool " + call.name, false};

  json args = json::object();
  if (!call.arguments_text.empty()) {
    args = json::parse(call.arguments_text, nullptr, false);
    if (args.is_discarded()) return {call, "error: tool arguments are not valid JSON", false};
  }
  if (auto violations = validate(args, tool->parameters); !violations.empty()) {
    return {call, "error: invalid arguments: " + format_violations(violations), false};
  }
  if (!tool->handler) return {call, "error: tool " + call.name + " has no handler", false};
  try {
    return {call, tool->handler(args), true};
  } catch (const std::exception& e) {
    return {call, std::string("error: ") + e.what(), false};
  }
}

}  // namespace

ToolLoopResult run_tool_loop(CompletionBackend& backend, const PromptBundle& bundle, std::span<const ToolSpec> tools,
                             const ToolLoopOptions& options) {
  ToolLoopResult out;
  out.transcript = initial_turns(bundle);

  CompletionRequest request;
  request.model_id = options.model_id;
  request.temperature = options.temperature;
  request.max_retries = options.max_retries;
  request.tools.assign(tools.begin(), tools.end());

  for (int round = 0; round < options.max_rounds; ++round) {
    request.turns = out.transcript;
    CompletionResult reply = backend.complete(request);
    ++out.completions;
    out.transcript.push_back({Role::assistant, reply.content, reply.tool_calls, std::nullopt});
    if (!reply.has_tool_calls()) {
      out.final_text = std::move(reply.content);
      return out;
    }
    for (const auto& call : reply.tool_calls) {
      ToolTraceEntry entry = execute(call, tools);
      out.transcript.push_back({Role::tool, entry.result_text, {}, call.id});
      out.trace.push_back(std::move(entry));
    }
  }

  request.turns = out.transcript;
  request.tools.clear();
  CompletionResult final_reply = backend.complete(request);
  ++out.completions;
  out.transcript.push_back({Role::assistant, final_reply.content, {}, std::nullopt});
  out.final_text = std::move(final_reply.content);
  return out;
}

}  // namespace agentlab
