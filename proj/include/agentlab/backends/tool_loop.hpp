#pragma once

#include <span>
#include <string>
#include <vector>

#include "agentlab/backends/backend.hpp"
#include "agentlab/cognition/prompt.hpp"

namespace agentlab {

struct ToolTraceEntry {
  ToolCallRequest request;
  std::string result_text;
  bool ok = true;
};

struct ToolLoopOptions {
  std::string model_id;
  double temperature = 0.0;
  int max_rounds = 5;
  int max_retries = 0;
};

struct ToolLoopResult {
  std::string final_text;
  std::vector<ToolTraceEntry> trace;
  std::vector<ChatTurn> transcript;
  std::size_t completions = 0;
};

// Initial turns for a prompt: a system turn when the persona renders to
// something, then one user turn.
std::vector<ChatTurn> initial_turns(const PromptBundle& bundle);

// Each round asks the backend with tools enabled. A reply without tool calls
// ends the loop. Otherwise every requested tool runs and its output (or an
// "error: ..." text) is appended as a tool turn. After max_rounds tool rounds
// one last completion without tools produces the answer.
ToolLoopResult run_tool_loop(CompletionBackend& backend, const PromptBundle& bundle, std::span<const ToolSpec> tools,
                             const ToolLoopOptions& options = {});

}  // namespace agentlab
