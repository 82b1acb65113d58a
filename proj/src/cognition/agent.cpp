#include "agentlab/cognition/agent.hpp"

namespace agentlab {

ActionEnvelope agent_step(const Observation& obs, const PersonaConfig& cfg, MemoryStore& mem,
                          CompletionBackend& backend, CompletionBackend& parser, const AgentStepOptions& options,
                          std::string_view world_tag, AgentStepTrace* trace) {
  if (!obs.response_schema) {
    throw ContractViolation("agent_step called for agent " + to_string(obs.agent_id) +
                            " on an observation without a response schema");
  }
  const std::string world(world_tag);
  PromptBundle bundle = compose_prompt(obs, cfg, mem);
  mem.record({obs.time, world, MemoryRole::observation, obs.context_text});

  ToolLoopOptions loop_options{options.model_id, options.temperature, options.max_tool_rounds,
                                 options.max_request_retries};
  ToolLoopResult loop = run_tool_loop(backend, bundle, obs.tools, loop_options);
  for (const auto& entry : loop.trace) {
    mem.record({obs.time, world, MemoryRole::tool_result,
                entry.request.name + "(" + entry.request.arguments_text + ") -> " + entry.result_text});
  }

  ParseOptions parse_options{options.parser_model.empty() ? options.model_id : options.parser_model,
                             options.temperature, options.max_parse_retries};
  ParseResult parsed = parse_structured(loop.final_text, *obs.response_schema, parser, parse_options);
  mem.record({obs.time, world, MemoryRole::own_action, parsed.payload.dump()});

  if (trace != nullptr) {
    trace->prompt = std::move(bundle);
    trace->raw_text = loop.final_text;
    trace->tool_trace = std::move(loop.trace);
    trace->completions = loop.completions;
    trace->parser_calls = parsed.parser_calls;
  }
  return ActionEnvelope{obs.agent_id, obs.time, std::move(parsed.payload), {}};
}

LlmAgent::LlmAgent(AgentId id, PersonaConfig config, std::unique_ptr<MemoryStore> memory, CompletionBackend& backend,
                   AgentStepOptions options, CompletionBackend* parser)
    : id_(id),
      config_(std::move(config)),
      memory_(memory ? std::move(memory) : std::make_unique<NullMemory>()),
      backend_(backend),
      parser_(parser ? *parser : backend),
      options_(std::move(options)) {}

ActionEnvelope LlmAgent::act(const Observation& obs) {
  last_trace_ = AgentStepTrace{};
  return agent_step(obs, config_, *memory_, backend_, parser_, options_, world_, &last_trace_);
}

}  // namespace agentlab
