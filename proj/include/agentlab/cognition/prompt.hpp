#pragma once

#include <string>

#include "agentlab/cognition/memory.hpp"
#include "agentlab/cognition/persona.hpp"
#include "agentlab/core/observation.hpp"

namespace agentlab {

// Section order is fixed: system, memory, observation, schema hint.
struct PromptBundle {
  std::string system_text;
  std::string memory_text;
  std::string observation_text;
  std::string schema_hint;

  // Memory, observation and schema hint under headings; empty sections omitted.
  std::string user_text() const;
  // system_text followed by user_text().
  std::string full_text() const;
};

std::string render_message(const Message& message);

PromptBundle compose_prompt(const Observation& obs, const PersonaConfig& cfg, const MemoryStore& mem);

}  // namespace agentlab
