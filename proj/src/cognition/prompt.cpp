#include "agentlab/cognition/prompt.hpp"

#include <sstream>

namespace agentlab {

std::string render_message(const Message& m) {
  std::ostringstream os;
  os << "[t=" << m.time << "] ";
  if (m.src_agent_id) {
    os << "from agent " << *m.src_agent_id;
  } else {
    os << "from environment";
  }
  os << (m.dst_agent_id ? " (direct)" : " (broadcast)") << ": ";
  if (m.payload.is_object() && m.payload.contains("text") && m.payload["text"].is_string()) {
    os << m.payload["text"].get<std::string>();
  } else {
    os << m.payload.dump();
  }
  return os.str();
}

std::string PromptBundle::user_text() const {
  std::string out;
  auto section = [&out](std::string_view heading, const std::string& body) {
    if (body.empty()) return;
    if (!out.empty()) out += "\n\n";
    out += "## ";
    out += heading;
    out += '\n';
    out += body;
  };
  section("Memory", memory_text);
  section("Observation", observation_text);
  section("Response format", schema_hint);
  return out;
}

std::string PromptBundle::full_text() const {
  if (system_text.empty()) return user_text();
  const std::string user = user_text();
  return user.empty() ? system_text : system_text + "\n\n" + user;
}

PromptBundle compose_prompt(const Observation& obs, const PersonaConfig& cfg, const MemoryStore& mem) {
  PromptBundle bundle;
  bundle.system_text = cfg.render();
  bundle.memory_text = mem.render();

  std::string observation = obs.context_text;
  auto line = [&observation](const std::string& s) {
    if (!observation.empty()) observation += '\n';
    observation += s;
  };
  if (!obs.inbox.empty()) {
    line("Messages:");
    for (const auto& m : obs.inbox) line("- " + render_message(m));
  }
  if (!obs.tools.empty()) {
    line("Available tools:");
    for (const auto& t : obs.tools) line("- " + t.name + ": " + t.description);
  }
  bundle.observation_text = std::move(observation);

  if (obs.response_schema) {
    bundle.schema_hint = "Reply with a JSON object of the form " + describe(*obs.response_schema);
  }
  return bundle;
}

}  // namespace agentlab
