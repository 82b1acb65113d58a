#include "agentlab/cognition/persona.hpp"

namespace agentlab {

std::string PersonaConfig::render() const {
  std::string out;
  auto line = [&out](const std::string& s) {
    if (s.empty()) return;
    if (!out.empty()) out += '\n';
    out += s;
  };
  line(persona_text);
  if (!role_tag.empty()) line("Role: " + role_tag);
  for (const auto& d : extra_directives) line(d);
  return out;
}

}  // namespace agentlab
