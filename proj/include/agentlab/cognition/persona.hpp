#pragma once

#include <string>
#include <vector>

namespace agentlab {

// Static conditioning for one agent: identity text, a role tag such as an
// investment style, and extra directives appended in insertion order.
struct PersonaConfig {
  std::string persona_text;
  std::string role_tag;
  std::vector<std::string> extra_directives;

  // persona_text, then "Role: <tag>", then each directive; empty parts skipped.
  std::string render() const;
};

}  // namespace agentlab
