#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>

#include <json.hpp>

namespace agentlab {

// Identifies one agent for a whole run, including every world it visits.
struct AgentId {
  std::uint32_t value = 0;

  constexpr AgentId() = default;
  constexpr explicit AgentId(std::uint32_t v) : value(v) {}

  friend constexpr auto operator<=>(AgentId, AgentId) = default;
};

inline std::string to_string(AgentId id) { return std::to_string(id.value); }
inline std::ostream& operator<<(std::ostream& os, AgentId id) { return os << id.value; }

inline void to_json(nlohmann::json& j, AgentId id) { j = id.value; }
inline void from_json(const nlohmann::json& j, AgentId& id) { id.value = j.get<std::uint32_t>(); }

// Environment clock. Each environment owns its own counter.
using TimeStep = std::int64_t;

}  // namespace agentlab

template <>
struct std::hash<agentlab::AgentId> {
  std::size_t operator()(agentlab::AgentId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
