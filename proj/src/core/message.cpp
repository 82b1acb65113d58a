#include "agentlab/core/message.hpp"

#include "agentlab/core/errors.hpp"

namespace agentlab {

using nlohmann::json;

void to_json(json& j, const Message& m) {
  j = json{{"time", m.time},
           {"src_agent_id", m.src_agent_id ? json(m.src_agent_id->value) : json(nullptr)},
           {"dst_agent_id", m.dst_agent_id ? json(m.dst_agent_id->value) : json(nullptr)},
           {"payload", m.payload}};
}

void from_json(const json& j, Message& m) {
  m.time = j.at("time").get<TimeStep>();
  const auto& src = j.at("src_agent_id");
  const auto& dst = j.at("dst_agent_id");
  m.src_agent_id = src.is_null() ? std::nullopt : std::optional<AgentId>(AgentId(src.get<std::uint32_t>()));
  m.dst_agent_id = dst.is_null() ? std::nullopt : std::optional<AgentId>(AgentId(dst.get<std::uint32_t>()));
  m.payload = j.value("payload", json::object());
}

std::map<AgentId, std::vector<Message>> route_messages(std::span<const Message> outbox,
                                                        const std::set<AgentId>& population) {
  std::map<AgentId, std::vector<Message>> inboxes;
  for (AgentId id : population) inboxes[id];

  for (const Message& m : outbox) {
    if (m.dst_agent_id && !population.contains(*m.dst_agent_id)) throw UnknownRecipient(*m.dst_agent_id);
    if (m.src_agent_id && !population.contains(*m.src_agent_id)) {
      throw ContractViolation("message sender " + to_string(*m.src_agent_id) + " is not in the population");
    }
    if (m.dst_agent_id) {
      if (m.src_agent_id == m.dst_agent_id) {
        throw ContractViolation("message from agent " + to_string(*m.src_agent_id) + " addressed to itself");
      }
      inboxes[*m.dst_agent_id].push_back(m);
      continue;
    }
    for (auto& [id, inbox] : inboxes) {
      if (m.src_agent_id != id) inbox.push_back(m);
    }
  }
  return inboxes;
}

}  // namespace agentlab
