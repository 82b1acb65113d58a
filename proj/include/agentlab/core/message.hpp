#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include <json.hpp>

#include "agentlab/core/ids.hpp"

namespace agentlab {

// Environment-mediated communication unit. No src means the environment sent
// it; no dst means broadcast.
struct Message {
  TimeStep time = 0;
  std::optional<AgentId> src_agent_id;
  std::optional<AgentId> dst_agent_id;
  nlohmann::json payload = nlohmann::json::object();

  friend bool operator==(const Message&, const Message&) = default;
};

void to_json(nlohmann::json& j, const Message& m);
void from_json(const nlohmann::json& j, Message& m);

// Unicast goes to exactly dst; broadcast goes to everyone in the population
// except the sender. Every population member gets an entry, possibly empty,
// and each inbox keeps outbox order.
//
// Throws UnknownRecipient when dst is outside the population, and
// ContractViolation when src is outside it or src == dst.
std::map<AgentId, std::vector<Message>> route_messages(std::span<const Message> outbox,
                                                        const std::set<AgentId>& population);

}  // namespace agentlab
