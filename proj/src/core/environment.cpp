#include "agentlab/core/environment.hpp"

namespace agentlab {

std::vector<EventRecord> Environment::drain_events() {
  std::vector<EventRecord> out;
  out.swap(pending_);
  return out;
}

void Environment::emit(AgentId user, std::string action, nlohmann::json info) {
  pending_.push_back(EventRecord{user, time(), std::move(action), std::move(info)});
}

}  // namespace agentlab
