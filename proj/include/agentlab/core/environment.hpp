#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "agentlab/core/event_log.hpp"
#include "agentlab/core/observation.hpp"
#include "agentlab/core/rng.hpp"

namespace agentlab {

// Holds the global state and its transition function. step() is the only
// mutator of that state. done() is monotone until the next reset().
class Environment {
 public:
  virtual ~Environment() = default;

  // World tag used in memory entries and multi-world logs.
  virtual std::string_view name() const = 0;

  virtual ObservationMap reset(std::uint64_t seed) = 0;
  virtual ObservationMap step(const ActionMap& actions) = 0;
  virtual bool done() const = 0;
  virtual TimeStep time() const = 0;

  // Records emitted since the previous drain, in emission order.
  std::vector<EventRecord> drain_events();

 protected:
  void emit(AgentId user, std::string action, nlohmann::json info = nlohmann::json::object());
  void clear_events() { pending_.clear(); }

 private:
  std::vector<EventRecord> pending_;
};

// The agent-side policy. The runner calls act() only for observations that
// carry a response schema.
class AgentPolicy {
 public:
  virtual ~AgentPolicy() = default;

  virtual ActionEnvelope act(const Observation& obs) = 0;

  virtual void enter_world(std::string_view /*world_tag*/) {}
  virtual void seed(const RngStream& /*stream*/) {}
};

}  // namespace agentlab
