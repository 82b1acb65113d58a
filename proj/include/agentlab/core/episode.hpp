#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>

#include "agentlab/core/environment.hpp"
#include "agentlab/core/event_log.hpp"

namespace agentlab {

// Non-owning view of the agents taking part in a run.
using AgentRoster = std::map<AgentId, AgentPolicy*>;

struct EpisodeOptions {
  // Invoke agent policies of one step on separate threads.
  bool parallel_agents = false;
  // When non-empty, every record gets info["world"] = world_tag.
  std::string world_tag;
};

// Drives one environment through observe -> act -> step. Kept separate from
// run_episode so multi-world schedules can interleave several drivers without
// resetting environments between visits.
class EpisodeDriver {
 public:
  EpisodeDriver(Environment& env, AgentRoster agents, EpisodeOptions options = {});

  // Resets the environment with a seed derived from `seed`.
  void start(std::uint64_t seed, EpisodeLog& log);
  // Runs up to `steps` environment steps; returns how many ran.
  std::size_t advance(std::size_t steps, EpisodeLog& log);

  bool started() const { return started_; }
  bool finished() const;
  Environment& environment() { return env_; }
  const ObservationMap& pending_observations() const { return observations_; }

 private:
  ActionMap collect_actions();
  void absorb(ObservationMap observations, EpisodeLog& log);
  void drain(EpisodeLog& log);

  Environment& env_;
  AgentRoster agents_;
  EpisodeOptions options_;
  ObservationMap observations_;
  bool started_ = false;
};

// Seed used for the environment's reset, derived from the run seed.
std::uint64_t environment_seed(std::uint64_t run_seed);
// Stream handed to an agent's seed() for a given run seed.
RngStream agent_stream(std::uint64_t run_seed, AgentId id);

EpisodeLog run_episode(Environment& env, const AgentRoster& agents, std::size_t max_steps, std::uint64_t seed,
                       const EpisodeOptions& options = {});

}  // namespace agentlab
