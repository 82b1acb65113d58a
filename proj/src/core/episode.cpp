#include "agentlab/core/episode.hpp"

#include <future>
#include <set>

#include "agentlab/core/errors.hpp"

namespace agentlab {

std::uint64_t environment_seed(std::uint64_t run_seed) { return RngStream(run_seed).child("env").origin(); }

RngStream agent_stream(std::uint64_t run_seed, AgentId id) {
  return RngStream(run_seed).child("agent", id.value);
}

EpisodeDriver::EpisodeDriver(Environment& env, AgentRoster agents, EpisodeOptions options)
    : env_(env), agents_(std::move(agents)), options_(std::move(options)) {}

bool EpisodeDriver::finished() const { return started_ && env_.done(); }

void EpisodeDriver::start(std::uint64_t seed, EpisodeLog& log) {
  for (const auto& [id, agent] : agents_) log.total_rewards.try_emplace(id, 0.0);
  observations_.clear();
  auto first = env_.reset(environment_seed(seed));
  started_ = true;
  drain(log);
  absorb(std::move(first), log);
}

void EpisodeDriver::drain(EpisodeLog& log) {
  for (auto& record : env_.drain_events()) {
    if (!options_.world_tag.empty()) record.info["world"] = options_.world_tag;
    log.append(std::move(record));
  }
}

void EpisodeDriver::absorb(ObservationMap observations, EpisodeLog& log) {
  for (const auto& [id, obs] : observations) {
    if (!agents_.contains(id)) throw AgentMissing(id);
    if (obs.agent_id != id) {
      throw ContractViolation("observation keyed by agent " + to_string(id) + " names agent " + to_string(obs.agent_id));
    }
    std::set<std::string> names;
    for (const auto& tool : obs.tools) {
      if (!names.insert(tool.name).second) {
        throw ContractViolation("duplicate tool name '" + tool.name + "' in observation for agent " + to_string(id));
      }
    }
    if (obs.reward) log.total_rewards[id] += *obs.reward;
  }
  observations_ = std::move(observations);
}

ActionMap EpisodeDriver::collect_actions() {
  std::vector<const Observation*> pending;
  for (const auto& [id, obs] : observations_) {
    if (obs.expects_action()) pending.push_back(&obs);
  }

  for (const auto* obs : pending) agents_.at(obs->agent_id)->enter_world(env_.name());

  std::vector<ActionEnvelope> envelopes;
  envelopes.reserve(pending.size());
  if (options_.parallel_agents && pending.size() > 1) {
    std::vector<std::future<ActionEnvelope>> futures;
    futures.reserve(pending.size());
    for (const auto* obs : pending) {
      AgentPolicy* agent = agents_.at(obs->agent_id);
      futures.push_back(std::async(std::launch::async, [agent, obs] { return agent->act(*obs); }));
    }
    // Collected in ascending AgentId so the first failure reported is deterministic.
    for (auto& f : futures) envelopes.push_back(f.get());
  } else {
    for (const auto* obs : pending) envelopes.push_back(agents_.at(obs->agent_id)->act(*obs));
  }

  ActionMap actions;
  for (std::size_t i = 0; i < pending.size(); ++i) {
    const Observation& obs = *pending[i];
    ActionEnvelope& env = envelopes[i];
    if (env.agent_id != obs.agent_id) {
      throw ContractViolation("agent " + to_string(obs.agent_id) + " returned an envelope for agent " +
                              to_string(env.agent_id));
    }
    auto violations = validate_action(env.body, *obs.response_schema);
    if (!violations.empty()) {
      throw SchemaViolation("action of agent " + to_string(obs.agent_id), std::move(violations));
    }
    for (const auto& m : env.outgoing_messages) {
      if (m.src_agent_id != obs.agent_id) {
        throw ContractViolation("outgoing message of agent " + to_string(obs.agent_id) + " has another sender");
      }
    }
    actions.emplace(obs.agent_id, std::move(env));
  }
  return actions;
}

std::size_t EpisodeDriver::advance(std::size_t steps, EpisodeLog& log) {
  if (!started_) throw ContractViolation("EpisodeDriver::advance before start");
  std::size_t executed = 0;
  while (executed < steps && !env_.done()) {
    ActionMap actions = collect_actions();
    auto next = env_.step(actions);
    ++executed;
    ++log.steps_executed;
    drain(log);
    absorb(std::move(next), log);
  }
  return executed;
}

EpisodeLog run_episode(Environment& env, const AgentRoster& agents, std::size_t max_steps, std::uint64_t seed,
                       const EpisodeOptions& options) {
  EpisodeLog log;
  log.seed = seed;
  for (const auto& [id, agent] : agents) agent->seed(agent_stream(seed, id));
  EpisodeDriver driver(env, agents, options);
  driver.start(seed, log);
  driver.advance(max_steps, log);
  return log;
}

}  // namespace agentlab
