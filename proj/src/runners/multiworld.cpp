#include "agentlab/runners/runners.hpp"

namespace agentlab::runners {

MultiWorldResult run_multiworld(const std::vector<EnvSpec>& worlds, const std::vector<AgentGroup>& groups,
                                const BackendSpec& backend_spec, int cycles, std::size_t steps_per_visit,
                                std::uint64_t seed, bool parallel_agents) {
  if (worlds.size() < 2) throw ContractViolation("a multi-world schedule needs at least two environments");
  for (const auto& g : groups) {
    if (g.policy != "llm") throw ContractViolation("multi-world runs need llm agents");
  }
  std::size_t population = 0;
  for (const auto& g : groups) population += g.count;

  auto backend = make_backend(backend_spec, passive_action(worlds.front().kind).dump());
  std::vector<std::unique_ptr<Environment>> envs;
  for (const auto& w : worlds) envs.push_back(make_environment(w, population));
  Roster roster = make_roster(groups, nullptr, *backend, envs.front()->name());
  for (auto& [id, agent] : roster.view) agent->seed(agent_stream(seed, id));

  MultiWorldResult result;
  result.log.seed = seed;
  std::vector<EpisodeDriver> drivers;
  for (auto& env : envs) {
    EpisodeOptions options;
    options.parallel_agents = parallel_agents;
    options.world_tag = std::string(env->name());
    result.world_tags.push_back(options.world_tag);
    drivers.emplace_back(*env, roster.view, options);
  }

  for (int c = 0; c < cycles; ++c) {
    for (std::size_t w = 0; w < drivers.size(); ++w) {
      auto& driver = drivers[w];
      if (!driver.started()) driver.start(RngStream(seed).child("world", w).origin(), result.log);
      if (!driver.finished()) driver.advance(steps_per_visit, result.log);
      result.visits.push_back(result.world_tags[w]);
      for (const auto& [id, agent] : roster.llm) result.archive_sizes[id].push_back(agent->memory().archive().size());
    }
  }
  for (std::size_t w = 0; w < envs.size(); ++w) {
    result.metrics.push_back(collect_metrics(*envs[w], worlds[w].kind, result.log));
  }
  return result;
}

}  // namespace agentlab::runners
