#include <ostream>

#include "agentlab/runners/runners.hpp"

namespace agentlab::runners {

namespace {

void collect(const std::map<std::string, double>& carry, const std::map<std::string, double>& fresh,
             std::string_view prefix, std::vector<TransferDifference>& out) {
  for (const auto& [key, c] : carry) {
    if (!key.starts_with(prefix)) continue;
    auto it = fresh.find(key);
    if (it == fresh.end()) continue;
    out.push_back({key.substr(prefix.size()), c, it->second, c - it->second});
  }
}

std::map<std::string, double> administer(const EnvSpec& instrument, const Roster& roster, std::uint64_t seed,
                                         EpisodeLog& log) {
  auto env = make_environment(instrument, roster.view.size());
  log = run_episode(*env, roster.view, instrument.max_steps, seed);
  return collect_metrics(*env, EnvKind::questionnaire, log);
}

}  // namespace

TransferResult compare_arms(const std::map<std::string, double>& carry, const std::map<std::string, double>& fresh) {
  TransferResult r;
  collect(carry, fresh, "bias.", r.pairs);
  collect(carry, fresh, "subscale.", r.subscales);
  std::vector<double> diffs;
  for (const auto& d : r.subscales) diffs.push_back(d.difference);
  try {
    r.t_test = paired_t_test(diffs);
  } catch (const Error& e) {
    r.t_test_note = e.what();
  }
  return r;
}

TransferResult run_memory_transfer(const RunInputs& source, const EnvSpec& instrument, bool carry_memory,
                                   std::uint64_t seed) {
  if (instrument.kind != EnvKind::questionnaire) throw ContractViolation("the transfer instrument must be a questionnaire");
  for (const auto& g : source.agents) {
    if (g.policy != "llm") throw ContractViolation("memory transfer needs llm agents");
  }

  auto phase1 = run_single(source, seed);
  std::map<AgentId, std::unique_ptr<MemoryStore>> snapshots;
  std::map<AgentId, std::vector<MemoryEntry>> archives;
  for (auto& [id, agent] : phase1->roster.llm) {
    snapshots[id] = agent->memory().clone();
    archives[id] = agent->memory().archive();
  }

  // Both arms share this seed, so item order is the same.
  const std::uint64_t phase2_seed = RngStream(seed).child("instrument").origin();
  auto arm = [&](bool carry, EpisodeLog& log) {
    for (auto& [id, agent] : phase1->roster.llm) {
      agent->replace_memory(carry ? snapshots.at(id)->clone() : snapshots.at(id)->clone_empty());
    }
    return administer(instrument, phase1->roster, phase2_seed, log);
  };
  EpisodeLog carry_log;
  EpisodeLog fresh_log;
  const auto carry = arm(carry_memory, carry_log);
  const auto fresh = arm(false, fresh_log);

  TransferResult result = compare_arms(carry, fresh);
  result.source_log = std::move(phase1->log);
  result.carry_log = std::move(carry_log);
  result.fresh_log = std::move(fresh_log);
  result.source_archives = std::move(archives);
  return result;
}

void write_transfer_csv(std::ostream& os, const TransferResult& result) {
  const auto old = os.precision(17);
  os << "kind,name,carry,fresh,difference\n";
  for (const auto& d : result.pairs) {
    os << "pair," << d.name << ',' << d.carry << ',' << d.fresh << ',' << d.difference << '\n';
  }
  for (const auto& d : result.subscales) {
    os << "subscale," << d.name << ',' << d.carry << ',' << d.fresh << ',' << d.difference << '\n';
  }
  os.precision(old);
}

}  // namespace agentlab::runners
