#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agentlab/runners/factory.hpp"
#include "agentlab/runners/stats.hpp"

namespace agentlab::runners {

struct TrialRow {
  int index = 0;
  std::uint64_t seed = 0;
  std::map<std::string, double> metrics;
  EpisodeLog log;
  std::optional<std::string> error;
};

struct TrialsResult {
  std::vector<TrialRow> rows;
  std::vector<std::string> keys;          // union of metric names, sorted
  std::map<std::string, MeanStd> summary;  // over trials that succeeded
};

// Trial i runs with seed base_seed + i. A failing trial is recorded with its
// error and left out of the summary.
TrialsResult run_trials(const RunInputs& inputs, std::uint64_t base_seed, int trials, bool concurrent = false);

// trial,seed,<metrics...> rows, then a "mean" and a "stddev" row.
void write_trials_csv(std::ostream& os, const TrialsResult& result);

struct TransferDifference {
  std::string name;
  double carry = 0.0;
  double fresh = 0.0;
  double difference = 0.0;  // carry - fresh
};

struct TransferResult {
  std::vector<TransferDifference> pairs;      // bias scores per pair_id
  std::vector<TransferDifference> subscales;  // normalized subscale means
  std::optional<TTestResult> t_test;          // over the per-subscale differences
  std::string t_test_note;                    // why t_test is missing
  EpisodeLog source_log;
  EpisodeLog carry_log;
  EpisodeLog fresh_log;
  std::map<AgentId, std::vector<MemoryEntry>> source_archives;
};

// Differences between two arms' questionnaire metrics (as produced by
// collect_metrics), labelled carry and fresh.
TransferResult compare_arms(const std::map<std::string, double>& carry, const std::map<std::string, double>& fresh);

// Phase 1 runs the source environment. Phase 2 administers the instrument
// twice with one shared seed: once with a copy of each agent's phase-1
// memory (a fresh store when carry_memory is false) and once with a fresh
// store.
TransferResult run_memory_transfer(const RunInputs& source, const EnvSpec& instrument, bool carry_memory,
                                   std::uint64_t seed);

// kind,name,carry,fresh,difference
void write_transfer_csv(std::ostream& os, const TransferResult& result);

struct MultiWorldResult {
  EpisodeLog log;
  std::vector<std::string> visits;  // world tag of each visit, in order
  // Archive length of every LLM agent after each visit.
  std::map<AgentId, std::vector<std::size_t>> archive_sizes;
  std::vector<std::map<std::string, double>> metrics;  // per world
  std::vector<std::string> world_tags;
};

// Per cycle, each world advances steps_per_visit steps in schedule order.
// Worlds are reset once, on their first visit; finished worlds are skipped.
MultiWorldResult run_multiworld(const std::vector<EnvSpec>& worlds, const std::vector<AgentGroup>& groups,
                                const BackendSpec& backend, int cycles, std::size_t steps_per_visit,
                                std::uint64_t seed, bool parallel_agents = false);

struct AblationRow {
  int setting = 1;
  std::map<std::string, double> ratio;                 // mean buy/sell ratio per symbol
  std::map<std::string, std::optional<double>> delta;  // against the previous row
  std::string sample_prompt;                           // first prompt of the first trial
  TrialsResult trials;
};

struct AblationResult {
  std::vector<std::string> symbols;
  std::vector<AblationRow> rows;
};

// Level 1 is the base market; 2 adds the headline as a persona directive; 3
// adds the summary as a memory note before day 1; 4 enables the news tool.
RunInputs ablation_inputs(const RunInputs& base, const AblationSpec& spec, int level);

AblationResult run_tariff_ablation(const RunInputs& base, const AblationSpec& spec, std::uint64_t base_seed,
                                   int trials);

// setting,<symbols...>,delta_<symbol>...
void write_ablation_csv(std::ostream& os, const AblationResult& result);

}  // namespace agentlab::runners

namespace agentlab::runners {

// Metrics recomputed from an event log alone (no environment state), for
// offline re-scoring of a bundle. Undefined values are NaN.
std::map<std::string, double> score_events(const std::vector<EventRecord>& records, const EnvSpec& spec);

}  // namespace agentlab::runners
