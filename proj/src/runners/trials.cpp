#include <future>
#include <ostream>
#include <set>

#include "agentlab/runners/runners.hpp"

namespace agentlab::runners {

namespace {

TrialRow run_one(const RunInputs& inputs, int index, std::uint64_t seed) {
  TrialRow row;
  row.index = index;
  row.seed = seed;
  try {
    auto run = run_single(inputs, seed);
    row.metrics = std::move(run->metrics);
    row.log = std::move(run->log);
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

}  // namespace

TrialsResult run_trials(const RunInputs& inputs, std::uint64_t base_seed, int trials, bool concurrent) {
  if (trials < 1) throw ContractViolation("run_trials needs at least one trial");
  TrialsResult result;
  if (concurrent) {
    std::vector<std::future<TrialRow>> pending;
    for (int i = 0; i < trials; ++i) {
      pending.push_back(std::async(std::launch::async, run_one, std::cref(inputs), i, base_seed + i));
    }
    for (auto& f : pending) result.rows.push_back(f.get());
  } else {
    for (int i = 0; i < trials; ++i) result.rows.push_back(run_one(inputs, i, base_seed + i));
  }

  std::set<std::string> keys;
  for (const auto& row : result.rows) {
    for (const auto& [k, v] : row.metrics) keys.insert(k);
  }
  result.keys.assign(keys.begin(), keys.end());
  for (const auto& k : result.keys) {
    std::vector<double> values;
    for (const auto& row : result.rows) {
      if (row.error) continue;
      auto it = row.metrics.find(k);
      if (it != row.metrics.end()) values.push_back(it->second);
    }
    if (!values.empty()) result.summary[k] = mean_stddev(values);
  }
  return result;
}

void write_trials_csv(std::ostream& os, const TrialsResult& result) {
  const auto old = os.precision(17);
  os << "trial,seed";
  for (const auto& k : result.keys) os << ',' << k;
  os << ",error\n";
  for (const auto& row : result.rows) {
    os << row.index << ',' << row.seed;
    for (const auto& k : result.keys) {
      os << ',';
      if (auto it = row.metrics.find(k); it != row.metrics.end()) os << it->second;
    }
    os << ',';
    if (row.error) {
      std::string text = *row.error;
      for (char& c : text) {
        if (c == ',' || c == '\n' || c == '"') c = ' ';
      }
      os << text;
    }
    os << '\n';
  }
  for (const char* label : {"mean", "stddev"}) {
    os << label << ',';
    for (const auto& k : result.keys) {
      os << ',';
      if (auto it = result.summary.find(k); it != result.summary.end()) {
        os << (label[0] == 'm' ? it->second.mean : it->second.stddev);
      }
    }
    os << ",\n";
  }
  os.precision(old);
}

}  // namespace agentlab::runners
