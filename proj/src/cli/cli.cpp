#include "agentlab/cli/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "agentlab/core/hash.hpp"
#include "agentlab/runners/runners.hpp"

namespace agentlab::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace agentlab::runners;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::string out;
  std::string backend;
  std::string events;
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
}

std::string format_metrics(const std::map<std::string, double>& metrics) {
  std::ostringstream os;
  os << std::setprecision(10);
  for (const auto& [k, v] : metrics) os << "  " << k << " = " << v << '\n';
  return os.str();
}

// Output files of one runner, written into the bundle directory in order.
struct Bundle {
  std::string events;
  std::string metrics;
  std::string summary;
};

void write_bundle(const fs::path& dir, const Bundle& bundle, const ExperimentConfig& config, std::string_view runner,
                  const std::string& started) {
  fs::create_directories(dir);
  write_file(dir / "events.jsonl", bundle.events);
  write_file(dir / "metrics.csv", bundle.metrics);
  write_file(dir / "summary.txt", bundle.summary);

  json files = json::array();
  std::vector<fs::path> paths;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().filename() != "manifest.json") paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths) {
    const std::string content = read_file(p);
    files.push_back({{"path", fs::relative(p, dir).generic_string()},
                     {"sha256", sha256_hex(content)},
                     {"bytes", content.size()}});
  }
  json echoed = json::parse(config.source_text, nullptr, false);
  json manifest = {
      {"runner", runner},
      {"version", AGENTLAB_VERSION},
      {"config_sha256", sha256_hex(config.source_text)},
      {"config", echoed.is_discarded() ? json(nullptr) : echoed},
      {"seed", config.seed},
      {"trials", config.trials},
      {"backend", config.backend.kind},
      {"started_at", started},
      {"finished_at", utc_now()},
      {"files", files},
  };
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

std::string tagged_jsonl(const EpisodeLog& log, const std::string& key, const json& value) {
  EpisodeLog copy = log;
  for (auto& r : copy.records) r.info[key] = value;
  return to_jsonl(copy);
}

void apply_overrides(ExperimentConfig& config, const Options& o) {
  if (o.seed) config.seed = *o.seed;
  if (o.trials) {
    if (*o.trials < 1) throw ConfigError("--trials", "must be at least 1");
    config.trials = *o.trials;
  }
  if (!o.out.empty()) config.output = o.out;
  if (!o.backend.empty() && o.backend != config.backend.kind) {
    if (o.backend == "replay" || o.backend == "remote") {
      throw ConfigError("backend", "--backend " + o.backend + " needs a '" + o.backend + "' backend section in the config");
    }
    BackendSpec scripted;
    config.backend = scripted;
  }
}

Bundle do_run(const ExperimentConfig& c, std::ostream& out) {
  auto run = run_single(RunInputs::from(c), c.seed);
  Bundle b;
  b.events = to_jsonl(run->log);
  std::ostringstream csv;
  write_detail_csv(csv, *run->env, c.environment.kind);
  b.metrics = csv.str();
  std::ostringstream s;
  s << "run: " << to_string(c.environment.kind) << " with " << c.population() << " agents, seed " << c.seed << '\n'
    << "steps executed: " << run->log.steps_executed << '\n'
    << "events: " << run->log.records.size() << '\n'
    << "metrics:\n"
    << format_metrics(run->metrics);
  b.summary = s.str();
  out << b.summary;
  return b;
}

Bundle do_trials(const ExperimentConfig& c, std::ostream& out) {
  const auto result = run_trials(RunInputs::from(c), c.seed, c.trials);
  Bundle b;
  for (const auto& row : result.rows) b.events += tagged_jsonl(row.log, "trial", row.index);
  std::ostringstream csv;
  write_trials_csv(csv, result);
  b.metrics = csv.str();
  std::ostringstream s;
  s << std::setprecision(10) << "trials: " << c.trials << " of " << to_string(c.environment.kind) << ", seeds "
    << c.seed << ".." << c.seed + static_cast<std::uint64_t>(c.trials) - 1 << '\n';
  int failed = 0;
  for (const auto& row : result.rows) {
    if (row.error) {
      ++failed;
      s << "trial " << row.index << " failed: " << *row.error << '\n';
    }
  }
  s << "succeeded: " << c.trials - failed << '\n' << "mean (stddev):\n";
  for (const auto& [k, ms] : result.summary) s << "  " << k << " = " << ms.mean << " (" << ms.stddev << ")\n";
  b.summary = s.str();
  out << b.summary;
  return b;
}

Bundle do_transfer(const ExperimentConfig& c, std::ostream& out) {
  if (!c.transfer) throw ConfigError("transfer", "the transfer subcommand needs a 'transfer' section");
  const auto r = run_memory_transfer(RunInputs::from(c), c.transfer->target, c.transfer->carry_memory, c.seed);
  Bundle b;
  b.events = tagged_jsonl(r.source_log, "phase", "source") + tagged_jsonl(r.carry_log, "phase", "carry") +
             tagged_jsonl(r.fresh_log, "phase", "fresh");
  std::ostringstream csv;
  write_transfer_csv(csv, r);
  b.metrics = csv.str();
  std::ostringstream s;
  s << std::setprecision(10) << "memory transfer from " << to_string(c.environment.kind)
    << " (carry_memory=" << (c.transfer->carry_memory ? "true" : "false") << "), seed " << c.seed << '\n';
  for (const auto& d : r.subscales) s << "  subscale " << d.name << ": carry - fresh = " << d.difference << '\n';
  for (const auto& d : r.pairs) s << "  pair " << d.name << " bias: carry - fresh = " << d.difference << '\n';
  if (r.t_test) {
    s << "paired t-test: t = " << r.t_test->t << ", df = " << r.t_test->df << ", p = " << r.t_test->p << '\n';
  } else {
    s << "paired t-test not available: " << r.t_test_note << '\n';
  }
  b.summary = s.str();
  out << b.summary;
  return b;
}

Bundle do_multiworld(const ExperimentConfig& c, std::ostream& out) {
  if (!c.multiworld) throw ConfigError("multiworld", "the multiworld subcommand needs a 'multiworld' section");
  const auto& m = *c.multiworld;
  const auto r = run_multiworld(m.worlds, c.agents, c.backend, m.cycles, m.steps_per_visit, c.seed, c.parallel_agents);
  Bundle b;
  b.events = to_jsonl(r.log);
  std::ostringstream csv;
  csv << std::setprecision(17) << "world,metric,value\n";
  for (std::size_t w = 0; w < r.metrics.size(); ++w) {
    for (const auto& [k, v] : r.metrics[w]) csv << r.world_tags[w] << ',' << k << ',' << v << '\n';
  }
  b.metrics = csv.str();
  std::ostringstream s;
  s << "multi-world run: " << m.cycles << " cycles, " << m.steps_per_visit << " steps per visit, seed " << c.seed
    << "\nvisits:";
  for (const auto& v : r.visits) s << ' ' << v;
  s << "\nevents: " << r.log.records.size() << '\n';
  b.summary = s.str();
  out << b.summary;
  return b;
}

Bundle do_ablation(const ExperimentConfig& c, std::ostream& out) {
  if (!c.ablation) throw ConfigError("ablation", "the ablation subcommand needs an 'ablation' section");
  const auto r = run_tariff_ablation(RunInputs::from(c), *c.ablation, c.seed, c.trials);
  Bundle b;
  for (const auto& row : r.rows) {
    for (const auto& t : row.trials.rows) {
      b.events += tagged_jsonl(t.log, "setting", row.setting);
    }
  }
  std::ostringstream csv;
  write_ablation_csv(csv, r);
  b.metrics = csv.str();
  std::ostringstream s;
  s << "ablation over " << r.rows.size() << " settings, " << c.trials << " trials each, seed " << c.seed << '\n'
    << b.metrics;
  b.summary = s.str();
  out << b.summary;
  return b;
}

int do_score(const ExperimentConfig& c, const Options& o, std::ostream& out) {
  const std::string path = o.events.empty() ? (fs::path(c.output) / "events.jsonl").string() : o.events;
  if (!fs::exists(path)) throw std::runtime_error("no event log at " + path);
  const auto records = read_events_jsonl_file(path);
  const auto metrics = score_events(records, c.environment);
  out << std::setprecision(17) << "metric,value\n";
  for (const auto& [k, v] : metrics) out << k << ',' << v << '\n';
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Run agent-based simulation experiments.", "agentlab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(AGENTLAB_VERSION));

  Options o;
  std::string chosen;
  auto add = [&](const std::string& name, const std::string& description) {
    CLI::App* sub = app.add_subcommand(name, description);
    sub->add_option("--config", o.config, "Experiment config (JSON)")->required();
    sub->add_option("--seed", o.seed, "Override the base seed");
    sub->add_option("--trials", o.trials, "Override the number of trials");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--backend", o.backend, "Completion backend")->check(CLI::IsMember({"scripted", "replay", "remote"}));
    sub->callback([&chosen, name] { chosen = name; });
    return sub;
  };
  add("run", "Run one episode");
  add("trials", "Run repeated trials with consecutive seeds");
  add("transfer", "Memory transfer into a questionnaire");
  add("multiworld", "Cycle one roster through several environments");
  add("ablation", "Tariff-news ablation over cumulative settings");
  add("score", "Re-score an event log offline")->add_option("--events", o.events, "Event log (default: <out>/events.jsonl)");

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForVersion&) {
    out << AGENTLAB_VERSION << '\n';
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kConfigError;
  }

  ExperimentConfig config;
  try {
    config = load_config(o.config);
    apply_overrides(config, o);
  } catch (const ConfigError& e) {
    err << "config error in " << o.config << ": " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (chosen == "score") return do_score(config, o, out);
    const std::string started = utc_now();
    Bundle bundle;
    if (chosen == "run") {
      bundle = do_run(config, out);
    } else if (chosen == "trials") {
      bundle = do_trials(config, out);
    } else if (chosen == "transfer") {
      bundle = do_transfer(config, out);
    } else if (chosen == "multiworld") {
      bundle = do_multiworld(config, out);
    } else {
      bundle = do_ablation(config, out);
    }
    write_bundle(config.output, bundle, config, chosen, started);
    out << "bundle written to " << config.output << '\n';
  } catch (const ConfigError& e) {
    err << "config error in " << o.config << ": " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kSuccess;
}

}  // namespace agentlab::cli
