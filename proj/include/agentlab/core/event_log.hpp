#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "agentlab/core/ids.hpp"

namespace agentlab {

// One line of the simulation log. Serialized field names are fixed:
// user_id, current_time, action, info.
struct EventRecord {
  AgentId user_id;
  TimeStep current_time = 0;
  std::string action;
  nlohmann::json info = nlohmann::json::object();

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

nlohmann::json to_json(const EventRecord& record);
EventRecord event_from_json(const nlohmann::json& j);

struct EpisodeLog {
  std::vector<EventRecord> records;
  std::map<AgentId, double> total_rewards;
  std::uint64_t seed = 0;
  std::size_t steps_executed = 0;

  void append(EventRecord record) { records.push_back(std::move(record)); }
};

// Summary record written after the event lines.
nlohmann::json summary_json(const EpisodeLog& log);

// Newline-delimited JSON: one line per record, then the summary line.
void write_jsonl(std::ostream& os, const EpisodeLog& log);
std::string to_jsonl(const EpisodeLog& log);

// Reads the event lines of a log file, skipping summary lines.
std::vector<EventRecord> read_events_jsonl(std::istream& is);
std::vector<EventRecord> read_events_jsonl_file(const std::string& path);

// Records whose action equals `action`, in log order.
std::vector<EventRecord> filter_action(const std::vector<EventRecord>& records, std::string_view action);

}  // namespace agentlab
