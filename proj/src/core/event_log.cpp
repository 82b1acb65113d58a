#include "agentlab/core/event_log.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace agentlab {

using nlohmann::json;

json to_json(const EventRecord& r) {
  return json{{"user_id", r.user_id.value}, {"current_time", r.current_time}, {"action", r.action}, {"info", r.info}};
}

EventRecord event_from_json(const json& j) {
  EventRecord r;
  r.user_id = AgentId(j.at("user_id").get<std::uint32_t>());
  r.current_time = j.at("current_time").get<TimeStep>();
  r.action = j.at("action").get<std::string>();
  r.info = j.at("info");
  return r;
}

json summary_json(const EpisodeLog& log) {
  json rewards = json::object();
  for (const auto& [id, total] : log.total_rewards) rewards[to_string(id)] = total;
  return json{{"summary", json{{"seed", log.seed}, {"steps_executed", log.steps_executed}, {"total_rewards", rewards}}}};
}

void write_jsonl(std::ostream& os, const EpisodeLog& log) {
  for (const auto& r : log.records) os << to_json(r).dump() << '\n';
  os << summary_json(log).dump() << '\n';
}

std::string to_jsonl(const EpisodeLog& log) {
  std::ostringstream os;
  write_jsonl(os, log);
  return os.str();
}

std::vector<EventRecord> read_events_jsonl(std::istream& is) {
  std::vector<EventRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw std::runtime_error("event log line " + std::to_string(lineno) + ": " + e.what());
    }
    if (j.contains("summary")) continue;
    out.push_back(event_from_json(j));
  }
  return out;
}

std::vector<EventRecord> read_events_jsonl_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open event log " + path);
  return read_events_jsonl(in);
}

std::vector<EventRecord> filter_action(const std::vector<EventRecord>& records, std::string_view action) {
  std::vector<EventRecord> out;
  for (const auto& r : records) {
    if (r.action == action) out.push_back(r);
  }
  return out;
}

}  // namespace agentlab
