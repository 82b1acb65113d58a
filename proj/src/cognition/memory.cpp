#include "agentlab/cognition/memory.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace agentlab {

using nlohmann::json;

namespace {
constexpr int kArchiveVersion = 1;
constexpr std::string_view kArchiveFormat = "agentlab.memory";
}  // namespace

std::string_view to_string(MemoryRole role) {
  switch (role) {
    case MemoryRole::observation: return "observation";
    case MemoryRole::own_action: return "own_action";
    case MemoryRole::tool_result: return "tool_result";
    case MemoryRole::note: return "note";
  }
  return "note";
}

MemoryRole memory_role_from_string(std::string_view s) {
  if (s == "observation") return MemoryRole::observation;
  if (s == "own_action") return MemoryRole::own_action;
  if (s == "tool_result") return MemoryRole::tool_result;
  if (s == "note") return MemoryRole::note;
  throw std::invalid_argument("unknown memory role '" + std::string(s) + "'");
}

std::size_t estimate_tokens(std::string_view text) {
  std::size_t code_points = 0;
  for (unsigned char c : text) {
    if ((c & 0xC0) != 0x80) ++code_points;
  }
  return (code_points + 3) / 4;
}

std::string render_entry(const MemoryEntry& e) {
  std::ostringstream os;
  os << '[' << e.world_tag << " t=" << e.time << ' ' << to_string(e.role) << "] " << e.content;
  return os.str();
}

std::string MemoryStore::render() const {
  std::string out;
  for (std::size_t i = first_visible(); i < archive_.size(); ++i) {
    if (!out.empty()) out += '\n';
    out += render_entry(archive_[i]);
  }
  return out;
}

std::unique_ptr<MemoryStore> MemoryStore::clone() const {
  auto copy = clone_empty();
  for (const auto& e : archive_) copy->record(e);
  return copy;
}

std::size_t BufferMemory::first_visible() const {
  return archive_.size() > capacity_ ? archive_.size() - capacity_ : 0;
}

std::size_t ChatHistoryMemory::first_visible() const {
  std::size_t first = archive_.size();
  std::size_t tokens = 0;
  while (first > 0 && archive_.size() - first < window_) {
    const std::size_t cost = estimate_tokens(archive_[first - 1].content);
    const bool is_newest = first == archive_.size();
    if (!is_newest && tokens + cost > token_limit_) break;
    tokens += cost;
    --first;
  }
  return first;
}

std::unique_ptr<MemoryStore> make_memory(std::string_view variant, const json& p) {
  if (variant == "buffer") return std::make_unique<BufferMemory>(p.at("capacity").get<std::size_t>());
  if (variant == "chat_history") {
    return std::make_unique<ChatHistoryMemory>(p.at("window").get<std::size_t>(),
                                               p.at("token_limit").get<std::size_t>());
  }
  if (variant == "null") return std::make_unique<NullMemory>();
  throw std::invalid_argument("unknown memory variant '" + std::string(variant) + "'");
}

std::string serialize_archive(const MemoryStore& store) {
  std::ostringstream os;
  os << json{{"format", kArchiveFormat},
             {"version", kArchiveVersion},
             {"variant", store.variant()},
             {"parameters", store.parameters()},
             {"entries", store.archive().size()}}
            .dump()
     << '\n';
  for (const auto& e : store.archive()) {
    os << json{{"time", e.time}, {"world", e.world_tag}, {"role", to_string(e.role)}, {"content", e.content}}.dump()
       << '\n';
  }
  return os.str();
}

std::unique_ptr<MemoryStore> restore_archive(std::string_view text) {
  std::istringstream is{std::string(text)};
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("memory archive is empty");
  const json header = json::parse(line);
  if (header.value("format", "") != kArchiveFormat) throw std::runtime_error("not a memory archive");
  if (header.value("version", 0) != kArchiveVersion) {
    throw std::runtime_error("unsupported memory archive version " + header.value("version", json()).dump());
  }
  auto store = make_memory(header.at("variant").get<std::string>(), header.at("parameters"));
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    store->record(MemoryEntry{j.at("time").get<TimeStep>(), j.at("world").get<std::string>(),
                              memory_role_from_string(j.at("role").get<std::string>()),
                              j.at("content").get<std::string>()});
  }
  const auto expected = header.at("entries").get<std::size_t>();
  if (store->archive().size() != expected) {
    throw std::runtime_error("memory archive truncated: expected " + std::to_string(expected) + " entries, read " +
                             std::to_string(store->archive().size()));
  }
  return store;
}

void save_archive(const MemoryStore& store, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write memory archive " + path);
  out << serialize_archive(store);
}

std::unique_ptr<MemoryStore> load_archive(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read memory archive " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return restore_archive(os.str());
}

}  // namespace agentlab
