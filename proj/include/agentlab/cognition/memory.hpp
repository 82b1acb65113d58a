#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "agentlab/core/ids.hpp"

namespace agentlab {

enum class MemoryRole { observation, own_action, tool_result, note };

std::string_view to_string(MemoryRole role);
MemoryRole memory_role_from_string(std::string_view s);

struct MemoryEntry {
  TimeStep time = 0;
  std::string world_tag;
  MemoryRole role = MemoryRole::note;
  std::string content;

  friend bool operator==(const MemoryEntry&, const MemoryEntry&) = default;
};

// ceil(code points / 4).
std::size_t estimate_tokens(std::string_view text);

// "[world_tag t=TIME role] content"
std::string render_entry(const MemoryEntry& entry);

// An agent's dynamic state. The archive keeps every recorded entry; variants
// only differ in which suffix of it they render.
class MemoryStore {
 public:
  virtual ~MemoryStore() = default;

  void record(MemoryEntry entry) { archive_.push_back(std::move(entry)); }
  const std::vector<MemoryEntry>& archive() const { return archive_; }

  // Index of the oldest archive entry that survives eviction.
  virtual std::size_t first_visible() const = 0;
  std::size_t visible_count() const { return archive_.size() - first_visible(); }

  // One rendered entry per line, oldest survivor first. Empty store renders "".
  std::string render() const;

  virtual std::string_view variant() const = 0;
  virtual nlohmann::json parameters() const = 0;
  // Same variant and parameters, empty archive.
  virtual std::unique_ptr<MemoryStore> clone_empty() const = 0;
  std::unique_ptr<MemoryStore> clone() const;

 protected:
  std::vector<MemoryEntry> archive_;
};

class BufferMemory final : public MemoryStore {
 public:
  explicit BufferMemory(std::size_t capacity) : capacity_(capacity) {}

  std::size_t first_visible() const override;
  std::string_view variant() const override { return "buffer"; }
  nlohmann::json parameters() const override { return {{"capacity", capacity_}}; }
  std::unique_ptr<MemoryStore> clone_empty() const override { return std::make_unique<BufferMemory>(capacity_); }

 private:
  std::size_t capacity_;
};

// Renders at most `window` entries and at most `token_limit` estimated tokens,
// packing greedily from the newest entry and dropping the oldest first. The
// newest entry is always kept, even when it alone exceeds the limit.
class ChatHistoryMemory final : public MemoryStore {
 public:
  ChatHistoryMemory(std::size_t window, std::size_t token_limit) : window_(window), token_limit_(token_limit) {}

  std::size_t first_visible() const override;
  std::string_view variant() const override { return "chat_history"; }
  nlohmann::json parameters() const override { return {{"window", window_}, {"token_limit", token_limit_}}; }
  std::unique_ptr<MemoryStore> clone_empty() const override {
    return std::make_unique<ChatHistoryMemory>(window_, token_limit_);
  }

 private:
  std::size_t window_;
  std::size_t token_limit_;
};

class NullMemory final : public MemoryStore {
 public:
  std::size_t first_visible() const override { return archive_.size(); }
  std::string_view variant() const override { return "null"; }
  nlohmann::json parameters() const override { return nlohmann::json::object(); }
  std::unique_ptr<MemoryStore> clone_empty() const override { return std::make_unique<NullMemory>(); }
};

// Builds a store from a variant name and its parameters, e.g.
// ("chat_history", {"window": 5, "token_limit": 100000}).
std::unique_ptr<MemoryStore> make_memory(std::string_view variant, const nlohmann::json& parameters);

// Versioned newline-delimited archive: a header line with the variant and its
// parameters, then one entry per line.
std::string serialize_archive(const MemoryStore& store);
std::unique_ptr<MemoryStore> restore_archive(std::string_view text);

void save_archive(const MemoryStore& store, const std::string& path);
std::unique_ptr<MemoryStore> load_archive(const std::string& path);

}  // namespace agentlab
