#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "agentlab/backends/types.hpp"
#include "agentlab/core/errors.hpp"

namespace agentlab {

class BackendError : public Error {
 public:
  using Error::Error;
};

class ReplayMiss : public BackendError {
 public:
  explicit ReplayMiss(std::string fp) : BackendError("no recorded completion for fingerprint " + fp), fp_(std::move(fp)) {}
  const std::string& fingerprint() const { return fp_; }

 private:
  std::string fp_;
};

class RemoteExhausted : public BackendError {
 public:
  using BackendError::BackendError;
};

class Timeout : public BackendError {
 public:
  using BackendError::BackendError;
};

// Completion provider. Implementations must tolerate concurrent calls.
class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual CompletionResult complete(const CompletionRequest& request) = 0;
};

// Deterministic rule table: the first rule whose predicate accepts the
// rendered turns answers; otherwise the fallback does. Read-only after setup.
class ScriptedBackend final : public CompletionBackend {
 public:
  using Predicate = std::function<bool(std::string_view rendered)>;
  using Responder = std::function<CompletionResult(const CompletionRequest&)>;

  explicit ScriptedBackend(CompletionResult fallback = {"ok", {}});

  ScriptedBackend& on(Predicate when, CompletionResult result);
  ScriptedBackend& on(Predicate when, Responder respond);

  static Predicate contains(std::string needle);
  static Predicate always();

  CompletionResult complete(const CompletionRequest& request) override;

 private:
  struct Rule {
    Predicate when;
    Responder respond;
  };
  std::vector<Rule> rules_;
  CompletionResult fallback_;
};

struct ReplayOptions {
  // Unknown fingerprints throw ReplayMiss; otherwise they go to the fallback.
  bool strict = true;
  bool include_sampling = false;
};

class ReplayBackend final : public CompletionBackend {
 public:
  explicit ReplayBackend(std::map<std::string, CompletionResult> transcript, ReplayOptions options = {},
                         CompletionBackend* fallback = nullptr);

  // Reads newline-delimited {"fingerprint": ..., "result": {...}} pairs.
  static std::map<std::string, CompletionResult> load_transcript(const std::string& path);

  CompletionResult complete(const CompletionRequest& request) override;
  std::size_t size() const { return transcript_.size(); }

 private:
  std::map<std::string, CompletionResult> transcript_;
  ReplayOptions options_;
  CompletionBackend* fallback_;
};

// Passes requests through and keeps every (fingerprint, result) pair so a run
// can be replayed later.
class RecordingBackend final : public CompletionBackend {
 public:
  explicit RecordingBackend(CompletionBackend& inner, bool include_sampling = false)
      : inner_(inner), include_sampling_(include_sampling) {}

  CompletionResult complete(const CompletionRequest& request) override;

  std::map<std::string, CompletionResult> transcript() const;
  void save(const std::string& path) const;

 private:
  CompletionBackend& inner_;
  bool include_sampling_;
  mutable std::mutex mu_;
  std::map<std::string, CompletionResult> transcript_;
};

}  // namespace agentlab
