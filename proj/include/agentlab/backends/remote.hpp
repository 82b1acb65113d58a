#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <string>

#include "agentlab/backends/backend.hpp"
#include "agentlab/core/rng.hpp"

namespace agentlab {

struct RemoteOptions {
  // e.g. http://127.0.0.1:8080/v1/chat/completions
  std::string endpoint;
  // Name of the environment variable holding the bearer token. Empty = no auth.
  std::string token_env;
  std::size_t in_flight_limit = 4;
  std::chrono::milliseconds timeout{60000};
  // Attempt n (0-based) waits backoff_base * 2^n, scaled by a jitter in [0.5, 1).
  std::chrono::milliseconds backoff_base{100};
  std::uint64_t jitter_seed = 0;
};

// Chat-completions client. Retries transport failures and 5xx responses up to
// request.max_retries times; at most in_flight_limit calls are open at once.
class RemoteBackend final : public CompletionBackend {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit RemoteBackend(RemoteOptions options);

  CompletionResult complete(const CompletionRequest& request) override;

  void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }
  std::chrono::milliseconds backoff_delay(int attempt);

 private:
  struct Endpoint {
    std::string scheme;
    std::string host;
    int port = 0;
    std::string path;
  };
  static Endpoint parse_endpoint(const std::string& url);

  void acquire();
  void release();

  RemoteOptions options_;
  Endpoint endpoint_;
  Sleeper sleeper_;

  std::mutex mu_;
  std::condition_variable cv_;
  std::size_t in_flight_ = 0;
  RngStream jitter_;
};

}  // namespace agentlab
