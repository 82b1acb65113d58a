#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "agentlab/backends/remote.hpp"

#include <httplib.h>

#include <cmath>
#include <cstdlib>
#include <regex>
#include <thread>

namespace agentlab {

using nlohmann::json;

namespace {

class InFlightSlot {
 public:
  InFlightSlot(std::function<void()> acquire, std::function<void()> release) : release_(std::move(release)) {
    acquire();
  }
  ~InFlightSlot() { release_(); }
  InFlightSlot(const InFlightSlot&) = delete;
  InFlightSlot& operator=(const InFlightSlot&) = delete;

 private:
  std::function<void()> release_;
};

}  // namespace

RemoteBackend::RemoteBackend(RemoteOptions options)
    : options_(std::move(options)),
      endpoint_(parse_endpoint(options_.endpoint)),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }),
      jitter_(RngStream(options_.jitter_seed).child("remote-backoff")) {
  if (options_.in_flight_limit == 0) options_.in_flight_limit = 1;
}

RemoteBackend::Endpoint RemoteBackend::parse_endpoint(const std::string& url) {
  static const std::regex kUrl(R"(^(https?)://([^/:]+)(?::(\d+))?(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) throw BackendError("malformed endpoint URL '" + url + "'");
  Endpoint e;
  e.scheme = m[1];
  e.host = m[2];
  e.port = m[3].matched ? std::stoi(m[3]) : (e.scheme == "https" ? 443 : 80);
  e.path = m[4].matched ? std::string(m[4]) : "/";
  return e;
}

void RemoteBackend::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [this] { return in_flight_ < options_.in_flight_limit; });
  ++in_flight_;
}

void RemoteBackend::release() {
  {
    std::lock_guard lock(mu_);
    --in_flight_;
  }
  cv_.notify_one();
}

std::chrono::milliseconds RemoteBackend::backoff_delay(int attempt) {
  double jitter;
  {
    std::lock_guard lock(mu_);
    jitter = 0.5 + 0.5 * jitter_.uniform();
  }
  const double base = static_cast<double>(options_.backoff_base.count()) * std::ldexp(1.0, attempt);
  return std::chrono::milliseconds(static_cast<std::int64_t>(std::llround(base * jitter)));
}

CompletionResult RemoteBackend::complete(const CompletionRequest& request) {
  httplib::Headers headers;
  if (!options_.token_env.empty()) {
    const char* token = std::getenv(options_.token_env.c_str());
    if (token == nullptr || *token == '\0') {
      throw BackendError("environment variable " + options_.token_env + " holding the API token is not set");
    }
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }
  const std::string body = to_wire(request).dump();
  const int attempts = std::max(0, request.max_retries) + 1;

  std::string last_error;
  bool last_was_timeout = false;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) sleeper_(backoff_delay(attempt - 1));

    httplib::Result res{nullptr, httplib::Error::Unknown};
    {
      InFlightSlot slot([this] { acquire(); }, [this] { release(); });
      httplib::Client client(endpoint_.scheme + "://" + endpoint_.host + ":" + std::to_string(endpoint_.port));
      const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
      const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - secs);
      client.set_connection_timeout(secs.count(), usecs.count());
      client.set_read_timeout(secs.count(), usecs.count());
      client.set_write_timeout(secs.count(), usecs.count());
      res = client.Post(endpoint_.path, headers, body, "application/json");
    }

    if (!res) {
      const auto err = res.error();
      last_was_timeout = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read;
      last_error = httplib::to_string(err);
      continue;
    }
    if (res->status >= 500) {
      last_was_timeout = false;
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw BackendError("HTTP " + std::to_string(res->status) + " from " + options_.endpoint + ": " + res->body);
    }
    try {
      return from_wire(json::parse(res->body));
    } catch (const std::exception& e) {
      throw BackendError(std::string("malformed completion response: ") + e.what());
    }
  }
  const std::string what = "completion request failed after " + std::to_string(attempts) + " attempts: " + last_error;
  if (last_was_timeout) throw Timeout(what);
  throw RemoteExhausted(what);
}

}  // namespace agentlab
