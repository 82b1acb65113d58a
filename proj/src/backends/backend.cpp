#include "agentlab/backends/backend.hpp"

#include <fstream>
#include <stdexcept>

namespace agentlab {

using nlohmann::json;

ScriptedBackend::ScriptedBackend(CompletionResult fallback) : fallback_(std::move(fallback)) {}

ScriptedBackend& ScriptedBackend::on(Predicate when, CompletionResult result) {
  rules_.push_back({std::move(when), [r = std::move(result)](const CompletionRequest&) { return r; }});
  return *this;
}

ScriptedBackend& ScriptedBackend::on(Predicate when, Responder respond) {
  rules_.push_back({std::move(when), std::move(respond)});
  return *this;
}

ScriptedBackend::Predicate ScriptedBackend::contains(std::string needle) {
  return [n = std::move(needle)](std::string_view rendered) { return rendered.find(n) != std::string_view::npos; };
}

ScriptedBackend::Predicate ScriptedBackend::always() {
  return [](std::string_view) { return true; };
}

CompletionResult ScriptedBackend::complete(const CompletionRequest& request) {
  const std::string rendered = render_turns(request.turns);
  for (const auto& rule : rules_) {
    if (rule.when(rendered)) return rule.respond(request);
  }
  return fallback_;
}

ReplayBackend::ReplayBackend(std::map<std::string, CompletionResult> transcript, ReplayOptions options,
                             CompletionBackend* fallback)
    : transcript_(std::move(transcript)), options_(options), fallback_(fallback) {}

std::map<std::string, CompletionResult> ReplayBackend::load_transcript(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open replay transcript " + path);
  std::map<std::string, CompletionResult> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    out[j.at("fingerprint").get<std::string>()] = completion_result_from_json(j.at("result"));
  }
  return out;
}

CompletionResult ReplayBackend::complete(const CompletionRequest& request) {
  const std::string fp = fingerprint(request, options_.include_sampling);
  if (auto it = transcript_.find(fp); it != transcript_.end()) return it->second;
  if (options_.strict || fallback_ == nullptr) throw ReplayMiss(fp);
  return fallback_->complete(request);
}

CompletionResult RecordingBackend::complete(const CompletionRequest& request) {
  CompletionResult result = inner_.complete(request);
  const std::string fp = fingerprint(request, include_sampling_);
  std::lock_guard lock(mu_);
  transcript_[fp] = result;
  return result;
}

std::map<std::string, CompletionResult> RecordingBackend::transcript() const {
  std::lock_guard lock(mu_);
  return transcript_;
}

void RecordingBackend::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write replay transcript " + path);
  for (const auto& [fp, result] : transcript()) {
    out << json{{"fingerprint", fp}, {"result", to_json(result)}}.dump() << '\n';
  }
}

}  // namespace agentlab
