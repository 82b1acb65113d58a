#include "agentlab/backends/parsing.hpp"

#include <sstream>

namespace agentlab {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::optional<json> parse_whole(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  json j = json::parse(s, nullptr, false);
  if (j.is_discarded()) return std::nullopt;
  return j;
}

}  // namespace

std::optional<json> extract_json(std::string_view text) {
  if (auto whole = parse_whole(text)) return whole;
  const auto open = text.find("```");
  if (open == std::string_view::npos) return std::nullopt;
  auto body_start = text.find('\n', open);
  if (body_start == std::string_view::npos) return std::nullopt;
  ++body_start;
  const auto close = text.find("```", body_start);
  if (close == std::string_view::npos) return std::nullopt;
  return parse_whole(text.substr(body_start, close - body_start));
}

std::string stage_two_prompt(std::string_view raw_text, const Schema& schema) {
  std::ostringstream os;
  os << "Based on the text provided below, output JSON. If the input is plain text,\n"
        "extract the necessary information while preserving the original wording\n"
        "as much as possible. If the input is JSON, output it unchanged, except\n"
        "fix any formatting errors you find.\n"
        "```\n"
     << raw_text
     << "\n```\n\n"
        "The JSON should follow the schema below:\n"
        "```\n"
     << to_json_schema(schema).dump() << "\n```";
  return os.str();
}

ParseResult parse_structured(std::string_view raw_text, const Schema& schema, CompletionBackend& parser,
                             const ParseOptions& options) {
  if (auto direct = extract_json(raw_text); direct && validate(*direct, schema).empty()) {
    return {std::move(*direct), 0};
  }

  CompletionRequest request;
  request.model_id = options.model_id;
  request.temperature = options.temperature;
  request.response_schema = schema;

  const std::string base_prompt = stage_two_prompt(raw_text, schema);
  std::vector<Violation> last;
  const int attempts = std::max(0, options.max_retries) + 1;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    std::string prompt = base_prompt;
    if (!last.empty()) {
      prompt += "\n\nYour previous output was invalid:";
      for (const auto& v : last) prompt += "\n- " + (v.field.empty() ? std::string("<root>") : v.field) + ": " + v.cause;
    }
    request.turns = {ChatTurn{Role::user, std::move(prompt), {}, std::nullopt}};
    const CompletionResult reply = parser.complete(request);
    auto parsed = extract_json(reply.content);
    if (!parsed) {
      last = {{"", "output is not valid JSON"}};
      continue;
    }
    last = validate(*parsed, schema);
    if (last.empty()) return {std::move(*parsed), attempt};
  }
  throw ParseFailure(attempts, std::move(last));
}

}  // namespace agentlab
