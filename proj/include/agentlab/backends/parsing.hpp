#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "agentlab/backends/backend.hpp"

namespace agentlab {

class ParseFailure : public SchemaViolation {
 public:
  ParseFailure(int attempts, std::vector<Violation> last)
      : SchemaViolation("structured parse failed after " + std::to_string(attempts) + " attempts", std::move(last)),
        attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

struct ParseOptions {
  std::string model_id;
  double temperature = 0.0;
  int max_retries = 2;
};

// Parses a JSON value from model text: the whole trimmed text, or the body of
// the first fenced code block.
std::optional<nlohmann::json> extract_json(std::string_view text);

// Prompt asking the parser model to turn `raw_text` into JSON for `schema`.
std::string stage_two_prompt(std::string_view raw_text, const Schema& schema);

struct ParseResult {
  nlohmann::json payload;
  // Parser completions issued; 0 when raw_text was already valid.
  int parser_calls = 0;
};

// Two-stage parsing. Valid raw text is returned as is. Otherwise the parser
// backend is asked up to max_retries + 1 times, each retry carrying the
// previous violations. Throws ParseFailure when every attempt is invalid.
ParseResult parse_structured(std::string_view raw_text, const Schema& schema, CompletionBackend& parser,
                             const ParseOptions& options);

}  // namespace agentlab
