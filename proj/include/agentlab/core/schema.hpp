#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace agentlab {

enum class ValueKind { integer, number, string, boolean, array, object, map };

std::string_view to_string(ValueKind kind);

struct FieldSpec;

// Structured type description used for action bodies and tool parameters.
// Objects are strict: a field not declared in `fields` is a violation.
struct TypeSpec {
  ValueKind kind = ValueKind::object;
  std::vector<FieldSpec> fields;            // object
  std::shared_ptr<const TypeSpec> element;  // array element or map value
  std::vector<std::string> allowed;         // string enumeration; empty = any
  std::optional<double> minimum;
  std::optional<double> maximum;
  std::string description;
};

struct FieldSpec {
  std::string name;
  TypeSpec type;
  bool required = true;
  std::string description;
};

using Schema = TypeSpec;

struct Violation {
  std::string field;
  std::string cause;

  friend bool operator==(const Violation&, const Violation&) = default;
};

namespace schema {

TypeSpec integer();
TypeSpec number();
TypeSpec text();
TypeSpec boolean();
TypeSpec one_of(std::vector<std::string> allowed);
TypeSpec array_of(TypeSpec element);
TypeSpec map_of(TypeSpec value);
TypeSpec object(std::vector<FieldSpec> fields);
TypeSpec within(TypeSpec type, std::optional<double> lo, std::optional<double> hi);

FieldSpec required(std::string name, TypeSpec type, std::string description = {});
FieldSpec optional(std::string name, TypeSpec type, std::string description = {});

}  // namespace schema

// Empty result means the value conforms. Optional fields may be absent or null.
std::vector<Violation> validate(const nlohmann::json& value, const TypeSpec& type);

// Same as validate(); named for its role at the agent/environment boundary.
inline std::vector<Violation> validate_action(const nlohmann::json& body, const Schema& schema) {
  return validate(body, schema);
}

std::string format_violations(const std::vector<Violation>& violations);

// JSON-Schema rendering, used on the wire and in the parser prompt.
nlohmann::json to_json_schema(const TypeSpec& type);

// Short human-readable description for prompts, e.g. `{bid: number (optional)}`.
std::string describe(const TypeSpec& type);

}  // namespace agentlab
