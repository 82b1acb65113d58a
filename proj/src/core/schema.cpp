#include "agentlab/core/schema.hpp"

#include <cmath>
#include <sstream>

namespace agentlab {

using nlohmann::json;

std::string_view to_string(ValueKind kind) {
  switch (kind) {
    case ValueKind::integer: return "integer";
    case ValueKind::number: return "number";
    case ValueKind::string: return "string";
    case ValueKind::boolean: return "boolean";
    case ValueKind::array: return "array";
    case ValueKind::object: return "object";
    case ValueKind::map: return "map";
  }
  return "unknown";
}

namespace schema {

namespace {
TypeSpec of(ValueKind kind) {
  TypeSpec t;
  t.kind = kind;
  return t;
}
}  // namespace

TypeSpec integer() { return of(ValueKind::integer); }
TypeSpec number() { return of(ValueKind::number); }
TypeSpec text() { return of(ValueKind::string); }
TypeSpec boolean() { return of(ValueKind::boolean); }

TypeSpec one_of(std::vector<std::string> allowed) {
  TypeSpec t = of(ValueKind::string);
  t.allowed = std::move(allowed);
  return t;
}

TypeSpec array_of(TypeSpec element) {
  TypeSpec t = of(ValueKind::array);
  t.element = std::make_shared<const TypeSpec>(std::move(element));
  return t;
}

TypeSpec map_of(TypeSpec value) {
  TypeSpec t = of(ValueKind::map);
  t.element = std::make_shared<const TypeSpec>(std::move(value));
  return t;
}

TypeSpec object(std::vector<FieldSpec> fields) {
  TypeSpec t = of(ValueKind::object);
  t.fields = std::move(fields);
  return t;
}

TypeSpec within(TypeSpec type, std::optional<double> lo, std::optional<double> hi) {
  type.minimum = lo;
  type.maximum = hi;
  return type;
}

FieldSpec required(std::string name, TypeSpec type, std::string description) {
  return FieldSpec{std::move(name), std::move(type), true, std::move(description)};
}

FieldSpec optional(std::string name, TypeSpec type, std::string description) {
  return FieldSpec{std::move(name), std::move(type), false, std::move(description)};
}

}  // namespace schema

namespace {

std::string join_path(const std::string& base, const std::string& leaf) {
  return base.empty() ? leaf : base + "." + leaf;
}

std::string_view json_kind(const json& v) {
  if (v.is_null()) return "null";
  if (v.is_boolean()) return "boolean";
  if (v.is_number_integer()) return "integer";
  if (v.is_number()) return "number";
  if (v.is_string()) return "string";
  if (v.is_array()) return "array";
  return "object";
}

void check(const json& v, const TypeSpec& t, const std::string& path, std::vector<Violation>& out) {
  auto mismatch = [&] {
    out.push_back({path, "type mismatch: expected " + std::string(to_string(t.kind)) + ", got " +
                             std::string(json_kind(v))});
  };
  auto check_bounds = [&](double x) {
    if (t.minimum && x < *t.minimum) {
      std::ostringstream os;
      os << "below minimum " << *t.minimum;
      out.push_back({path, os.str()});
    }
    if (t.maximum && x > *t.maximum) {
      std::ostringstream os;
      os << "above maximum " << *t.maximum;
      out.push_back({path, os.str()});
    }
  };

  switch (t.kind) {
    case ValueKind::integer:
      if (!v.is_number_integer()) return mismatch();
      return check_bounds(v.get<double>());
    case ValueKind::number:
      if (!v.is_number() || !std::isfinite(v.get<double>())) return mismatch();
      return check_bounds(v.get<double>());
    case ValueKind::boolean:
      if (!v.is_boolean()) return mismatch();
      return;
    case ValueKind::string: {
      if (!v.is_string()) return mismatch();
      if (!t.allowed.empty()) {
        const auto& s = v.get_ref<const std::string&>();
        bool found = false;
        for (const auto& a : t.allowed) found = found || a == s;
        if (!found) out.push_back({path, "not one of the allowed values: \"" + s + "\""});
      }
      return;
    }
    case ValueKind::array:
      if (!v.is_array()) return mismatch();
      for (std::size_t i = 0; i < v.size(); ++i) {
        check(v[i], *t.element, path + "[" + std::to_string(i) + "]", out);
      }
      return;
    case ValueKind::map:
      if (!v.is_object()) return mismatch();
      for (const auto& [key, item] : v.items()) check(item, *t.element, join_path(path, key), out);
      return;
    case ValueKind::object: {
      if (!v.is_object()) return mismatch();
      for (const auto& f : t.fields) {
        auto it = v.find(f.name);
        const std::string fpath = join_path(path, f.name);
        if (it == v.end() || it->is_null()) {
          if (f.required) out.push_back({fpath, "missing"});
          continue;
        }
        check(*it, f.type, fpath, out);
      }
      for (const auto& [key, item] : v.items()) {
        bool declared = false;
        for (const auto& f : t.fields) declared = declared || f.name == key;
        if (!declared) out.push_back({join_path(path, key), "unknown field"});
      }
      return;
    }
  }
}

}  // namespace

std::vector<Violation> validate(const json& value, const TypeSpec& type) {
  std::vector<Violation> out;
  check(value, type, "", out);
  return out;
}

std::string format_violations(const std::vector<Violation>& violations) {
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << (violations[i].field.empty() ? "<root>" : violations[i].field) << ": " << violations[i].cause;
  }
  return os.str();
}

json to_json_schema(const TypeSpec& t) {
  json out;
  switch (t.kind) {
    case ValueKind::integer: out["type"] = "integer"; break;
    case ValueKind::number: out["type"] = "number"; break;
    case ValueKind::boolean: out["type"] = "boolean"; break;
    case ValueKind::string:
      out["type"] = "string";
      if (!t.allowed.empty()) out["enum"] = t.allowed;
      break;
    case ValueKind::array:
      out["type"] = "array";
      out["items"] = to_json_schema(*t.element);
      break;
    case ValueKind::map:
      out["type"] = "object";
      out["additionalProperties"] = to_json_schema(*t.element);
      break;
    case ValueKind::object: {
      out["type"] = "object";
      json props = json::object();
      json required = json::array();
      for (const auto& f : t.fields) {
        json p = to_json_schema(f.type);
        if (!f.description.empty()) p["description"] = f.description;
        props[f.name] = std::move(p);
        if (f.required) required.push_back(f.name);
      }
      out["properties"] = std::move(props);
      out["required"] = std::move(required);
      out["additionalProperties"] = false;
      break;
    }
  }
  if (t.minimum) out["minimum"] = *t.minimum;
  if (t.maximum) out["maximum"] = *t.maximum;
  if (!t.description.empty()) out["description"] = t.description;
  return out;
}

std::string describe(const TypeSpec& t) {
  std::ostringstream os;
  switch (t.kind) {
    case ValueKind::string:
      if (!t.allowed.empty()) {
        os << "one of ";
        for (std::size_t i = 0; i < t.allowed.size(); ++i) os << (i ? "|" : "") << t.allowed[i];
      } else {
        os << "string";
      }
      break;
    case ValueKind::array: os << "list of " << describe(*t.element); break;
    case ValueKind::map: os << "map of name -> " << describe(*t.element); break;
    case ValueKind::object:
      os << "{";
      for (std::size_t i = 0; i < t.fields.size(); ++i) {
        const auto& f = t.fields[i];
        os << (i ? ", " : "") << f.name << ": " << describe(f.type);
        if (!f.required) os << " (optional)";
      }
      os << "}";
      break;
    default: os << to_string(t.kind);
  }
  if (t.minimum || t.maximum) {
    os << " in [" << (t.minimum ? std::to_string(*t.minimum) : "-inf") << ", "
       << (t.maximum ? std::to_string(*t.maximum) : "inf") << "]";
  }
  return os.str();
}

}  // namespace agentlab
