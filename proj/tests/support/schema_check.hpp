#pragma once
// Minimal structural validator for the draft-07 subset our schemas use:
// type, required, properties, items and local $ref. Test-only helper.
#include <fstream>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace plink::testing {

class SchemaViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const nlohmann::json& resolve_ref(const nlohmann::json& root, const std::string& ref) {
  if (ref.rfind("#/", 0) != 0) throw SchemaViolation("unsupported $ref: " + ref);
  const nlohmann::json* node = &root;
  std::size_t pos = 2;
  while (pos < ref.size()) {
    const std::size_t next = ref.find('/', pos);
    const std::string key = ref.substr(pos, next == std::string::npos ? next : next - pos);
    if (!node->contains(key)) throw SchemaViolation("dangling $ref: " + ref);
    node = &node->at(key);
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return *node;
}

inline void check_schema(const nlohmann::json& value, const nlohmann::json& schema,
                         const nlohmann::json& root, const std::string& path = "$") {
  if (schema.contains("$ref")) {
    check_schema(value, resolve_ref(root, schema.at("$ref").get<std::string>()), root, path);
    return;
  }
  if (schema.contains("type")) {
    const std::string type = schema.at("type").get<std::string>();
    const bool ok = (type == "object" && value.is_object()) ||
                    (type == "array" && value.is_array()) ||
                    (type == "string" && value.is_string()) ||
                    (type == "boolean" && value.is_boolean()) ||
                    (type == "integer" && value.is_number_integer()) ||
                    (type == "number" && value.is_number());
    if (!ok) throw SchemaViolation(path + ": expected " + type + ", got " + value.dump());
  }
  if (schema.contains("required")) {
    for (const auto& key : schema.at("required")) {
      if (!value.contains(key.get<std::string>()))
        throw SchemaViolation(path + ": missing required key " + key.get<std::string>());
    }
  }
  if (schema.contains("properties") && value.is_object()) {
    for (const auto& [key, sub] : schema.at("properties").items()) {
      if (value.contains(key)) check_schema(value.at(key), sub, root, path + "." + key);
    }
  }
  if (schema.contains("items") && value.is_array()) {
    std::size_t i = 0;
    for (const auto& element : value)
      check_schema(element, schema.at("items"), root, path + "[" + std::to_string(i++) + "]");
  }
}

inline void check_against_schema_file(const nlohmann::json& value,
                                      const std::string& schema_path) {
  std::ifstream f(schema_path);
  if (!f) throw SchemaViolation("cannot open schema " + schema_path);
  const auto schema = nlohmann::json::parse(f);
  check_schema(value, schema, schema);
}

} // namespace plink::testing
