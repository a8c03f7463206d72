#pragma once

// Internal helpers shared by the JSON front-ends: strict field access with
// path-qualified schema errors, and the canonical writer.

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace ist::detail {

using Json = nlohmann::ordered_json;

// Parses UTF-8 JSON text; syntax errors carry line and column.
Json parse_json(std::string_view text);

// Compact, key-order-preserving dump; floating-point values use 17
// significant digits. Throws Range on NaN/Infinity.
std::string canonical_dump(const Json& value);

class SchemaContext {
 public:
  SchemaContext(bool lenient, std::vector<std::string>* warnings)
      : lenient_(lenient), warnings_(warnings) {}

  void expect_object(const Json& j, const std::string& path) const;
  void expect_array(const Json& j, const std::string& path) const;
  void check_fields(const Json& j, const std::string& path,
                    std::initializer_list<std::string_view> allowed) const;

  const Json& require(const Json& j, const std::string& path, const char* key) const;
  const Json* optional(const Json& j, const char* key) const;

  std::string string_at(const Json& j, const std::string& path) const;
  double number_at(const Json& j, const std::string& path) const;
  std::int64_t integer_at(const Json& j, const std::string& path) const;
  std::uint64_t unsigned_at(const Json& j, const std::string& path) const;
  bool bool_at(const Json& j, const std::string& path) const;

  [[noreturn]] void fail(const std::string& path, const std::string& reason) const;

  bool lenient() const { return lenient_; }
  std::vector<std::string>* warnings() const { return warnings_; }

 private:
  bool lenient_;
  std::vector<std::string>* warnings_;
};

inline std::string child_path(const std::string& parent, std::string_view key) {
  return parent.empty() ? std::string(key) : parent + "." + std::string(key);
}

inline std::string index_path(const std::string& parent, std::size_t i) {
  return parent + "[" + std::to_string(i) + "]";
}

}  // namespace ist::detail
