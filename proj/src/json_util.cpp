#include "json_util.hpp"

#include <cmath>
#include <cstdio>

#include "ist/error.hpp"

namespace ist::detail {

namespace {

void dump_into(const Json& j, std::string& out) {
  switch (j.type()) {
    case Json::value_t::object: {
      out.push_back('{');
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out.push_back(',');
        first = false;
        out += Json(it.key()).dump();
        out.push_back(':');
        dump_into(it.value(), out);
      }
      out.push_back('}');
      break;
    }
    case Json::value_t::array: {
      out.push_back('[');
      bool first = true;
      for (const auto& v : j) {
        if (!first) out.push_back(',');
        first = false;
        dump_into(v, out);
      }
      out.push_back(']');
      break;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) throw Error(ErrorKind::Range, "NaN/Infinity cannot be serialized");
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      break;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string msg = e.what();
    if (auto pos = msg.find("syntax error"); pos != std::string::npos) msg = msg.substr(pos);
    throw Error(ErrorKind::Syntax, msg, line, col);
  }
}

std::string canonical_dump(const Json& value) {
  std::string out;
  dump_into(value, out);
  return out;
}

void SchemaContext::fail(const std::string& path, const std::string& reason) const {
  throw Error(ErrorKind::Schema, reason, path.empty() ? std::string("<root>") : path);
}

void SchemaContext::expect_object(const Json& j, const std::string& path) const {
  if (!j.is_object()) fail(path, "expected an object");
}

void SchemaContext::expect_array(const Json& j, const std::string& path) const {
  if (!j.is_array()) fail(path, "expected an array");
}

void SchemaContext::check_fields(const Json& j, const std::string& path,
                                 std::initializer_list<std::string_view> allowed) const {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (auto a : allowed) known = known || a == it.key();
    if (known) continue;
    const auto where = child_path(path, it.key());
    if (!lenient_) fail(where, "unknown field");
    if (warnings_ != nullptr) warnings_->push_back("ignoring unknown field " + where);
  }
}

const Json& SchemaContext::require(const Json& j, const std::string& path, const char* key) const {
  auto it = j.find(key);
  if (it == j.end()) fail(child_path(path, key), "missing required field");
  return *it;
}

const Json* SchemaContext::optional(const Json& j, const char* key) const {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return nullptr;
  return &*it;
}

std::string SchemaContext::string_at(const Json& j, const std::string& path) const {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

double SchemaContext::number_at(const Json& j, const std::string& path) const {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "NaN/Infinity not allowed");
  return v;
}

std::int64_t SchemaContext::integer_at(const Json& j, const std::string& path) const {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 9.0e15) return static_cast<std::int64_t>(v);
  }
  fail(path, "expected an integer");
}

std::uint64_t SchemaContext::unsigned_at(const Json& j, const std::string& path) const {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  const auto v = integer_at(j, path);
  if (v < 0) fail(path, "expected a nonnegative integer");
  return static_cast<std::uint64_t>(v);
}

bool SchemaContext::bool_at(const Json& j, const std::string& path) const {
  if (!j.is_boolean()) fail(path, "expected a boolean");
  return j.get<bool>();
}

}  // namespace ist::detail
