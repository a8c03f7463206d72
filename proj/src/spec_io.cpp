#include "ist/spec_io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "io_json.hpp"
#include "ist/error.hpp"
#include "ist/numeric.hpp"

namespace ist {

using detail::child_path;
using detail::index_path;
using detail::Json;
using detail::SchemaContext;

namespace {

// Weights that already sum to 1 this closely are left untouched so that
// serialize/parse round trips are bit-exact.
constexpr double kRenormalizeSlack = 1e-12;

Json dimension_to_json(const Dimension& d) {
  Json j = Json::object();
  j["id"] = d.id.str();
  j["weight"] = d.weight;
  j["intended_value"] = detail::value_to_json(d.intended_value);
  if (d.privacy_hint) j["privacy_hint"] = std::string(to_string(*d.privacy_hint));
  if (!d.children.empty()) {
    Json children = Json::array();
    for (const auto& c : d.children) children.push_back(dimension_to_json(c));
    j["children"] = std::move(children);
  }
  return j;
}

PrivacyHint hint_from_json(const Json& j, const std::string& path, const SchemaContext& ctx) {
  const auto s = ctx.string_at(j, path);
  if (s == "public") return PrivacyHint::Public;
  if (s == "private") return PrivacyHint::Private;
  if (s == "unknown") return PrivacyHint::Unknown;
  ctx.fail(path, "expected one of public, private, unknown");
}

Dimension dimension_from_json(const Json& j, const std::string& path, const SchemaContext& ctx) {
  ctx.expect_object(j, path);
  ctx.check_fields(j, path, {"id", "weight", "intended_value", "privacy_hint", "children"});
  Dimension d;
  d.id = detail::id_from_json(ctx.require(j, path, "id"), child_path(path, "id"), ctx);
  const auto wpath = child_path(path, "weight");
  d.weight = ctx.number_at(ctx.require(j, path, "weight"), wpath);
  if (d.weight < 0.0) ctx.fail(wpath, "weight must be >= 0");
  if (d.weight > 1.0) ctx.fail(wpath, "weight must be <= 1");
  d.intended_value = detail::value_from_json(ctx.require(j, path, "intended_value"),
                                             child_path(path, "intended_value"), ctx);
  if (const auto* h = ctx.optional(j, "privacy_hint")) {
    d.privacy_hint = hint_from_json(*h, child_path(path, "privacy_hint"), ctx);
  }
  if (const auto* c = ctx.optional(j, "children")) {
    const auto cpath = child_path(path, "children");
    ctx.expect_array(*c, cpath);
    for (std::size_t i = 0; i < c->size(); ++i) {
      d.children.push_back(dimension_from_json((*c)[i], index_path(cpath, i), ctx));
    }
  }
  return d;
}

Json spec_to_json(const IntentSpec& spec) {
  Json j = Json::object();
  j["format_version"] = std::string(kFormatVersion);
  j["task_id"] = spec.task_id;
  j["task_type"] = spec.task_type;
  Json dims = Json::array();
  for (const auto& d : spec.dimensions) dims.push_back(dimension_to_json(d));
  j["dimensions"] = std::move(dims);
  return j;
}

void renormalize_and_validate(IntentSpec& spec) {
  CompensatedAccumulator acc;
  for (const auto& d : spec.dimensions) acc.add(d.weight);
  const double total = acc.value();
  if (!spec.dimensions.empty() && std::fabs(total - 1.0) <= kTopWeightTolerance &&
      std::fabs(total - 1.0) > kRenormalizeSlack) {
    for (auto& d : spec.dimensions) d.weight /= total;
  }
  const auto violations = validate_spec(spec);
  if (!violations.empty()) {
    std::string msg;
    for (const auto& v : violations) {
      if (!msg.empty()) msg += "; ";
      msg += std::string(to_string(v.rule));
      if (!v.dimension.empty()) msg += "(" + v.dimension + ")";
      msg += ": " + v.message;
    }
    throw Error(ErrorKind::Validation, msg, violations.front().dimension);
  }
}

Carrier carrier_from_json(const Json& j, const std::string& path, const SchemaContext& ctx) {
  ctx.expect_object(j, path);
  ctx.check_fields(j, path, {"task_id", "text", "encoded_dimensions"});
  Carrier c;
  c.task_id = ctx.string_at(ctx.require(j, path, "task_id"), child_path(path, "task_id"));
  if (const auto* t = ctx.optional(j, "text")) c.text = ctx.string_at(*t, child_path(path, "text"));
  const auto epath = child_path(path, "encoded_dimensions");
  const auto& enc = ctx.require(j, path, "encoded_dimensions");
  ctx.expect_array(enc, epath);
  std::set<DimensionId> seen;
  for (std::size_t i = 0; i < enc.size(); ++i) {
    auto id = detail::id_from_json(enc[i], index_path(epath, i), ctx);
    if (!seen.insert(id).second) ctx.fail(index_path(epath, i), "duplicate dimension id");
    c.encoded_dimensions.push_back(std::move(id));
  }
  return c;
}

Json carrier_to_json(const Carrier& c) {
  Json j = Json::object();
  j["task_id"] = c.task_id;
  if (c.text) j["text"] = *c.text;
  Json enc = Json::array();
  for (const auto& id : c.encoded_dimensions) enc.push_back(id.str());
  j["encoded_dimensions"] = std::move(enc);
  return j;
}

void collect_leaves(const Dimension& d, std::set<DimensionId>& out) {
  if (d.is_leaf()) {
    out.insert(d.id);
    return;
  }
  for (const auto& c : d.children) collect_leaves(c, out);
}

double unit_score(const Json& j, const std::string& path, const SchemaContext& ctx) {
  const double v = ctx.number_at(j, path);
  if (v < 0.0 || v > 1.0) ctx.fail(path, "expected a value in [0, 1]");
  return v;
}

int ga_score(const Json& j, const std::string& path, const SchemaContext& ctx) {
  const auto v = ctx.integer_at(j, path);
  if (v < 1 || v > 5) ctx.fail(path, "ga must be an integer in 1..5");
  return static_cast<int>(v);
}

}  // namespace

namespace detail {

Json value_to_json(const ValueRef& v) {
  Json j = Json::object();
  j["kind"] = std::string(to_string(v.kind));
  j["value"] = v.value;
  return j;
}

ValueRef value_from_json(const Json& j, const std::string& path, const SchemaContext& ctx) {
  // A bare string is shorthand for a categorical token.
  if (j.is_string()) return ValueRef::token(j.get<std::string>());
  ctx.expect_object(j, path);
  ctx.check_fields(j, path, {"kind", "value"});
  const auto kpath = child_path(path, "kind");
  const auto kind = ctx.string_at(ctx.require(j, path, "kind"), kpath);
  ValueRef v;
  if (kind == "token") {
    v.kind = ValueRef::Kind::Token;
  } else if (kind == "text") {
    v.kind = ValueRef::Kind::Text;
  } else {
    ctx.fail(kpath, "expected \"token\" or \"text\"");
  }
  v.value = ctx.string_at(ctx.require(j, path, "value"), child_path(path, "value"));
  return v;
}

DimensionId id_from_json(const Json& j, const std::string& path, const SchemaContext& ctx) {
  const auto s = ctx.string_at(j, path);
  if (s.empty()) ctx.fail(path, "dimension id must be non-empty");
  return DimensionId(s);
}

Json mask_to_json(const EncodingMask& mask) {
  Json arr = Json::array();
  for (const auto& b : mask.bits) {
    Json e = Json::object();
    e["dimension"] = b.dimension.str();
    e["m"] = static_cast<int>(b.m);
    arr.push_back(std::move(e));
  }
  return arr;
}

EncodingMask mask_from_json(const Json& j, const std::string& path, const SchemaContext& ctx) {
  ctx.expect_array(j, path);
  EncodingMask mask;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto epath = index_path(path, i);
    ctx.expect_object(j[i], epath);
    ctx.check_fields(j[i], epath, {"dimension", "m"});
    MaskBit bit;
    bit.dimension = id_from_json(ctx.require(j[i], epath, "dimension"), child_path(epath, "dimension"), ctx);
    const auto m = ctx.integer_at(ctx.require(j[i], epath, "m"), child_path(epath, "m"));
    if (m != 0 && m != 1) ctx.fail(child_path(epath, "m"), "mask bit must be 0 or 1");
    bit.m = static_cast<std::uint8_t>(m);
    mask.bits.push_back(std::move(bit));
  }
  return mask;
}

Json realized_to_json(const RealizedValues& values) {
  Json j = Json::object();
  for (const auto& [id, v] : values) j[id.str()] = value_to_json(v);
  return j;
}

RealizedValues realized_from_json(const Json& j, const std::string& path, const SchemaContext& ctx) {
  ctx.expect_object(j, path);
  RealizedValues out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto vpath = child_path(path, it.key());
    if (it.key().empty()) ctx.fail(vpath, "dimension id must be non-empty");
    if (!out.emplace(DimensionId(it.key()), value_from_json(it.value(), vpath, ctx)).second) {
      ctx.fail(vpath, "duplicate dimension id (ids are case-insensitive)");
    }
  }
  return out;
}

Json record_to_json(const OutputRecord& r) {
  Json j = Json::object();
  j["task_id"] = r.task_id;
  j["condition"] = r.condition;
  j["model_tag"] = r.model_tag;
  j["mask"] = mask_to_json(r.mask);
  j["realized_values"] = realized_to_json(r.realized_values);
  j["ga"] = r.ga;
  j["s_icmw"] = r.s_icmw;
  j["f_icmw"] = r.f_icmw;
  if (r.text) j["text"] = *r.text;
  return j;
}

OutputRecord record_from_json(const Json& j, const std::string& path, const SchemaContext& ctx) {
  ctx.expect_object(j, path);
  ctx.check_fields(j, path,
                   {"task_id", "condition", "model_tag", "mask", "realized_values", "ga", "s_icmw",
                    "f_icmw", "text"});
  OutputRecord r;
  r.task_id = ctx.string_at(ctx.require(j, path, "task_id"), child_path(path, "task_id"));
  r.condition = ctx.string_at(ctx.require(j, path, "condition"), child_path(path, "condition"));
  r.model_tag = ctx.string_at(ctx.require(j, path, "model_tag"), child_path(path, "model_tag"));
  r.mask = mask_from_json(ctx.require(j, path, "mask"), child_path(path, "mask"), ctx);
  r.realized_values = realized_from_json(ctx.require(j, path, "realized_values"),
                                         child_path(path, "realized_values"), ctx);
  r.ga = ga_score(ctx.require(j, path, "ga"), child_path(path, "ga"), ctx);
  r.s_icmw = unit_score(ctx.require(j, path, "s_icmw"), child_path(path, "s_icmw"), ctx);
  r.f_icmw = unit_score(ctx.require(j, path, "f_icmw"), child_path(path, "f_icmw"), ctx);
  if (const auto* t = ctx.optional(j, "text")) r.text = ctx.string_at(*t, child_path(path, "text"));
  return r;
}

}  // namespace detail

SpecDocument parse_spec_document(std::string_view text, const ParseOptions& options) {
  const SchemaContext ctx(options.lenient, options.warnings);
  const Json j = detail::parse_json(text);
  ctx.expect_object(j, "");
  ctx.check_fields(j, "", {"format_version", "task_id", "task_type", "dimensions", "carrier", "outputs"});
  SpecDocument doc;
  doc.format_version = ctx.string_at(ctx.require(j, "", "format_version"), "format_version");
  if (doc.format_version != kFormatVersion) {
    ctx.fail("format_version", "unsupported format version \"" + doc.format_version + "\"");
  }
  doc.spec.task_id = ctx.string_at(ctx.require(j, "", "task_id"), "task_id");
  doc.spec.task_type = ctx.string_at(ctx.require(j, "", "task_type"), "task_type");
  const auto& dims = ctx.require(j, "", "dimensions");
  ctx.expect_array(dims, "dimensions");
  for (std::size_t i = 0; i < dims.size(); ++i) {
    doc.spec.dimensions.push_back(dimension_from_json(dims[i], index_path("dimensions", i), ctx));
  }
  renormalize_and_validate(doc.spec);
  if (const auto* c = ctx.optional(j, "carrier")) doc.carrier = carrier_from_json(*c, "carrier", ctx);
  if (const auto* o = ctx.optional(j, "outputs")) {
    ctx.expect_array(*o, "outputs");
    for (std::size_t i = 0; i < o->size(); ++i) {
      doc.outputs.push_back(detail::record_from_json((*o)[i], index_path("outputs", i), ctx));
    }
  }
  return doc;
}

IntentSpec parse_intent_spec(std::string_view text, const ParseOptions& options) {
  return parse_spec_document(text, options).spec;
}

std::string serialize_intent_spec(const IntentSpec& spec) {
  return detail::canonical_dump(spec_to_json(spec));
}

Carrier parse_carrier(std::string_view text, const ParseOptions& options) {
  const SchemaContext ctx(options.lenient, options.warnings);
  return carrier_from_json(detail::parse_json(text), "", ctx);
}

std::string serialize_carrier(const Carrier& carrier) {
  return detail::canonical_dump(carrier_to_json(carrier));
}

ModelOutput parse_model_output(std::string_view text, const ParseOptions& options) {
  const SchemaContext ctx(options.lenient, options.warnings);
  const Json j = detail::parse_json(text);
  ctx.expect_object(j, "");
  ctx.check_fields(j, "", {"task_id", "model_tag", "realized_values", "ga", "text"});
  ModelOutput out;
  out.task_id = ctx.string_at(ctx.require(j, "", "task_id"), "task_id");
  if (const auto* m = ctx.optional(j, "model_tag")) out.model_tag = ctx.string_at(*m, "model_tag");
  out.realized_values = detail::realized_from_json(ctx.require(j, "", "realized_values"),
                                                   "realized_values", ctx);
  if (const auto* g = ctx.optional(j, "ga")) out.ga = ga_score(*g, "ga", ctx);
  if (const auto* t = ctx.optional(j, "text")) out.text = ctx.string_at(*t, "text");
  return out;
}

std::string serialize_model_output(const ModelOutput& output) {
  Json j = Json::object();
  j["task_id"] = output.task_id;
  j["model_tag"] = output.model_tag;
  j["realized_values"] = detail::realized_to_json(output.realized_values);
  if (output.ga) j["ga"] = *output.ga;
  if (output.text) j["text"] = *output.text;
  return detail::canonical_dump(j);
}

OutputRecord parse_record(std::string_view line, const ParseOptions& options) {
  const SchemaContext ctx(options.lenient, options.warnings);
  return detail::record_from_json(detail::parse_json(line), "", ctx);
}

std::string serialize_record(const OutputRecord& record) {
  return detail::canonical_dump(detail::record_to_json(record));
}

EncodingMask compute_mask(const IntentSpec& spec, const Carrier& carrier) {
  const auto ids = flat_ids(spec);
  std::set<DimensionId> encoded;
  for (const auto& id : carrier.encoded_dimensions) {
    const Dimension* d = find_dimension(spec, id);
    if (d == nullptr) throw Error(ErrorKind::UnknownDimension, "carrier references an id absent from the spec", id.str());
    collect_leaves(*d, encoded);
  }
  EncodingMask mask;
  mask.bits.reserve(ids.size());
  for (const auto& id : ids) mask.bits.push_back({id, static_cast<std::uint8_t>(encoded.count(id) ? 1 : 0)});
  return mask;
}

RecordReader::RecordReader(std::istream& in, ReadOptions options) : in_(in), options_(options) {}

std::optional<OutputRecord> RecordReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      return parse_record(line, ParseOptions{options_.lenient, nullptr});
    } catch (const Error& e) {
      if (options_.fail_fast) {
        throw Error(e.kind(), "line " + std::to_string(line_no_) + ": " + e.what(), line_no_, 0);
      }
      errors_.push_back({line_no_, e.what()});
    }
  }
  return std::nullopt;
}

RecordBatch read_records(const std::filesystem::path& path, ReadOptions options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open for reading", path.string());
  RecordReader reader(in, options);
  RecordBatch batch;
  while (auto r = reader.next()) batch.records.push_back(std::move(*r));
  batch.errors = reader.errors();
  return batch;
}

void write_records(std::ostream& out, std::span<const OutputRecord> records) {
  for (const auto& r : records) out << serialize_record(r) << '\n';
}

void write_records(const std::filesystem::path& path, std::span<const OutputRecord> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open for writing", path.string());
  write_records(out, records);
  if (!out) throw Error(ErrorKind::Io, "write failed", path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open for reading", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open for writing", path.string());
  out << content;
  if (!out) throw Error(ErrorKind::Io, "write failed", path.string());
}

}  // namespace ist
