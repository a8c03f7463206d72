#include "ist/audit.hpp"

#include <cstdio>
#include <ctime>
#include <map>
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

Json ids_to_json(const std::vector<DimensionId>& ids) {
  Json arr = Json::array();
  for (const auto& id : ids) arr.push_back(id.str());
  return arr;
}

std::vector<DimensionId> ids_from_json(const Json& j, const std::string& path, const SchemaContext& ctx) {
  ctx.expect_array(j, path);
  std::vector<DimensionId> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(detail::id_from_json(j[i], index_path(path, i), ctx));
  return out;
}

std::string join_ids(const std::vector<DimensionId>& ids) {
  std::string out;
  for (const auto& id : ids) {
    if (!out.empty()) out += ", ";
    out += id.str();
  }
  return out.empty() ? "-" : out;
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string_view to_string(PrivacySource source) {
  switch (source) {
    case PrivacySource::Hint: return "hint";
    case PrivacySource::Oracle: return "oracle";
    case PrivacySource::Unlabeled: return "unlabeled";
  }
  return "unlabeled";
}

std::string format_rfc3339(std::chrono::system_clock::time_point tp) {
  const std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::chrono::system_clock::time_point parse_rfc3339(std::string_view text) {
  std::tm tm{};
  char tail = 0;
  const std::string s(text);
  if (s.size() != 20 ||
      std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &tm.tm_year, &tm.tm_mon, &tm.tm_mday, &tm.tm_hour,
                  &tm.tm_min, &tm.tm_sec, &tail) != 7 ||
      tail != 'Z') {
    throw Error(ErrorKind::Schema, "expected a UTC timestamp of the form YYYY-MM-DDTHH:MM:SSZ", s);
  }
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  const auto tp = std::chrono::system_clock::from_time_t(timegm(&tm));
  // timegm normalizes out-of-range fields (month 13, Feb 30); reject those.
  if (format_rfc3339(tp) != s) {
    throw Error(ErrorKind::Schema, "timestamp fields out of range", s);
  }
  return tp;
}

AuditRecord build_audit_record(const AuditInputs& in, const DimensionScores& scores, const Clock& clock) {
  const auto& spec = in.spec;
  if (in.carrier.task_id != spec.task_id) {
    throw Error(ErrorKind::Inconsistent,
                "carrier task \"" + in.carrier.task_id + "\" differs from spec task \"" + spec.task_id + "\"");
  }
  const auto flat = flatten(spec);
  EncodingMask mask;
  try {
    mask = compute_mask(spec, in.carrier);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::UnknownDimension) throw;
    throw Error(ErrorKind::Inconsistent, "carrier lists a dimension the spec does not declare", e.where());
  }
  if (scores.size() != flat.size()) {
    throw Error(ErrorKind::MissingScores,
                "expected scores for " + std::to_string(flat.size()) + " dimensions, got " + std::to_string(scores.size()));
  }
  for (std::size_t i = 0; i < flat.size(); ++i) {
    if (scores.entries[i].dimension != flat[i].id) {
      throw Error(ErrorKind::MissingScores, "scores are not aligned to the flattened spec", flat[i].id.str());
    }
  }

  std::vector<double> weights;
  for (const auto& d : flat) weights.push_back(d.weight);
  const auto bundle = compute_bundle(weights, mask, scores);

  AuditRecord rec;
  rec.task_id = spec.task_id;
  rec.timestamp = format_rfc3339(clock ? clock() : std::chrono::system_clock::now());
  rec.l_enc = bundle.l_enc;
  rec.s_icmw = bundle.s_icmw;
  rec.f_icmw = bundle.f_icmw;
  rec.d_drift = bundle.d_drift;
  rec.ga = in.ga.value_or(bundle.ga);
  if (rec.ga < 1 || rec.ga > kMaxGa) throw Error(ErrorKind::Range, "ga must be in 1..5");
  rec.split_zone = detect_split_zone(rec.ga, rec.f_icmw);

  bool used_hint = false;
  bool used_oracle = false;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const auto& d = flat[i];
    const bool encoded = mask.bits[i].m == 1;
    (encoded ? rec.encoded_dims : rec.absent_dims).push_back(d.id);
    if (scores.entries[i].r >= in.thresholds.r_threshold) rec.structurally_recovered.push_back(d.id);
    if (scores.entries[i].f >= in.thresholds.f_threshold) rec.fidelity_preserved.push_back(d.id);

    std::optional<PrivacyLabel> label;
    if (d.privacy_hint == PrivacyHint::Public || d.privacy_hint == PrivacyHint::Private) {
      label = d.privacy_hint == PrivacyHint::Private ? PrivacyLabel::Private : PrivacyLabel::Public;
      used_hint = true;
    } else if (in.oracle_labels != nullptr) {
      if (auto it = in.oracle_labels->find(d.id); it != in.oracle_labels->end()) {
        label = it->second;
        used_oracle = true;
      }
    }
    if (!encoded && label == PrivacyLabel::Private) rec.private_at_risk.push_back(d.id);
  }
  rec.privacy_source = used_oracle ? PrivacySource::Oracle : (used_hint ? PrivacySource::Hint : PrivacySource::Unlabeled);
  return rec;
}

AuditRecord build_audit_record(const AuditInputs& inputs, const RealizedValues& realized, const Clock& clock,
                               const Matcher& matcher) {
  DimensionScores scores;
  try {
    scores = score_output(inputs.spec, realized, matcher);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::UnknownDimension) throw;
    throw Error(ErrorKind::Inconsistent, "output realizes a dimension the spec does not declare", e.where());
  }
  return build_audit_record(inputs, scores, clock);
}

std::string serialize_audit_record(const AuditRecord& r) {
  Json j = Json::object();
  j["task_id"] = r.task_id;
  j["timestamp"] = r.timestamp;
  j["encoded_dims"] = ids_to_json(r.encoded_dims);
  j["absent_dims"] = ids_to_json(r.absent_dims);
  j["private_at_risk"] = ids_to_json(r.private_at_risk);
  j["structurally_recovered"] = ids_to_json(r.structurally_recovered);
  j["fidelity_preserved"] = ids_to_json(r.fidelity_preserved);
  j["l_enc"] = r.l_enc;
  j["s_icmw"] = r.s_icmw;
  j["f_icmw"] = r.f_icmw;
  j["d_drift"] = r.d_drift;
  j["ga"] = r.ga;
  j["split_zone"] = r.split_zone;
  j["privacy_source"] = std::string(to_string(r.privacy_source));
  return detail::canonical_dump(j);
}

AuditRecord parse_audit_record(std::string_view line, const ParseOptions& options) {
  const SchemaContext ctx(options.lenient, options.warnings);
  const Json j = detail::parse_json(line);
  ctx.expect_object(j, "");
  ctx.check_fields(j, "", {"task_id", "timestamp", "encoded_dims", "absent_dims", "private_at_risk",
                           "structurally_recovered", "fidelity_preserved", "l_enc", "s_icmw", "f_icmw",
                           "d_drift", "ga", "split_zone", "privacy_source"});
  AuditRecord r;
  r.task_id = ctx.string_at(ctx.require(j, "", "task_id"), "task_id");
  r.timestamp = ctx.string_at(ctx.require(j, "", "timestamp"), "timestamp");
  try {
    parse_rfc3339(r.timestamp);
  } catch (const Error&) {
    ctx.fail("timestamp", "expected an RFC 3339 UTC timestamp");
  }
  r.encoded_dims = ids_from_json(ctx.require(j, "", "encoded_dims"), "encoded_dims", ctx);
  r.absent_dims = ids_from_json(ctx.require(j, "", "absent_dims"), "absent_dims", ctx);
  r.private_at_risk = ids_from_json(ctx.require(j, "", "private_at_risk"), "private_at_risk", ctx);
  r.structurally_recovered = ids_from_json(ctx.require(j, "", "structurally_recovered"), "structurally_recovered", ctx);
  r.fidelity_preserved = ids_from_json(ctx.require(j, "", "fidelity_preserved"), "fidelity_preserved", ctx);
  const auto unit = [&](const char* key) {
    const double v = ctx.number_at(ctx.require(j, "", key), key);
    if (v < 0.0 || v > 1.0) ctx.fail(key, "expected a value in [0, 1]");
    return v;
  };
  r.l_enc = unit("l_enc");
  r.s_icmw = unit("s_icmw");
  r.f_icmw = unit("f_icmw");
  r.d_drift = unit("d_drift");
  const auto ga = ctx.integer_at(ctx.require(j, "", "ga"), "ga");
  if (ga < 1 || ga > kMaxGa) ctx.fail("ga", "ga must be an integer in 1..5");
  r.ga = static_cast<int>(ga);
  r.split_zone = ctx.bool_at(ctx.require(j, "", "split_zone"), "split_zone");
  const auto src = ctx.string_at(ctx.require(j, "", "privacy_source"), "privacy_source");
  if (src == "hint") {
    r.privacy_source = PrivacySource::Hint;
  } else if (src == "oracle") {
    r.privacy_source = PrivacySource::Oracle;
  } else if (src == "unlabeled") {
    r.privacy_source = PrivacySource::Unlabeled;
  } else {
    ctx.fail("privacy_source", "expected hint, oracle or unlabeled");
  }

  // Record invariants.
  std::set<DimensionId> encoded(r.encoded_dims.begin(), r.encoded_dims.end());
  std::set<DimensionId> absent(r.absent_dims.begin(), r.absent_dims.end());
  for (const auto& id : r.absent_dims) {
    if (encoded.count(id)) ctx.fail("absent_dims", "dimension " + id.str() + " is both encoded and absent");
  }
  for (const auto& id : r.private_at_risk) {
    if (!absent.count(id)) ctx.fail("private_at_risk", "dimension " + id.str() + " is at risk but not absent");
  }
  if (r.d_drift != 1.0 - r.f_icmw) ctx.fail("d_drift", "d_drift must equal 1 - f_icmw");
  if (r.split_zone != detect_split_zone(r.ga, r.f_icmw)) ctx.fail("split_zone", "split_zone disagrees with ga and f_icmw");
  return r;
}

std::vector<AuditRecord> parse_audit_records(std::string_view jsonl, const ParseOptions& options) {
  std::vector<AuditRecord> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= jsonl.size()) {
    auto end = jsonl.find('\n', start);
    if (end == std::string_view::npos) end = jsonl.size();
    auto line = jsonl.substr(start, end - start);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") != std::string_view::npos) {
      try {
        out.push_back(parse_audit_record(line, options));
      } catch (const Error& e) {
        throw Error(e.kind(), "line " + std::to_string(line_no) + ": " + e.what(), "line " + std::to_string(line_no));
      }
    }
    start = end + 1;
  }
  return out;
}

ReportFormat report_format_from_string(std::string_view s) {
  if (s == "text") return ReportFormat::Text;
  if (s == "markdown" || s == "md") return ReportFormat::Markdown;
  if (s == "json") return ReportFormat::Json;
  throw Error(ErrorKind::BadConfig, "format must be text, markdown or json", std::string(s));
}

std::string render_report(std::span<const AuditRecord> records, ReportFormat format) {
  const std::size_t total = records.size();
  std::size_t flagged = 0;
  CompensatedAccumulator drift;
  std::map<DimensionId, std::size_t> at_risk;
  for (const auto& r : records) {
    if (r.split_zone) ++flagged;
    drift.add(r.d_drift);
    for (const auto& id : r.private_at_risk) ++at_risk[id];
  }
  // Rates are undefined (n/a, null) for an empty batch.
  const double split_rate = total ? static_cast<double>(flagged) / static_cast<double>(total) : 0.0;
  const double mean_drift = total ? drift.value() / static_cast<double>(total) : 0.0;
  const auto show = [total](double v) { return total ? fixed(v) : std::string("n/a"); };

  if (format == ReportFormat::Json) {
    Json j = Json::object();
    j["record_count"] = total;
    j["split_zone_count"] = flagged;
    j["split_zone_rate"] = total ? Json(split_rate) : Json(nullptr);
    j["mean_drift"] = total ? Json(mean_drift) : Json(nullptr);
    Json freq = Json::object();
    for (const auto& [id, n] : at_risk) freq[id.str()] = static_cast<double>(n) / static_cast<double>(total);
    j["at_risk_frequency"] = std::move(freq);
    Json recs = Json::array();
    for (const auto& r : records) recs.push_back(Json::parse(serialize_audit_record(r)));
    j["records"] = std::move(recs);
    return detail::canonical_dump(j) + "\n";
  }

  std::ostringstream out;
  const bool md = format == ReportFormat::Markdown;
  if (md) {
    out << "# Intent audit report\n\n";
    out << "| metric | value |\n|---|---|\n";
    out << "| records | " << total << " |\n";
    out << "| split-zone outputs | " << flagged << " |\n";
    out << "| split-zone rate | " << show(split_rate) << " |\n";
    out << "| mean drift | " << show(mean_drift) << " |\n\n";
    out << "## At-risk dimensions\n\n";
    if (at_risk.empty()) out << "none\n";
    for (const auto& [id, n] : at_risk) {
      out << "- `" << id.str() << "`: " << n << "/" << total << " (" << fixed(static_cast<double>(n) / static_cast<double>(total)) << ")\n";
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& r = records[i];
      out << "\n## Record " << i + 1 << ": " << r.task_id << (r.split_zone ? " **SPLIT ZONE**" : "") << "\n\n";
      out << "- timestamp: " << r.timestamp << "\n";
      out << "- ga: " << r.ga << ", s-ICMw: " << fixed(r.s_icmw) << ", f-ICMw: " << fixed(r.f_icmw)
          << ", drift: " << fixed(r.d_drift) << ", L_enc: " << fixed(r.l_enc) << "\n";
      out << "- encoded: " << join_ids(r.encoded_dims) << "\n";
      out << "- absent: " << join_ids(r.absent_dims) << "\n";
      out << "- private at risk: " << join_ids(r.private_at_risk) << " (privacy source: " << to_string(r.privacy_source) << ")\n";
      out << "- structurally recovered: " << join_ids(r.structurally_recovered) << "\n";
      out << "- fidelity preserved: " << join_ids(r.fidelity_preserved) << "\n";
    }
    return out.str();
  }

  out << "Intent audit report\n";
  out << "records: " << total << "\n";
  out << "split-zone outputs: " << flagged << "\n";
  out << "split-zone rate: " << show(split_rate) << "\n";
  out << "mean drift: " << show(mean_drift) << "\n";
  out << "at-risk frequency:";
  if (at_risk.empty()) out << " none";
  out << "\n";
  for (const auto& [id, n] : at_risk) {
    out << "  " << id.str() << ": " << n << "/" << total << " (" << fixed(static_cast<double>(n) / static_cast<double>(total)) << ")\n";
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    out << "\n[" << i + 1 << "] " << r.task_id << " @ " << r.timestamp << (r.split_zone ? "  SPLIT ZONE" : "") << "\n";
    out << "  ga " << r.ga << "  s-ICMw " << fixed(r.s_icmw) << "  f-ICMw " << fixed(r.f_icmw) << "  drift "
        << fixed(r.d_drift) << "  L_enc " << fixed(r.l_enc) << "\n";
    out << "  encoded: " << join_ids(r.encoded_dims) << "\n";
    out << "  absent: " << join_ids(r.absent_dims) << "\n";
    out << "  private at risk: " << join_ids(r.private_at_risk) << " [" << to_string(r.privacy_source) << "]\n";
    out << "  structurally recovered: " << join_ids(r.structurally_recovered) << "\n";
    out << "  fidelity preserved: " << join_ids(r.fidelity_preserved) << "\n";
  }
  return out.str();
}

}  // namespace ist
