#pragma once

// Per-interaction audit records and batch reports.

#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ist/info_oracle.hpp"
#include "ist/intent_model.hpp"
#include "ist/metrics.hpp"
#include "ist/spec_io.hpp"

namespace ist {

enum class PrivacySource { Hint, Oracle, Unlabeled };

std::string_view to_string(PrivacySource source);

struct AuditThresholds {
  double r_threshold = 0.5;
  double f_threshold = 0.5;
};

using Clock = std::function<std::chrono::system_clock::time_point()>;

struct AuditRecord {
  std::string task_id;
  std::string timestamp;  // RFC 3339, UTC
  std::vector<DimensionId> encoded_dims;
  std::vector<DimensionId> absent_dims;
  std::vector<DimensionId> private_at_risk;
  std::vector<DimensionId> structurally_recovered;
  std::vector<DimensionId> fidelity_preserved;
  double l_enc = 0.0;
  double s_icmw = 0.0;
  double f_icmw = 0.0;
  double d_drift = 1.0;
  int ga = 1;
  bool split_zone = false;
  PrivacySource privacy_source = PrivacySource::Unlabeled;

  friend bool operator==(const AuditRecord&, const AuditRecord&) = default;
};

// Oracle verdicts keyed by dimension; used for dimensions the spec leaves
// without a public/private hint.
using PrivacyLabels = std::map<DimensionId, PrivacyLabel>;

struct AuditInputs {
  const IntentSpec& spec;
  const Carrier& carrier;
  const PrivacyLabels* oracle_labels = nullptr;
  AuditThresholds thresholds{};
  std::optional<int> ga;  // external judge score; synthesized from structure when unset
};

std::string format_rfc3339(std::chrono::system_clock::time_point tp);
// Accepts "YYYY-MM-DDTHH:MM:SSZ"; throws Schema on anything else.
std::chrono::system_clock::time_point parse_rfc3339(std::string_view text);

/// Throws Inconsistent when carrier and spec disagree on the task or
/// dimensions, MissingScores when `scores` does not cover the flattened
/// dimensions in order.
AuditRecord build_audit_record(const AuditInputs& inputs, const DimensionScores& scores, const Clock& clock);
AuditRecord build_audit_record(const AuditInputs& inputs, const RealizedValues& realized, const Clock& clock,
                               const Matcher& matcher = exact_match);

std::string serialize_audit_record(const AuditRecord& record);
AuditRecord parse_audit_record(std::string_view line, const ParseOptions& options = {});

// Raw text; empty lines skipped; errors carry line numbers.
std::vector<AuditRecord> parse_audit_records(std::string_view jsonl, const ParseOptions& options = {});

enum class ReportFormat { Text, Markdown, Json };

ReportFormat report_format_from_string(std::string_view s);

std::string render_report(std::span<const AuditRecord> records, ReportFormat format);

}  // namespace ist
