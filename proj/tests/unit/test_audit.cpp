#include <gtest/gtest.h>

#include "ist/audit.hpp"
#include "ist/demo.hpp"
#include "ist/error.hpp"

namespace {

using namespace ist;

const Clock kFixed = [] { return parse_rfc3339("2026-03-01T12:00:00Z"); };

IntentSpec spec_with_hints(std::vector<std::optional<PrivacyHint>> hints) {
  IntentSpec s;
  s.task_id = "t";
  s.task_type = "x";
  const double w = 1.0 / static_cast<double>(hints.size());
  for (std::size_t i = 0; i < hints.size(); ++i) {
    Dimension d;
    d.id = DimensionId("d" + std::to_string(i));
    d.weight = w;
    d.intended_value = ValueRef::token("u" + std::to_string(i));
    d.privacy_hint = hints[i];
    s.dimensions.push_back(d);
  }
  return s;
}

RealizedValues perfect(const IntentSpec& s) {
  RealizedValues r;
  for (const auto& d : s.dimensions) r[d.id] = d.intended_value;
  return r;
}

TEST(Rfc3339, RoundTrip) {
  EXPECT_EQ(format_rfc3339(parse_rfc3339("2026-03-01T12:00:00Z")), "2026-03-01T12:00:00Z");
  EXPECT_THROW(parse_rfc3339("2026-03-01 12:00:00"), Error);
  EXPECT_THROW(parse_rfc3339("2026-13-01T12:00:00Z"), Error);
}

TEST(AuditRecord, CompleteEncodingPerfectOutput) {
  const auto spec = spec_with_hints({PrivacyHint::Private, PrivacyHint::Public});
  const Carrier carrier{"t", std::nullopt, flat_ids(spec)};
  const auto rec = build_audit_record({spec, carrier}, perfect(spec), kFixed);
  EXPECT_TRUE(rec.absent_dims.empty());
  EXPECT_TRUE(rec.private_at_risk.empty());
  EXPECT_EQ(rec.d_drift, 0.0);
  EXPECT_EQ(rec.l_enc, 0.0);
  EXPECT_FALSE(rec.split_zone);
  EXPECT_EQ(rec.ga, 5);
  EXPECT_EQ(rec.timestamp, "2026-03-01T12:00:00Z");
  EXPECT_EQ(rec.privacy_source, PrivacySource::Hint);
}

TEST(AuditRecord, DemoScenario) {
  const auto spec = demo::spec();
  const auto carrier = demo::carrier();
  const auto rec = build_audit_record({spec, carrier}, demo::simulated_output().realized_values, kFixed);
  EXPECT_EQ(rec.encoded_dims, std::vector<DimensionId>{DimensionId("what")});
  EXPECT_EQ(rec.private_at_risk.size(), 4u);
  EXPECT_EQ(rec.structurally_recovered.size(), 5u);
  EXPECT_EQ(rec.fidelity_preserved, std::vector<DimensionId>{DimensionId("what")});
  EXPECT_EQ(rec.ga, 5);
  EXPECT_DOUBLE_EQ(rec.f_icmw, 0.6);
  EXPECT_TRUE(rec.split_zone);
}

TEST(AuditRecord, UnlabeledNeverGuesses) {
  const auto spec = spec_with_hints({std::nullopt, std::nullopt});
  const Carrier carrier{"t", std::nullopt, {DimensionId("d0")}};
  const auto rec = build_audit_record({spec, carrier}, perfect(spec), kFixed);
  EXPECT_EQ(rec.absent_dims.size(), 1u);
  EXPECT_TRUE(rec.private_at_risk.empty());
  EXPECT_EQ(rec.privacy_source, PrivacySource::Unlabeled);
}

TEST(AuditRecord, OracleLabelsFillGaps) {
  const auto spec = spec_with_hints({std::nullopt, std::nullopt});
  const Carrier carrier{"t", std::nullopt, {DimensionId("d0")}};
  PrivacyLabels labels{{DimensionId("d0"), PrivacyLabel::Public}, {DimensionId("d1"), PrivacyLabel::Private}};
  const auto rec = build_audit_record({spec, carrier, &labels}, perfect(spec), kFixed);
  EXPECT_EQ(rec.private_at_risk, std::vector<DimensionId>{DimensionId("d1")});
  EXPECT_EQ(rec.privacy_source, PrivacySource::Oracle);
}

TEST(AuditRecord, Inconsistencies) {
  const auto spec = spec_with_hints({PrivacyHint::Private, PrivacyHint::Public});
  const Carrier other{"other", std::nullopt, {}};
  EXPECT_THROW(build_audit_record({spec, other}, perfect(spec), kFixed), Error);
  const Carrier carrier{"t", std::nullopt, {}};
  DimensionScores short_scores;
  short_scores.entries.push_back({DimensionId("d0"), 1, 1});
  try {
    build_audit_record({spec, carrier}, short_scores, kFixed);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingScores);
  }
}

TEST(AuditRecord, SerializationRoundTrip) {
  const auto spec = demo::spec();
  const auto rec = build_audit_record({spec, demo::carrier()}, demo::simulated_output().realized_values, kFixed);
  const auto line = serialize_audit_record(rec);
  EXPECT_EQ(parse_audit_record(line), rec);
  EXPECT_EQ(line.find("{\"task_id\""), 0u);
  auto bad = line;
  bad.replace(bad.find("\"split_zone\":true"), 17, "\"split_zone\":false");
  EXPECT_THROW(parse_audit_record(bad), Error);
}

TEST(Report, EmptyBatch) {
  const auto text = render_report({}, ReportFormat::Text);
  EXPECT_NE(text.find("n/a"), std::string::npos);
  EXPECT_NE(render_report({}, ReportFormat::Json).find("null"), std::string::npos);
}

TEST(Report, FlagsSplitZone) {
  const auto rec = build_audit_record({demo::spec(), demo::carrier()}, demo::simulated_output().realized_values, kFixed);
  const std::vector<AuditRecord> one{rec};
  for (auto fmt : {ReportFormat::Text, ReportFormat::Markdown}) {
    const auto text = render_report(one, fmt);
    EXPECT_NE(text.find("SPLIT ZONE"), std::string::npos);
    for (const char* id : {"who", "where", "how_to", "how_feel"}) EXPECT_NE(text.find(id), std::string::npos);
  }
}

TEST(Report, SplitRateCounts) {
  const auto flagged = build_audit_record({demo::spec(), demo::carrier()}, demo::simulated_output().realized_values, kFixed);
  const auto spec = spec_with_hints({PrivacyHint::Private, PrivacyHint::Public});
  const Carrier carrier{"t", std::nullopt, flat_ids(spec)};
  const auto clean = build_audit_record({spec, carrier}, perfect(spec), kFixed);
  const std::vector<AuditRecord> batch{flagged, clean, clean, flagged, clean};
  const auto json = render_report(batch, ReportFormat::Json);
  EXPECT_NE(json.find("\"split_zone_rate\":0.40000000000000002"), std::string::npos) << json;
}

}  // namespace
