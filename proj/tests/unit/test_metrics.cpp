#include <gtest/gtest.h>

#include <random>

#include "ist/error.hpp"
#include "ist/metrics.hpp"
#include "oracles.hpp"

namespace {

using namespace ist;

std::vector<DimensionId> ids_for(std::size_t n) {
  std::vector<DimensionId> ids;
  for (std::size_t i = 0; i < n; ++i) ids.emplace_back("d" + std::to_string(i));
  return ids;
}

EncodingMask mask_of(std::vector<std::uint8_t> vals) {
  const auto ids = ids_for(vals.size());
  return EncodingMask::from_values(ids, vals);
}

DimensionScores scores_of(const std::vector<double>& r, const std::vector<double>& f) {
  DimensionScores s;
  const auto ids = ids_for(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) s.entries.push_back({ids[i], r[i], f[i]});
  return s;
}

IntentSpec three_dim_spec() {
  IntentSpec s;
  s.task_id = "t";
  s.task_type = "x";
  const char* names[] = {"what", "who", "how"};
  const double w[] = {0.4, 0.3, 0.3};
  for (int i = 0; i < 3; ++i) {
    Dimension d;
    d.id = DimensionId(names[i]);
    d.weight = w[i];
    d.intended_value = ValueRef::token(std::string("v") + names[i]);
    s.dimensions.push_back(d);
  }
  return s;
}

const std::vector<double> kW{0.4, 0.3, 0.3};

TEST(EncodingLoss, Vectors) {
  EXPECT_EQ(encoding_loss(kW, mask_of({1, 1, 1})), 0.0);
  EXPECT_DOUBLE_EQ(encoding_loss(kW, mask_of({1, 0, 1})), 0.3);
  EXPECT_DOUBLE_EQ(encoding_loss(kW, mask_of({0, 0, 0})), 1.0);
}

TEST(EncodingLoss, Errors) {
  try {
    encoding_loss(kW, mask_of({1, 1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::LengthMismatch);
  }
  try {
    encoding_loss(std::vector<double>{0.5, 0.4}, mask_of({1, 1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Range);
  }
}

TEST(EncodingLoss, MatchesRationalOracle) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const auto w = oracle::random_simplex(rng, 1 + rng() % 10, 0.2);
    std::vector<std::uint8_t> m(w.size());
    for (auto& b : m) b = rng() % 2;
    oracle::Rational absent = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!m[i]) absent += oracle::exact(w[i]);
    }
    EXPECT_NEAR(encoding_loss(w, mask_of(m)), oracle::to_double(absent), 1e-15) << trial;
  }
}

TEST(Aggregate, Vectors) {
  auto a = aggregate(kW, scores_of({1, 1, 1}, {1, 1, 1}));
  EXPECT_DOUBLE_EQ(a.s_icmw, 1.0);
  EXPECT_DOUBLE_EQ(a.f_icmw, 1.0);
  EXPECT_EQ(a.d_drift, 0.0);
  const std::vector<double> half{0.5, 0.5};
  a = aggregate(half, scores_of({1, 1}, {1, 0}));
  EXPECT_EQ(a.s_icmw, 1.0);
  EXPECT_EQ(a.f_icmw, 0.5);
  EXPECT_EQ(a.d_drift, 0.5);
  a = aggregate(kW, scores_of({1, 0, 1}, {0, 0, 0}));
  EXPECT_EQ(a.f_icmw, 0.0);
  EXPECT_EQ(a.d_drift, 1.0);
}

TEST(Aggregate, RejectsOutOfRangeScores) {
  EXPECT_THROW(aggregate(kW, scores_of({1, 1, 1.5}, {1, 1, 1})), Error);
  EXPECT_THROW(aggregate(kW, scores_of({1, 1}, {1, 1})), Error);
}

TEST(ScoreOutput, PerDimensionSignatures) {
  const auto spec = three_dim_spec();
  RealizedValues realized{{DimensionId("what"), ValueRef::token("vwhat")},
                          {DimensionId("who"), ValueRef::token("generic")}};
  const auto s = score_output(spec, realized);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s.entries[0].r, 1.0);
  EXPECT_EQ(s.entries[0].f, 1.0);
  EXPECT_EQ(s.entries[1].r, 1.0);  // slot filled with the wrong token
  EXPECT_EQ(s.entries[1].f, 0.0);
  EXPECT_EQ(s.entries[2].r, 0.0);  // slot absent
  EXPECT_EQ(s.entries[2].f, 0.0);
  realized[DimensionId("elsewhere")] = ValueRef::token("x");
  EXPECT_THROW(score_output(spec, realized), Error);
}

TEST(ScoreOutput, GradedMatcher) {
  const auto spec = three_dim_spec();
  RealizedValues realized{{DimensionId("what"), ValueRef::token("close")}};
  const auto s = score_output(spec, realized, [](const ValueRef& a, const ValueRef& b) { return a == b ? 1.0 : 0.5; });
  EXPECT_EQ(s.entries[0].f, 0.5);
  EXPECT_THROW(score_output(spec, realized, [](const ValueRef&, const ValueRef&) { return 2.0; }), Error);
}

TEST(Ga, FromStructure) {
  EXPECT_EQ(ga_from_structure(1.0), 5);
  EXPECT_EQ(ga_from_structure(0.0), 1);
  EXPECT_EQ(ga_from_structure(0.55), 3);
  EXPECT_EQ(ga_from_structure(0.625), 4);  // round half away from zero: 2.5 -> 3
}

TEST(SplitZone, Boundary) {
  EXPECT_TRUE(detect_split_zone(5, 0.79));
  EXPECT_FALSE(detect_split_zone(5, 0.8));
  EXPECT_FALSE(detect_split_zone(4, 0.2));
}

TEST(SplitZone, InvariantBelowThreshold) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 0.8);
  for (int i = 0; i < 1000; ++i) EXPECT_TRUE(detect_split_zone(5, u(rng)));
}

TEST(Bundle, Consistent) {
  const auto b = compute_bundle(kW, mask_of({1, 0, 0}), scores_of({1, 1, 1}, {1, 0, 0}));
  EXPECT_DOUBLE_EQ(b.l_enc, 0.6);
  EXPECT_EQ(b.ga, 5);
  EXPECT_DOUBLE_EQ(b.f_icmw, 0.4);
  EXPECT_EQ(b.d_drift + b.f_icmw, 1.0);
  EXPECT_TRUE(b.split_zone);
}

TEST(Aggregate, PropertyIdentities) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto w = oracle::random_simplex(rng, 1 + rng() % 9, 0.1);
    std::vector<double> r(w.size()), f(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
      r[i] = u(rng) < 0.3 ? 1.0 : u(rng);
      f[i] = r[i] * u(rng);
    }
    const auto a = aggregate(w, scores_of(r, f));
    EXPECT_EQ(a.d_drift + a.f_icmw, 1.0);
    EXPECT_LE(a.f_icmw, a.s_icmw);
    EXPECT_GE(a.f_icmw, 0.0);
    EXPECT_LE(a.s_icmw, 1.0);
  }
}

}  // namespace
