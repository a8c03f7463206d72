#include "ist/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ist/error.hpp"
#include "ist/numeric.hpp"

namespace ist {

namespace {

void check_weights(std::span<const double> weights) {
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!std::isfinite(weights[i]) || weights[i] < 0.0) {
      throw Error(ErrorKind::Range, "weight must be finite and >= 0", "index " + std::to_string(i));
    }
  }
}

void check_unit(double v, const DimensionId& id, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(ErrorKind::Range, std::string(what) + " must lie in [0, 1]", id.str());
  }
}

double clamp_unit(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

std::vector<double> DimensionScores::structural() const {
  std::vector<double> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.r);
  return out;
}

std::vector<double> DimensionScores::fidelity() const {
  std::vector<double> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.f);
  return out;
}

double exact_match(const ValueRef& intended, const ValueRef& realized) {
  return intended == realized ? 1.0 : 0.0;
}

double encoding_loss(std::span<const double> weights, const EncodingMask& mask) {
  if (weights.size() != mask.size()) {
    throw Error(ErrorKind::LengthMismatch, "weights and mask differ in length");
  }
  check_weights(weights);
  if (std::fabs(compensated_sum(weights) - 1.0) > 1e-9) {
    throw Error(ErrorKind::Range, "weights must sum to 1");
  }
  CompensatedAccumulator absent;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (mask.bits[i].m == 0) absent.add(weights[i]);
  }
  return clamp_unit(absent.value());
}

Aggregates aggregate(std::span<const double> weights, const DimensionScores& scores) {
  if (weights.size() != scores.size()) {
    throw Error(ErrorKind::LengthMismatch, "weights and scores differ in length");
  }
  check_weights(weights);
  CompensatedAccumulator s;
  CompensatedAccumulator f;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const auto& e = scores.entries[i];
    check_unit(e.r, e.dimension, "r");
    check_unit(e.f, e.dimension, "f");
    s.add(weights[i] * e.r);
    f.add(weights[i] * e.f);
  }
  Aggregates out;
  out.s_icmw = clamp_unit(s.value());
  out.f_icmw = clamp_unit(f.value());
  out.d_drift = 1.0 - out.f_icmw;
  return out;
}

DimensionScores score_output(const IntentSpec& spec, const RealizedValues& realized,
                             const Matcher& matcher) {
  const auto flat = flatten(spec);
  std::set<DimensionId> known;
  for (const auto& d : flat) known.insert(d.id);
  for (const auto& [id, _] : realized) {
    if (!known.count(id)) throw Error(ErrorKind::UnknownDimension, "realized value for an id absent from the spec", id.str());
  }
  DimensionScores scores;
  scores.entries.reserve(flat.size());
  for (const auto& d : flat) {
    auto it = realized.find(d.id);
    if (it == realized.end()) {
      scores.entries.push_back({d.id, 0.0, 0.0});
      continue;
    }
    const double f = matcher(d.intended_value, it->second);
    check_unit(f, d.id, "matcher output");
    scores.entries.push_back({d.id, 1.0, f});
  }
  return scores;
}

int ga_from_structure(double s_icmw) {
  const double scaled = std::round(4.0 * std::clamp(s_icmw, 0.0, 1.0));  // half away from zero
  return std::clamp(1 + static_cast<int>(scaled), 1, kMaxGa);
}

int synthesize_ga(const DimensionScores& scores, std::span<const double> weights) {
  return ga_from_structure(aggregate(weights, scores).s_icmw);
}

bool detect_split_zone(int ga, double f_icmw) {
  return ga == kMaxGa && f_icmw < kSplitZoneFidelity;
}

MetricBundle compute_bundle(std::span<const double> weights, const EncodingMask& mask,
                            const DimensionScores& scores) {
  MetricBundle b;
  b.l_enc = encoding_loss(weights, mask);
  const auto agg = aggregate(weights, scores);
  b.s_icmw = agg.s_icmw;
  b.f_icmw = agg.f_icmw;
  b.d_drift = agg.d_drift;
  b.ga = ga_from_structure(agg.s_icmw);
  b.split_zone = detect_split_zone(b.ga, b.f_icmw);
  return b;
}

}  // namespace ist
