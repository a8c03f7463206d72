#pragma once

// Encoding loss, structural/fidelity aggregates, intent drift, holistic
// score synthesis and split-zone detection.

#include <functional>
#include <span>
#include <vector>

#include "ist/intent_model.hpp"
#include "ist/spec_io.hpp"

namespace ist {

struct DimensionScore {
  DimensionId dimension;
  double r = 0.0;  // structural recovery
  double f = 0.0;  // fidelity recovery

  friend bool operator==(const DimensionScore&, const DimensionScore&) = default;
};

// Aligned to flatten order.
struct DimensionScores {
  std::vector<DimensionScore> entries;

  std::size_t size() const noexcept { return entries.size(); }
  std::vector<double> structural() const;
  std::vector<double> fidelity() const;
};

struct Aggregates {
  double s_icmw = 0.0;
  double f_icmw = 0.0;
  double d_drift = 1.0;
};

struct MetricBundle {
  double l_enc = 0.0;
  double s_icmw = 0.0;
  double f_icmw = 0.0;
  double d_drift = 1.0;
  int ga = 1;
  bool split_zone = false;
};

inline constexpr int kMaxGa = 5;
inline constexpr double kSplitZoneFidelity = 0.8;

// Graded matchers must return a value in [0, 1] with match(v, v) == 1.
using Matcher = std::function<double(const ValueRef& intended, const ValueRef& realized)>;

double exact_match(const ValueRef& intended, const ValueRef& realized);

/// 1 - sum(w_i * m_i), computed as the absent weight mass so that a
/// complete encoding yields exactly 0. Throws LengthMismatch, or Range when
/// the weights do not sum to 1 within 1e-9.
double encoding_loss(std::span<const double> weights, const EncodingMask& mask);

// d_drift is computed as 1 - f_icmw, so d_drift + f_icmw == 1 holds exactly.
Aggregates aggregate(std::span<const double> weights, const DimensionScores& scores);

/// Default structural scorer: r = 1 iff a realized value exists. Fidelity
/// is matcher(intended, realized), 0 for unfilled slots.
DimensionScores score_output(const IntentSpec& spec, const RealizedValues& realized,
                             const Matcher& matcher = exact_match);

// Holistic judge stand-in that only sees structure: 1 + round(4 * s_icmw).
int ga_from_structure(double s_icmw);
int synthesize_ga(const DimensionScores& scores, std::span<const double> weights);

bool detect_split_zone(int ga, double f_icmw);

MetricBundle compute_bundle(std::span<const double> weights, const EncodingMask& mask,
                            const DimensionScores& scores);

}  // namespace ist
