#include "ist/intent_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "ist/error.hpp"
#include "ist/numeric.hpp"

namespace ist {

DimensionId::DimensionId(std::string_view raw) {
  if (raw.empty()) throw Error(ErrorKind::InvalidId, "dimension id must be non-empty");
  value_.reserve(raw.size());
  for (char c : raw) value_.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
}

std::string_view to_string(ValueRef::Kind kind) {
  return kind == ValueRef::Kind::Token ? "token" : "text";
}

std::string_view to_string(PrivacyHint hint) {
  switch (hint) {
    case PrivacyHint::Public: return "public";
    case PrivacyHint::Private: return "private";
    case PrivacyHint::Unknown: return "unknown";
  }
  return "unknown";
}

std::string_view to_string(ViolationRule rule) {
  switch (rule) {
    case ViolationRule::EmptySpec: return "EmptySpec";
    case ViolationRule::DuplicateId: return "DuplicateId";
    case ViolationRule::NegativeWeight: return "NegativeWeight";
    case ViolationRule::WeightRange: return "WeightRange";
    case ViolationRule::TopWeightSum: return "TopWeightSum";
    case ViolationRule::ChildWeightSum: return "ChildWeightSum";
  }
  return "Unknown";
}

std::vector<std::uint8_t> EncodingMask::values() const {
  std::vector<std::uint8_t> out;
  out.reserve(bits.size());
  for (const auto& b : bits) out.push_back(b.m);
  return out;
}

std::vector<DimensionId> EncodingMask::ids() const {
  std::vector<DimensionId> out;
  out.reserve(bits.size());
  for (const auto& b : bits) out.push_back(b.dimension);
  return out;
}

EncodingMask EncodingMask::from_values(std::span<const DimensionId> ids,
                                       std::span<const std::uint8_t> values) {
  if (ids.size() != values.size()) {
    throw Error(ErrorKind::LengthMismatch, "mask ids and values differ in length");
  }
  EncodingMask mask;
  mask.bits.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (values[i] > 1) throw Error(ErrorKind::Range, "mask bit must be 0 or 1", ids[i].str());
    mask.bits.push_back({ids[i], values[i]});
  }
  return mask;
}

EncodingMask EncodingMask::all(std::span<const DimensionId> ids, std::uint8_t m) {
  std::vector<std::uint8_t> values(ids.size(), m);
  return from_values(ids, values);
}

std::vector<double> normalize_weights(std::span<const double> raw) {
  if (raw.empty()) throw Error(ErrorKind::EmptyWeights, "weight list is empty");
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!std::isfinite(raw[i]) || raw[i] < 0.0) {
      throw Error(ErrorKind::NegativeWeight, "weight must be a finite nonnegative number",
                  "index " + std::to_string(i))
          .with_index(i);
    }
  }
  const double total = compensated_sum(raw);
  if (total <= 0.0) throw Error(ErrorKind::ZeroMass, "all weights are zero");
  std::vector<double> out;
  out.reserve(raw.size());
  for (double w : raw) out.push_back(w / total);
  return out;
}

namespace {

void validate_level(const std::vector<Dimension>& dims, std::set<DimensionId>& seen,
                    std::vector<Violation>& out) {
  for (const auto& d : dims) {
    if (!seen.insert(d.id).second) {
      out.push_back({ViolationRule::DuplicateId, d.id.str(), "id declared more than once"});
    }
    if (std::isnan(d.weight) || d.weight < 0.0) {
      out.push_back({ViolationRule::NegativeWeight, d.id.str(), "weight must be >= 0"});
    } else if (d.weight > 1.0 || !std::isfinite(d.weight)) {
      out.push_back({ViolationRule::WeightRange, d.id.str(), "weight must be <= 1"});
    }
    if (!d.children.empty()) {
      CompensatedAccumulator acc;
      for (const auto& c : d.children) acc.add(c.weight);
      if (!(std::fabs(acc.value() - 1.0) <= kChildWeightTolerance)) {
        out.push_back({ViolationRule::ChildWeightSum, d.id.str(),
                       "child weights sum to " + std::to_string(acc.value()) + ", expected 1"});
      }
      validate_level(d.children, seen, out);
    }
  }
}

void flatten_into(const std::vector<Dimension>& dims, double parent_weight,
                  std::optional<PrivacyHint> inherited, std::vector<FlatDimension>& out) {
  for (const auto& d : dims) {
    const double w = parent_weight * d.weight;
    auto hint = d.privacy_hint ? d.privacy_hint : inherited;
    if (d.is_leaf()) {
      out.push_back({d.id, w, d.intended_value, hint});
    } else {
      flatten_into(d.children, w, hint, out);
    }
  }
}

Dimension* find_in(std::vector<Dimension>& dims, const DimensionId& id) {
  for (auto& d : dims) {
    if (d.id == id) return &d;
    if (auto* hit = find_in(d.children, id)) return hit;
  }
  return nullptr;
}

const Dimension* find_in(const std::vector<Dimension>& dims, const DimensionId& id) {
  for (const auto& d : dims) {
    if (d.id == id) return &d;
    if (const auto* hit = find_in(d.children, id)) return hit;
  }
  return nullptr;
}

}  // namespace

std::vector<Violation> validate_spec(const IntentSpec& spec) {
  std::vector<Violation> out;
  if (spec.dimensions.empty()) {
    out.push_back({ViolationRule::EmptySpec, {}, "spec declares no dimensions"});
    return out;
  }
  std::set<DimensionId> seen;
  validate_level(spec.dimensions, seen, out);
  CompensatedAccumulator acc;
  for (const auto& d : spec.dimensions) acc.add(d.weight);
  if (!(std::fabs(acc.value() - 1.0) <= kTopWeightTolerance)) {
    out.push_back({ViolationRule::TopWeightSum, {},
                   "top-level weights sum to " + std::to_string(acc.value()) + ", expected 1"});
  }
  return out;
}

std::vector<FlatDimension> flatten(const IntentSpec& spec) {
  const auto violations = validate_spec(spec);
  if (!violations.empty()) {
    const auto& v = violations.front();
    throw Error(ErrorKind::InvalidSpec,
                std::string(to_string(v.rule)) + ": " + v.message, v.dimension);
  }
  std::vector<FlatDimension> out;
  flatten_into(spec.dimensions, 1.0, std::nullopt, out);
  return out;
}

std::vector<DimensionId> flat_ids(const IntentSpec& spec) {
  std::vector<DimensionId> out;
  for (auto& f : flatten(spec)) out.push_back(std::move(f.id));
  return out;
}

std::vector<double> flat_weights(const IntentSpec& spec) {
  std::vector<double> out;
  for (const auto& f : flatten(spec)) out.push_back(f.weight);
  return out;
}

const Dimension* find_dimension(const IntentSpec& spec, const DimensionId& id) {
  return find_in(spec.dimensions, id);
}

IntentSpec refine_dimension(const IntentSpec& spec, const DimensionId& target,
                            std::vector<Dimension> sub_dims) {
  IntentSpec out = spec;
  Dimension* node = find_in(out.dimensions, target);
  if (node == nullptr) throw Error(ErrorKind::UnknownDimension, "no such dimension", target.str());
  if (!node->is_leaf()) throw Error(ErrorKind::NotALeaf, "dimension already has children", target.str());
  if (sub_dims.empty()) throw Error(ErrorKind::ChildWeightSum, "refinement needs at least one child", target.str());
  CompensatedAccumulator acc;
  for (const auto& c : sub_dims) acc.add(c.weight);
  if (!(std::fabs(acc.value() - 1.0) <= kChildWeightTolerance)) {
    throw Error(ErrorKind::ChildWeightSum,
                "sub-dimension weights sum to " + std::to_string(acc.value()), target.str());
  }
  node->children = std::move(sub_dims);
  const auto violations = validate_spec(out);
  if (!violations.empty()) {
    const auto& v = violations.front();
    throw Error(ErrorKind::InvalidSpec, std::string(to_string(v.rule)) + ": " + v.message,
                v.dimension);
  }
  return out;
}

}  // namespace ist
