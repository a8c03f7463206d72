#pragma once

// Core domain types for the intent transmission chain: weighted dimension
// trees (the observable intent proxy), carriers, and encoding masks.

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ist {

// Dimension identifier. Stored lowercase; comparisons are therefore
// case-insensitive with respect to the original spelling.
class DimensionId {
 public:
  DimensionId() = default;
  explicit DimensionId(std::string_view raw);

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  friend bool operator==(const DimensionId&, const DimensionId&) = default;
  friend auto operator<=>(const DimensionId&, const DimensionId&) = default;

 private:
  std::string value_;
};

struct ValueRef {
  enum class Kind { Token, Text };

  Kind kind = Kind::Token;
  std::string value;

  static ValueRef token(std::string v) { return {Kind::Token, std::move(v)}; }
  static ValueRef text(std::string v) { return {Kind::Text, std::move(v)}; }

  friend bool operator==(const ValueRef&, const ValueRef&) = default;
};

enum class PrivacyHint { Public, Private, Unknown };

std::string_view to_string(ValueRef::Kind kind);
std::string_view to_string(PrivacyHint hint);

struct Dimension {
  DimensionId id;
  double weight = 0.0;  // relative to the parent (or to the task at top level)
  ValueRef intended_value;
  std::optional<PrivacyHint> privacy_hint;
  std::vector<Dimension> children;

  bool is_leaf() const noexcept { return children.empty(); }
  friend bool operator==(const Dimension&, const Dimension&) = default;
};

// Observable intent proxy: a task-typed weighted dimension set. In
// simulation the intended values also stand in for the latent source intent.
struct IntentSpec {
  std::string task_id;
  std::string task_type;
  std::vector<Dimension> dimensions;

  friend bool operator==(const IntentSpec&, const IntentSpec&) = default;
};

struct Carrier {
  std::string task_id;
  std::optional<std::string> text;
  std::vector<DimensionId> encoded_dimensions;

  friend bool operator==(const Carrier&, const Carrier&) = default;
};

struct MaskBit {
  DimensionId dimension;
  std::uint8_t m = 0;

  friend bool operator==(const MaskBit&, const MaskBit&) = default;
};

struct EncodingMask {
  std::vector<MaskBit> bits;

  std::size_t size() const noexcept { return bits.size(); }
  std::vector<std::uint8_t> values() const;
  std::vector<DimensionId> ids() const;

  static EncodingMask from_values(std::span<const DimensionId> ids,
                                  std::span<const std::uint8_t> values);
  static EncodingMask all(std::span<const DimensionId> ids, std::uint8_t m);

  friend bool operator==(const EncodingMask&, const EncodingMask&) = default;
};

// A leaf of the flattened tree. `weight` is the product of weights along
// the path from the root.
struct FlatDimension {
  DimensionId id;
  double weight = 0.0;
  ValueRef intended_value;
  std::optional<PrivacyHint> privacy_hint;  // nearest explicit hint on the path
};

enum class ViolationRule {
  EmptySpec,
  DuplicateId,
  NegativeWeight,
  WeightRange,
  TopWeightSum,
  ChildWeightSum,
};

std::string_view to_string(ViolationRule rule);

struct Violation {
  ViolationRule rule;
  std::string dimension;  // empty for spec-level rules
  std::string message;
};

inline constexpr double kTopWeightTolerance = 1e-6;
inline constexpr double kChildWeightTolerance = 1e-9;

/// Divides each entry by the total. Throws EmptyWeights, NegativeWeight (with
/// the offending index; NaN and infinities count as negative) or ZeroMass.
std::vector<double> normalize_weights(std::span<const double> raw);

std::vector<Violation> validate_spec(const IntentSpec& spec);

// Leaves in depth-first declaration order. Throws InvalidSpec when the spec
// has violations.
std::vector<FlatDimension> flatten(const IntentSpec& spec);

std::vector<DimensionId> flat_ids(const IntentSpec& spec);
std::vector<double> flat_weights(const IntentSpec& spec);

IntentSpec refine_dimension(const IntentSpec& spec, const DimensionId& target,
                            std::vector<Dimension> sub_dims);

// Looks up a dimension anywhere in the tree.
const Dimension* find_dimension(const IntentSpec& spec, const DimensionId& id);

}  // namespace ist
