#pragma once

// Brute-force information-theoretic oracle over small discrete worlds:
// entropy, mutual information, decoders, data-processing checks, Bayes
// accuracy and the operational public/private classification.
//
// All quantities are exact enumerations over dense tables; bits throughout.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ist/intent_model.hpp"
#include "ist/prior_sim.hpp"

namespace ist {

inline constexpr std::size_t kMaxJointCells = 1'000'000;
inline constexpr double kInfoEpsilon = 1e-9;

struct Variable {
  std::string name;
  std::size_t cardinality = 0;
};

// Dense joint distribution, row-major with the last variable fastest.
class DiscreteJoint {
 public:
  DiscreteJoint(std::vector<Variable> variables, std::vector<double> table);

  const std::vector<Variable>& variables() const noexcept { return variables_; }
  std::span<const double> table() const noexcept { return table_; }
  std::size_t cell_count() const noexcept { return table_.size(); }

  std::size_t index_of(std::string_view name) const;  // throws UnknownVariable
  std::size_t cardinality(std::string_view name) const;

  // Marginal over the named variables, laid out row-major in the given
  // order. Repeated names are collapsed to their first occurrence.
  std::vector<double> marginal(std::span<const std::string> names) const;

 private:
  std::vector<Variable> variables_;
  std::vector<double> table_;
};

// Decoder g: each evidence cell maps to a distribution over the output
// alphabet. Deterministic decoders have point-mass rows.
struct Decoder {
  std::vector<std::string> evidence;
  std::string output_name = "g";
  std::size_t output_size = 0;
  std::vector<double> rows;  // rows[e * output_size + g]

  std::size_t evidence_cells() const noexcept { return output_size == 0 ? 0 : rows.size() / output_size; }
};

double entropy(std::span<const double> dist);
double joint_entropy(const DiscreteJoint& joint, std::span<const std::string> names);

// I(x; y) = H(x) + H(y) - H(x, y); tiny negative rounding is clamped to 0.
double mutual_information(const DiscreteJoint& joint, std::span<const std::string> x,
                          std::span<const std::string> y);
double mutual_information(const DiscreteJoint& joint, std::string_view x, std::string_view y);

// Appends the decoder's output variable. The new variable depends on the
// rest of the joint only through the evidence, so the chain
// v -> evidence -> g is Markov by construction.
DiscreteJoint apply_decoder(const DiscreteJoint& joint, const Decoder& decoder);

Decoder constant_decoder(const DiscreteJoint& joint, std::vector<std::string> evidence,
                         std::size_t output_size, std::size_t value, std::string output_name = "g");
Decoder identity_decoder(const DiscreteJoint& joint, std::string evidence, std::string output_name = "g");
Decoder random_deterministic_decoder(const DiscreteJoint& joint, std::vector<std::string> evidence,
                                     std::size_t output_size, std::uint64_t seed,
                                     std::string output_name = "g");
Decoder random_stochastic_decoder(const DiscreteJoint& joint, std::vector<std::string> evidence,
                                  std::size_t output_size, std::uint64_t seed,
                                  std::string output_name = "g");
// MAP estimate of `target` from the evidence; ties go to the lowest value.
Decoder bayes_decoder(const DiscreteJoint& joint, std::string_view target,
                      std::vector<std::string> evidence, std::string output_name = "g");

struct DpiReport {
  double i_v_evidence = 0.0;
  double i_v_g = 0.0;
  bool holds = false;
  double slack = 0.0;
};

DpiReport verify_dpi(const DiscreteJoint& joint, const Decoder& decoder, std::string_view target);

// sum over evidence cells of max_v p(v, e): the best achievable accuracy.
double bayes_accuracy(const DiscreteJoint& joint, std::string_view target,
                      std::span<const std::string> evidence);
// max_v p(v): accuracy of guessing without evidence.
double chance_accuracy(const DiscreteJoint& joint, std::string_view target);
// P(g = v) on a joint that already contains the decoder output.
double decoder_accuracy(const DiscreteJoint& joint, std::string_view target, std::string_view output);

enum class PrivacyLabel { Public, Private };

std::string_view to_string(PrivacyLabel label);

struct PrivacyThresholds {
  double theta_pub = 0.9;
  double chance_margin = 0.1;  // public also needs accuracy >= chance + margin
};

struct PrivacyVerdict {
  DimensionId dimension;
  double mi_bits = 0.0;
  double bayes_accuracy = 0.0;
  double chance = 1.0;
  PrivacyLabel label = PrivacyLabel::Private;
};

// Joint of a uniformly drawn user value v and the token the prior supplies
// for it when the dimension is absent from the carrier: p(v, e) = prior_v(e) / K.
// Variables are named "v:<id>" and "e:<id>".
DiscreteJoint prior_evidence_joint(const WorldDimension& dim);

// Joint of v_k and the full carrier-only information state: one evidence
// variable "c:<id>" per task dimension, where c_k copies v_k when encoded
// and is the prior's token otherwise. Throws WorldTooLarge past the cap.
DiscreteJoint carrier_state_joint(const SyntheticWorld& world, std::size_t task_index,
                                  std::size_t dim_index, const EncodingMask& mask);

PrivacyVerdict classify_privacy(const SyntheticWorld& world, std::size_t task_index,
                                const DimensionId& dimension, const PrivacyThresholds& thresholds = {});

// Lambda at which the verdict flips to public for alphabet size K.
double public_threshold_lambda(std::size_t alphabet_size, const PrivacyThresholds& thresholds = {});

struct DecoderCheck {
  std::string family;
  double i_v_g = 0.0;
  double accuracy = 0.0;
  DpiReport dpi;
};

struct TiilReport {
  DimensionId dimension;
  PrivacyVerdict verdict;
  bool full_carrier_state = true;  // false when the cap forced the dimension-only joint
  double i_v_evidence = 0.0;
  double bayes_accuracy = 0.0;
  double chance = 1.0;
  std::vector<DecoderCheck> decoders;
  bool dpi_holds = true;
  // Bayes accuracy at chance: no decoder can beat generic substitution.
  bool tiil_regime = false;
};

// Carrier with dimension k absent and every other dimension encoded.
TiilReport check_tiil(const SyntheticWorld& world, std::size_t task_index, std::size_t dim_index,
                      std::uint64_t seed, const PrivacyThresholds& thresholds = {});

}  // namespace ist
