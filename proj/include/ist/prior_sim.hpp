#pragma once

// Synthetic model-prior simulator. Each (task, dimension) has a finite
// alphabet, a user value standing in for the source intent, and a model
// prior mixing a point mass on the user value with a uniform floor:
//
//   prior = lambda * pointmass(user_value) + (1 - lambda) * uniform
//
// lambda = 1 makes the dimension fully recoverable from the prior (public),
// lambda = 0 leaves only the generic default (private).

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ist/intent_model.hpp"
#include "ist/spec_io.hpp"

namespace ist {

enum class RecoveryMode { Argmax, Sample };

std::string_view to_string(RecoveryMode mode);
RecoveryMode recovery_mode_from_string(std::string_view s);

struct DimensionConfig {
  DimensionId id;
  double weight = 0.0;
  std::size_t alphabet_size = 2;
  double lambda = 0.0;
  std::optional<std::size_t> user_value;  // index into the alphabet; drawn when absent
  std::vector<std::string> alphabet;      // token names; "v0".."v{K-1}" when empty
};

struct TaskConfig {
  std::string task_id;
  std::string task_type = "synthetic";
  std::vector<DimensionConfig> dims;
};

struct WorldConfig {
  std::vector<TaskConfig> tasks;
  std::optional<std::uint64_t> seed;
};

struct WorldDimension {
  DimensionId id;
  double weight = 0.0;
  double lambda = 0.0;
  std::vector<std::string> alphabet;
  std::vector<double> prior;
  std::size_t user_value = 0;

  std::size_t alphabet_size() const noexcept { return alphabet.size(); }
};

struct WorldTask {
  std::string task_id;
  std::string task_type;
  std::vector<WorldDimension> dims;

  std::vector<DimensionId> ids() const;
  std::vector<double> weights() const;
  // Spec whose intended values are the user values (flat, no hierarchy).
  IntentSpec spec() const;
};

struct SyntheticWorld {
  std::uint64_t seed = 0;
  std::vector<WorldTask> tasks;

  std::size_t task_index(std::string_view task_id) const;  // throws UnknownTask
  const WorldTask& task(std::string_view task_id) const;
};

enum class Provenance { CopiedFromCarrier, PriorDefault, PriorSample };

std::string_view to_string(Provenance p);

struct RealizedDimension {
  DimensionId id;
  std::size_t token = 0;
  ValueRef value;
  Provenance provenance = Provenance::PriorDefault;
};

struct SimulatedOutput {
  std::vector<RealizedDimension> dims;

  RealizedValues realized_values() const;
};

// Draw index reserved for choosing user values at world construction.
inline constexpr std::uint64_t kUserValueDraw = ~std::uint64_t{0};

WorldConfig parse_world_config(std::string_view text, const ParseOptions& options = {});
std::string serialize_world_config(const WorldConfig& config);

/// Deterministic in (config, seed). Throws BadConfig for K < 2, lambda
/// outside [0, 1], weights not summing to 1 within 1e-6, duplicate ids or
/// user values outside the alphabet.
SyntheticWorld build_world(const WorldConfig& config, std::uint64_t seed);

std::vector<double> mixture_prior(std::size_t alphabet_size, std::size_t user_value, double lambda);

// Lowest index among the maxima.
std::size_t prior_argmax(std::span<const double> prior);

/// Encoded dimensions are copied from the carrier; absent ones are filled
/// from the prior (argmax or a sample keyed by derive_seed(seed, task,
/// dimension, draw)). Every slot is always filled.
SimulatedOutput simulate_output(const SyntheticWorld& world, std::size_t task_index,
                                const EncodingMask& mask, RecoveryMode mode, std::uint64_t seed,
                                std::uint64_t draw = 0);
SimulatedOutput simulate_output(const SyntheticWorld& world, std::string_view task_id,
                                const EncodingMask& mask, RecoveryMode mode, std::uint64_t seed,
                                std::uint64_t draw = 0);

// Closed-form E[f_icmw] under the exact matcher. Sample mode: expectation
// over prior draws for this world, E[f_i | m_i = 0] = prior_i(user value).
// Argmax mode: expectation over world generation with uniformly drawn user
// values, which is 1 for lambda > 0 and 1/K for lambda = 0.
double expected_f_icmw(const SyntheticWorld& world, std::size_t task_index,
                       const EncodingMask& mask, RecoveryMode mode);

}  // namespace ist
