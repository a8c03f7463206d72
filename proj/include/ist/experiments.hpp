#pragma once

// Ablation and weight-perturbation harnesses over synthetic worlds.
//
// Every stochastic draw is keyed by derive_seed(), and work units write
// into pre-assigned slots, so results do not depend on the thread count.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ist/prior_sim.hpp"
#include "ist/spec_io.hpp"

namespace ist {

inline constexpr std::string_view kFullCondition = "FULL";

std::string ablation_condition(const DimensionId& id);  // "ABL_<id>"

struct AblationPlan {
  std::vector<std::string> task_ids;  // empty: every task in the world
  std::size_t replicates = 1;
  RecoveryMode mode = RecoveryMode::Argmax;
  std::uint64_t seed = 0;
  std::string model_tag = "prior_sim";
};

// FULL plus one single-dimension ablation per dimension.
std::vector<std::pair<std::string, EncodingMask>> ablation_conditions(const WorldTask& task);

/// One record per (task, condition, replicate), ordered that way.
/// Replicate r uses draw index r in every condition (common random numbers).
std::vector<OutputRecord> run_ablation(const SyntheticWorld& world, const AblationPlan& plan,
                                       std::size_t threads = 1);

// Scores a simulated output against the task's user values.
OutputRecord score_simulated(const WorldTask& task, const EncodingMask& mask,
                             const SimulatedOutput& output, std::string condition,
                             std::string model_tag);

/// drop_i = mean f_icmw(FULL) - mean f_icmw(ABL_i), floored at 0, then
/// normalized. Records must cover one task. Throws MissingCondition,
/// ZeroSignal (no drop anywhere) or Inconsistent (mixed tasks).
std::vector<double> estimate_weights_by_ablation(std::span<const OutputRecord> records);

std::vector<double> weights_from_drops(std::span<const double> drops);

// Same estimator fed with expected_f_icmw instead of simulated records.
std::vector<double> analytic_weight_estimate(const SyntheticWorld& world, std::size_t task_index,
                                             RecoveryMode mode);

/// m = 1 on the `budget` largest weights; ties go to the earlier dimension.
EncodingMask encode_with_budget(std::span<const double> weights, std::span<const DimensionId> ids,
                                std::size_t budget);

std::size_t default_budget(std::size_t dimension_count);  // ceil(n / 2)

struct PerturbationSpec {
  enum class Kind { Identity, Jitter, AdjacentSwap, FullInversion };

  Kind kind = Kind::Identity;
  double epsilon = 0.0;   // jitter half-width
  std::size_t swaps = 0;  // adjacent_swap pair count

  std::string label() const;
  std::string_view severity() const;
  // Identity and jitter are the order-preserving family.
  bool order_preserving_kind() const noexcept { return kind == Kind::Identity || kind == Kind::Jitter; }

  static PerturbationSpec identity() { return {}; }
  static PerturbationSpec jitter(double eps) { return {Kind::Jitter, eps, 0}; }
  static PerturbationSpec adjacent_swap(std::size_t count) { return {Kind::AdjacentSwap, 0.0, count}; }
  static PerturbationSpec full_inversion() { return {Kind::FullInversion, 0.0, 0}; }
};

/// identity: unchanged. jitter(eps): w_i * U[1-eps, 1+eps], renormalized
/// (strict orderings survive whenever adjacent ratios exceed
/// (1+eps)/(1-eps)). adjacent_swap(c): swap values of rank pairs (0,1),
/// (2,3), ... c times. full_inversion: the rank-r dimension takes the
/// value of rank n-1-r. Throws BadPerturbation.
std::vector<double> perturb_weights(std::span<const double> weights, const PerturbationSpec& spec,
                                    std::uint64_t seed);

// Descending-weight ranking, ties by index.
std::vector<std::size_t> weight_ranking(std::span<const double> weights);

struct WorldVariant {
  std::string model_tag;
  SyntheticWorld world;
};

struct CellSummary {
  std::string task_id;
  std::string model_tag;
  std::string perturbation;
  double was = 0.0;
  double delta_vs_baseline = 0.0;
  bool ranking_preserved = true;
  bool top_set_preserved = true;
};

struct PerturbationOptions {
  std::optional<std::size_t> budget;  // default_budget(n) per task when unset
  RecoveryMode mode = RecoveryMode::Argmax;
  std::size_t replicates = 1;
  std::uint64_t seed = 0;
};

struct PerturbationReport {
  std::vector<CellSummary> cells;      // sorted by (model_tag, task_id, perturbation order)
  std::vector<OutputRecord> records;   // one per (cell, perturbation, replicate)
  std::size_t cell_count = 0;
  std::size_t plateau_checks = 0;      // order-preserving runs that kept the top-B set
  std::size_t plateau_hits = 0;        // ... of which delta WAS == 0 exactly
  std::size_t cliff_onsets = 0;        // order-preserving runs that crossed the top-B boundary
  std::size_t inversion_cells = 0;
  std::size_t inversion_drops = 0;     // cells with full-inversion WAS < baseline
  std::optional<double> plateau_rate;
  std::optional<double> cliff_rate;
  std::optional<double> mean_inversion_drop;
};

/// WAS = f_icmw under the true weights when the carrier was budget-encoded
/// under the perturbed weights. Baseline = WAS under identity.
PerturbationReport run_weight_perturbation(std::span<const WorldVariant> worlds,
                                           std::span<const PerturbationSpec> perturbations,
                                           const PerturbationOptions& options, std::size_t threads = 1);

// 3 prior variants x 10 tasks. Private (lambda = 0) dimensions hold the top
// weights, user values avoid the prior's generic default, and weights are
// geometric with ratio 1.6 so jitter up to 0.2 keeps the ranking.
std::vector<WorldVariant> default_perturbation_grid(std::uint64_t seed);
std::vector<PerturbationSpec> default_perturbations();

std::string perturbation_summary_json(const PerturbationReport& report);

// Experiment configuration shared by the ablate and perturb commands.
struct ExperimentConfig {
  std::optional<WorldConfig> world;  // unset: the default grid
  std::string model_tag = "prior_sim";
  std::optional<std::size_t> budget;
  std::vector<PerturbationSpec> perturbations;  // empty: defaults
  std::optional<std::size_t> replicates;        // default 50 (sample) / 1 (argmax)
  RecoveryMode mode = RecoveryMode::Argmax;
  std::uint64_t seed = 0;
  std::vector<std::string> tasks;
};

// world_path entries resolve against base_dir.
ExperimentConfig parse_experiment_config(std::string_view text, const std::filesystem::path& base_dir,
                                         const ParseOptions& options = {});

std::size_t effective_replicates(const ExperimentConfig& config);

struct AblationSummary {
  struct TaskSummary {
    std::string task_id;
    std::vector<std::pair<std::string, double>> mean_f_icmw;  // per condition, plan order
    double split_zone_rate = 0.0;
    std::optional<std::vector<double>> inferred_weights;       // unset on ZeroSignal
    std::vector<double> true_weights;
  };
  std::vector<TaskSummary> tasks;
};

AblationSummary summarize_ablation(const SyntheticWorld& world, std::span<const OutputRecord> records);
std::string ablation_summary_json(const AblationSummary& summary);

// Runs fn(i) for i in [0, n) on up to `threads` workers; rethrows the first
// failure.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace ist
