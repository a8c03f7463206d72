#include "ist/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include "io_json.hpp"
#include "ist/error.hpp"
#include "ist/metrics.hpp"
#include "ist/numeric.hpp"

namespace ist {

using detail::child_path;
using detail::index_path;
using detail::Json;
using detail::SchemaContext;

namespace {

// Mean that does not depend on record order.
double order_free_mean(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  return compensated_sum(values) / static_cast<double>(values.size());
}

const std::vector<std::string>& fivew3h_ids() {
  static const std::vector<std::string> ids = {"what", "why", "who", "when", "where", "how_to", "how_much", "how_feel"};
  return ids;
}

Json optional_number(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(n, 1));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = n;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

std::string ablation_condition(const DimensionId& id) { return "ABL_" + id.str(); }

std::vector<std::pair<std::string, EncodingMask>> ablation_conditions(const WorldTask& task) {
  const auto ids = task.ids();
  std::vector<std::pair<std::string, EncodingMask>> out;
  out.emplace_back(std::string(kFullCondition), EncodingMask::all(ids, 1));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto mask = EncodingMask::all(ids, 1);
    mask.bits[i].m = 0;
    out.emplace_back(ablation_condition(ids[i]), std::move(mask));
  }
  return out;
}

OutputRecord score_simulated(const WorldTask& task, const EncodingMask& mask,
                             const SimulatedOutput& output, std::string condition,
                             std::string model_tag) {
  const auto weights = task.weights();
  const auto realized = output.realized_values();
  const auto scores = score_output(task.spec(), realized);
  const auto agg = aggregate(weights, scores);
  OutputRecord r;
  r.task_id = task.task_id;
  r.condition = std::move(condition);
  r.model_tag = std::move(model_tag);
  r.mask = mask;
  r.realized_values = realized;
  r.ga = ga_from_structure(agg.s_icmw);
  r.s_icmw = agg.s_icmw;
  r.f_icmw = agg.f_icmw;
  return r;
}

std::vector<OutputRecord> run_ablation(const SyntheticWorld& world, const AblationPlan& plan,
                                       std::size_t threads) {
  if (plan.replicates == 0) throw Error(ErrorKind::BadConfig, "replicates must be >= 1");
  std::vector<std::size_t> task_indices;
  if (plan.task_ids.empty()) {
    task_indices.resize(world.tasks.size());
    std::iota(task_indices.begin(), task_indices.end(), 0);
  } else {
    for (const auto& id : plan.task_ids) task_indices.push_back(world.task_index(id));
  }

  struct Unit {
    std::size_t task;
    std::size_t condition;
    std::size_t replicate;
  };
  std::vector<std::vector<std::pair<std::string, EncodingMask>>> conditions;
  std::vector<Unit> units;
  for (std::size_t t = 0; t < task_indices.size(); ++t) {
    conditions.push_back(ablation_conditions(world.tasks[task_indices[t]]));
    for (std::size_t c = 0; c < conditions.back().size(); ++c) {
      for (std::size_t r = 0; r < plan.replicates; ++r) units.push_back({t, c, r});
    }
  }

  std::vector<OutputRecord> records(units.size());
  parallel_for(units.size(), threads, [&](std::size_t i) {
    const auto& u = units[i];
    const std::size_t task_index = task_indices[u.task];
    const auto& [label, mask] = conditions[u.task][u.condition];
    const auto out = simulate_output(world, task_index, mask, plan.mode, plan.seed, u.replicate);
    records[i] = score_simulated(world.tasks[task_index], mask, out, label, plan.model_tag);
  });
  return records;
}

std::vector<double> weights_from_drops(std::span<const double> drops) {
  std::vector<double> floored;
  floored.reserve(drops.size());
  for (double d : drops) floored.push_back(std::max(0.0, d));
  if (floored.empty() || compensated_sum(floored) <= 0.0) {
    throw Error(ErrorKind::ZeroSignal, "no ablation lowered fidelity; weights are unidentifiable by ablation");
  }
  return normalize_weights(floored);
}

std::vector<double> estimate_weights_by_ablation(std::span<const OutputRecord> records) {
  if (records.empty()) throw Error(ErrorKind::MissingCondition, "no records", std::string(kFullCondition));
  const auto& task_id = records.front().task_id;
  std::map<std::string, std::vector<double>> by_condition;
  const OutputRecord* full = nullptr;
  for (const auto& r : records) {
    if (r.task_id != task_id) throw Error(ErrorKind::Inconsistent, "records span several tasks", r.task_id);
    by_condition[r.condition].push_back(r.f_icmw);
    if (r.condition == kFullCondition && full == nullptr) full = &r;
  }
  if (full == nullptr) throw Error(ErrorKind::MissingCondition, "no FULL records", std::string(kFullCondition));
  const double full_mean = order_free_mean(by_condition[std::string(kFullCondition)]);
  std::vector<double> drops;
  for (const auto& bit : full->mask.bits) {
    const auto label = ablation_condition(bit.dimension);
    auto it = by_condition.find(label);
    if (it == by_condition.end()) throw Error(ErrorKind::MissingCondition, "missing ablation condition", label);
    drops.push_back(full_mean - order_free_mean(it->second));
  }
  return weights_from_drops(drops);
}

std::vector<double> analytic_weight_estimate(const SyntheticWorld& world, std::size_t task_index,
                                             RecoveryMode mode) {
  if (task_index >= world.tasks.size()) throw Error(ErrorKind::UnknownTask, "task index out of range");
  const auto conditions = ablation_conditions(world.tasks[task_index]);
  const double full = expected_f_icmw(world, task_index, conditions.front().second, mode);
  std::vector<double> drops;
  for (std::size_t c = 1; c < conditions.size(); ++c) {
    drops.push_back(full - expected_f_icmw(world, task_index, conditions[c].second, mode));
  }
  return weights_from_drops(drops);
}

std::vector<std::size_t> weight_ranking(std::span<const double> weights) {
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return weights[a] > weights[b]; });
  return order;
}

std::size_t default_budget(std::size_t dimension_count) { return (dimension_count + 1) / 2; }

EncodingMask encode_with_budget(std::span<const double> weights, std::span<const DimensionId> ids,
                                std::size_t budget) {
  if (weights.size() != ids.size()) throw Error(ErrorKind::LengthMismatch, "weights and ids differ in length");
  if (budget > weights.size()) {
    throw Error(ErrorKind::BadBudget,
                "budget " + std::to_string(budget) + " exceeds dimension count " + std::to_string(weights.size()));
  }
  std::vector<std::uint8_t> bits(weights.size(), 0);
  const auto order = weight_ranking(weights);
  for (std::size_t i = 0; i < budget; ++i) bits[order[i]] = 1;
  return EncodingMask::from_values(ids, bits);
}

std::string PerturbationSpec::label() const {
  char buf[64];
  switch (kind) {
    case Kind::Identity: return "identity";
    case Kind::Jitter:
      std::snprintf(buf, sizeof buf, "jitter(%g)", epsilon);
      return buf;
    case Kind::AdjacentSwap: return "adjacent_swap(" + std::to_string(swaps) + ")";
    case Kind::FullInversion: return "full_inversion";
  }
  return "unknown";
}

std::string_view PerturbationSpec::severity() const {
  switch (kind) {
    case Kind::Identity: return "matched baseline";
    case Kind::Jitter: return "moderate misalignment, order-preserving";
    case Kind::AdjacentSwap: return "moderate misalignment, rank-local swaps";
    case Kind::FullInversion: return "severe weight inversion";
  }
  return "unknown";
}

std::vector<double> perturb_weights(std::span<const double> weights, const PerturbationSpec& spec,
                                    std::uint64_t seed) {
  if (weights.empty()) throw Error(ErrorKind::BadPerturbation, "no weights to perturb");
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw Error(ErrorKind::BadPerturbation, "weights must be finite and >= 0");
  }
  std::vector<double> out(weights.begin(), weights.end());
  switch (spec.kind) {
    case PerturbationSpec::Kind::Identity:
      return out;
    case PerturbationSpec::Kind::Jitter: {
      if (!(spec.epsilon >= 0.0 && spec.epsilon < 1.0)) {
        throw Error(ErrorKind::BadPerturbation, "jitter epsilon must lie in [0, 1)");
      }
      for (std::size_t i = 0; i < out.size(); ++i) {
        const double u = unit_interval(derive_seed(seed, 0, i, 0));
        out[i] *= 1.0 - spec.epsilon + 2.0 * spec.epsilon * u;
      }
      return normalize_weights(out);
    }
    case PerturbationSpec::Kind::AdjacentSwap: {
      if (spec.swaps == 0 || 2 * spec.swaps > out.size()) {
        throw Error(ErrorKind::BadPerturbation, "adjacent_swap count must be in 1..n/2");
      }
      const auto order = weight_ranking(weights);
      for (std::size_t p = 0; p < spec.swaps; ++p) std::swap(out[order[2 * p]], out[order[2 * p + 1]]);
      return out;
    }
    case PerturbationSpec::Kind::FullInversion: {
      const auto order = weight_ranking(weights);
      const std::size_t n = order.size();
      for (std::size_t r = 0; r < n; ++r) out[order[r]] = weights[order[n - 1 - r]];
      return out;
    }
  }
  throw Error(ErrorKind::BadPerturbation, "unknown perturbation kind");
}

PerturbationReport run_weight_perturbation(std::span<const WorldVariant> worlds,
                                           std::span<const PerturbationSpec> perturbations,
                                           const PerturbationOptions& options, std::size_t threads) {
  if (options.replicates == 0) throw Error(ErrorKind::BadConfig, "replicates must be >= 1");
  struct Cell {
    std::size_t variant;
    std::size_t task;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (std::size_t v = 0; v < worlds.size(); ++v) {
    for (std::size_t t = 0; t < worlds[v].world.tasks.size(); ++t) {
      const auto w = worlds[v].world.tasks[t].weights();
      if (std::set<double>(w.begin(), w.end()).size() < 2) {
        throw Error(ErrorKind::BadConfig, "weight perturbation needs >= 2 distinct weights per task",
                    worlds[v].world.tasks[t].task_id);
      }
      cells.push_back({v, t, derive_seed(options.seed, v, t, 0)});
    }
  }
  std::sort(cells.begin(), cells.end(), [&](const Cell& a, const Cell& b) {
    const auto& ka = worlds[a.variant];
    const auto& kb = worlds[b.variant];
    if (ka.model_tag != kb.model_tag) return ka.model_tag < kb.model_tag;
    return ka.world.tasks[a.task].task_id < kb.world.tasks[b.task].task_id;
  });

  // Slot 0 is the identity baseline; perturbations follow in input order.
  std::vector<PerturbationSpec> runs{PerturbationSpec::identity()};
  runs.insert(runs.end(), perturbations.begin(), perturbations.end());
  const std::size_t per_cell = runs.size();

  struct Outcome {
    double was = 0.0;
    bool ranking_preserved = true;
    bool top_set_preserved = true;
    std::vector<OutputRecord> records;
  };
  std::vector<Outcome> outcomes(cells.size() * per_cell);

  parallel_for(outcomes.size(), threads, [&](std::size_t i) {
    const auto& cell = cells[i / per_cell];
    const std::size_t p = i % per_cell;
    const auto& variant = worlds[cell.variant];
    const auto& task = variant.world.tasks[cell.task];
    const auto truth = task.weights();
    const auto ids = task.ids();
    const std::size_t budget = options.budget.value_or(default_budget(ids.size()));

    const auto assumed = perturb_weights(truth, runs[p], derive_seed(cell.seed, 1, p, 0));
    const auto mask = encode_with_budget(assumed, ids, budget);

    Outcome o;
    const auto truth_rank = weight_ranking(truth);
    const auto assumed_rank = weight_ranking(assumed);
    o.ranking_preserved = truth_rank == assumed_rank;
    o.top_set_preserved = mask == encode_with_budget(truth, ids, budget);

    std::vector<double> f;
    for (std::size_t r = 0; r < options.replicates; ++r) {
      const auto out = simulate_output(variant.world, cell.task, mask, options.mode, cell.seed, r);
      auto rec = score_simulated(task, mask, out, runs[p].label(), variant.model_tag);
      f.push_back(rec.f_icmw);
      o.records.push_back(std::move(rec));
    }
    o.was = order_free_mean(std::move(f));
    outcomes[i] = std::move(o);
  });

  PerturbationReport report;
  report.cell_count = cells.size();
  std::vector<double> inversion_drops;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& variant = worlds[cells[c].variant];
    const auto& task = variant.world.tasks[cells[c].task];
    const double baseline = outcomes[c * per_cell].was;
    // The baseline slot is only reported when the caller asked for identity.
    for (std::size_t p = 1; p < per_cell; ++p) {
      auto& o = outcomes[c * per_cell + p];
      CellSummary s;
      s.task_id = task.task_id;
      s.model_tag = variant.model_tag;
      s.perturbation = runs[p].label();
      s.was = o.was;
      s.delta_vs_baseline = o.was - baseline;
      s.ranking_preserved = o.ranking_preserved;
      s.top_set_preserved = o.top_set_preserved;
      report.cells.push_back(s);
      for (auto& r : o.records) report.records.push_back(std::move(r));

      if (runs[p].order_preserving_kind()) {
        if (o.top_set_preserved) {
          ++report.plateau_checks;
          if (s.delta_vs_baseline == 0.0) ++report.plateau_hits;
        } else {
          ++report.cliff_onsets;
        }
      }
      if (runs[p].kind == PerturbationSpec::Kind::FullInversion) {
        ++report.inversion_cells;
        if (o.was < baseline) ++report.inversion_drops;
        inversion_drops.push_back(baseline - o.was);
      }
    }
  }
  if (report.plateau_checks > 0) {
    report.plateau_rate = static_cast<double>(report.plateau_hits) / static_cast<double>(report.plateau_checks);
  }
  if (report.inversion_cells > 0) {
    report.cliff_rate = static_cast<double>(report.inversion_drops) / static_cast<double>(report.inversion_cells);
    report.mean_inversion_drop = compensated_sum(inversion_drops) / static_cast<double>(inversion_drops.size());
  }
  return report;
}

std::vector<WorldVariant> default_perturbation_grid(std::uint64_t seed) {
  struct Profile {
    const char* tag;
    double public_lambda;
  };
  const Profile profiles[] = {{"prior_weak", 0.6}, {"prior_mid", 0.8}, {"prior_strong", 1.0}};
  std::vector<WorldVariant> out;
  for (std::size_t v = 0; v < 3; ++v) {
    WorldConfig cfg;
    for (std::size_t t = 0; t < 10; ++t) {
      const std::size_t n = 4 + t % 5;
      const std::size_t k = 6 + 2 * (t % 3);
      const std::size_t private_count = v == 0 ? default_budget(n) : (v == 1 ? 2 : 1);

      // Random assignment of ranks to dimensions.
      std::vector<std::size_t> rank_of(n);
      std::iota(rank_of.begin(), rank_of.end(), 0);
      for (std::size_t i = n - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(unit_interval(derive_seed(seed, t, i, 7)) * static_cast<double>(i + 1));
        std::swap(rank_of[i], rank_of[std::min(j, i)]);
      }
      std::vector<double> raw(n);
      for (std::size_t d = 0; d < n; ++d) raw[d] = std::pow(1.6, static_cast<double>(n - 1 - rank_of[d]));
      const auto weights = normalize_weights(raw);

      TaskConfig task;
      task.task_id = "task_" + std::string(t < 9 ? "0" : "") + std::to_string(t + 1);
      task.task_type = "synthetic_grid";
      for (std::size_t d = 0; d < n; ++d) {
        DimensionConfig dim;
        dim.id = DimensionId(fivew3h_ids()[d]);
        dim.weight = weights[d];
        dim.alphabet_size = k;
        const bool is_private = rank_of[d] < private_count;
        dim.lambda = is_private ? 0.0 : profiles[v].public_lambda;
        // Private user values differ from the prior's generic default (token 0).
        const double u = unit_interval(derive_seed(seed, t, d, 11));
        dim.user_value = 1 + std::min(k - 2, static_cast<std::size_t>(u * static_cast<double>(k - 1)));
        task.dims.push_back(std::move(dim));
      }
      cfg.tasks.push_back(std::move(task));
    }
    out.push_back({profiles[v].tag, build_world(cfg, derive_seed(seed, v, 0, 13))});
  }
  return out;
}

std::vector<PerturbationSpec> default_perturbations() {
  return {PerturbationSpec::identity(),        PerturbationSpec::jitter(0.05),
          PerturbationSpec::jitter(0.1),       PerturbationSpec::jitter(0.2),
          PerturbationSpec::adjacent_swap(1),  PerturbationSpec::full_inversion()};
}

std::string perturbation_summary_json(const PerturbationReport& report) {
  Json j = Json::object();
  Json severity = Json::object();
  for (const auto& p : default_perturbations()) severity[p.label().substr(0, p.label().find('('))] = std::string(p.severity());
  j["severity_mapping"] = std::move(severity);
  j["cell_count"] = report.cell_count;
  Json cells = Json::array();
  for (const auto& c : report.cells) {
    Json cj = Json::object();
    cj["task_id"] = c.task_id;
    cj["model_tag"] = c.model_tag;
    cj["perturbation"] = c.perturbation;
    cj["was"] = c.was;
    cj["delta_vs_baseline"] = c.delta_vs_baseline;
    cj["ranking_preserved"] = c.ranking_preserved;
    cj["top_set_preserved"] = c.top_set_preserved;
    cells.push_back(std::move(cj));
  }
  j["cells"] = std::move(cells);
  j["plateau_checks"] = report.plateau_checks;
  j["plateau_hits"] = report.plateau_hits;
  j["cliff_onsets"] = report.cliff_onsets;
  j["plateau_rate"] = optional_number(report.plateau_rate);
  j["cliff_rate"] = optional_number(report.cliff_rate);
  j["mean_inversion_drop"] = optional_number(report.mean_inversion_drop);
  return detail::canonical_dump(j);
}

namespace {

PerturbationSpec perturbation_from_json(const Json& j, const std::string& path, const SchemaContext& ctx) {
  ctx.expect_object(j, path);
  ctx.check_fields(j, path, {"kind", "epsilon", "count"});
  const auto kind = ctx.string_at(ctx.require(j, path, "kind"), child_path(path, "kind"));
  if (kind == "identity") return PerturbationSpec::identity();
  if (kind == "full_inversion") return PerturbationSpec::full_inversion();
  if (kind == "jitter") {
    const auto eps = ctx.number_at(ctx.require(j, path, "epsilon"), child_path(path, "epsilon"));
    if (!(eps >= 0.0 && eps < 1.0)) ctx.fail(child_path(path, "epsilon"), "epsilon must lie in [0, 1)");
    return PerturbationSpec::jitter(eps);
  }
  if (kind == "adjacent_swap") {
    const auto count = ctx.unsigned_at(ctx.require(j, path, "count"), child_path(path, "count"));
    if (count == 0) ctx.fail(child_path(path, "count"), "count must be >= 1");
    return PerturbationSpec::adjacent_swap(static_cast<std::size_t>(count));
  }
  ctx.fail(child_path(path, "kind"), "expected identity, jitter, adjacent_swap or full_inversion");
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view text, const std::filesystem::path& base_dir,
                                         const ParseOptions& options) {
  const SchemaContext ctx(options.lenient, options.warnings);
  const Json j = detail::parse_json(text);
  ctx.expect_object(j, "");
  ctx.check_fields(j, "", {"world_config", "world_path", "model_tag", "budget", "perturbations", "replicates",
                           "mode", "seed", "tasks"});
  ExperimentConfig cfg;
  const auto* inline_world = ctx.optional(j, "world_config");
  const auto* world_path = ctx.optional(j, "world_path");
  if (inline_world && world_path) ctx.fail("world_path", "give either world_config or world_path, not both");
  if (inline_world) {
    cfg.world = parse_world_config(detail::canonical_dump(*inline_world), options);
  } else if (world_path) {
    std::filesystem::path p = ctx.string_at(*world_path, "world_path");
    if (p.is_relative()) p = base_dir / p;
    cfg.world = parse_world_config(read_text_file(p), options);
  }
  if (const auto* m = ctx.optional(j, "model_tag")) cfg.model_tag = ctx.string_at(*m, "model_tag");
  if (const auto* b = ctx.optional(j, "budget")) cfg.budget = static_cast<std::size_t>(ctx.unsigned_at(*b, "budget"));
  if (const auto* p = ctx.optional(j, "perturbations")) {
    ctx.expect_array(*p, "perturbations");
    for (std::size_t i = 0; i < p->size(); ++i) {
      cfg.perturbations.push_back(perturbation_from_json((*p)[i], index_path("perturbations", i), ctx));
    }
  }
  if (const auto* r = ctx.optional(j, "replicates")) {
    const auto reps = ctx.unsigned_at(*r, "replicates");
    if (reps == 0) ctx.fail("replicates", "replicates must be >= 1");
    cfg.replicates = static_cast<std::size_t>(reps);
  }
  if (const auto* m = ctx.optional(j, "mode")) {
    const auto mode = ctx.string_at(*m, "mode");
    if (mode != "argmax" && mode != "sample") ctx.fail("mode", "expected \"argmax\" or \"sample\"");
    cfg.mode = recovery_mode_from_string(mode);
  }
  if (const auto* s = ctx.optional(j, "seed")) {
    cfg.seed = ctx.unsigned_at(*s, "seed");
  } else if (cfg.world && cfg.world->seed) {
    cfg.seed = *cfg.world->seed;
  }
  if (const auto* t = ctx.optional(j, "tasks")) {
    ctx.expect_array(*t, "tasks");
    for (std::size_t i = 0; i < t->size(); ++i) cfg.tasks.push_back(ctx.string_at((*t)[i], index_path("tasks", i)));
  }
  return cfg;
}

std::size_t effective_replicates(const ExperimentConfig& config) {
  if (config.replicates) return *config.replicates;
  return config.mode == RecoveryMode::Sample ? 50 : 1;
}

AblationSummary summarize_ablation(const SyntheticWorld& world, std::span<const OutputRecord> records) {
  std::map<std::string, std::vector<OutputRecord>> by_task;
  for (const auto& r : records) by_task[r.task_id].push_back(r);
  AblationSummary summary;
  for (const auto& task : world.tasks) {
    auto it = by_task.find(task.task_id);
    if (it == by_task.end()) continue;
    const auto& recs = it->second;
    AblationSummary::TaskSummary ts;
    ts.task_id = task.task_id;
    ts.true_weights = task.weights();
    std::map<std::string, std::vector<double>> f;
    std::size_t split = 0;
    for (const auto& r : recs) {
      f[r.condition].push_back(r.f_icmw);
      if (detect_split_zone(r.ga, r.f_icmw)) ++split;
    }
    for (const auto& [label, _] : ablation_conditions(task)) {
      auto fit = f.find(label);
      if (fit != f.end()) ts.mean_f_icmw.emplace_back(label, order_free_mean(fit->second));
    }
    ts.split_zone_rate = static_cast<double>(split) / static_cast<double>(recs.size());
    try {
      ts.inferred_weights = estimate_weights_by_ablation(recs);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ZeroSignal && e.kind() != ErrorKind::MissingCondition) throw;
    }
    summary.tasks.push_back(std::move(ts));
  }
  return summary;
}

std::string ablation_summary_json(const AblationSummary& summary) {
  Json j = Json::object();
  Json tasks = Json::array();
  for (const auto& t : summary.tasks) {
    Json tj = Json::object();
    tj["task_id"] = t.task_id;
    Json means = Json::object();
    for (const auto& [label, v] : t.mean_f_icmw) means[label] = v;
    tj["mean_f_icmw"] = std::move(means);
    tj["split_zone_rate"] = t.split_zone_rate;
    tj["true_weights"] = t.true_weights;
    tj["inferred_weights"] = t.inferred_weights ? Json(*t.inferred_weights) : Json(nullptr);
    tasks.push_back(std::move(tj));
  }
  j["tasks"] = std::move(tasks);
  return detail::canonical_dump(j);
}

}  // namespace ist
