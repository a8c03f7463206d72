#include "ist/prior_sim.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "io_json.hpp"
#include "ist/error.hpp"
#include "ist/numeric.hpp"

namespace ist {

using detail::child_path;
using detail::index_path;
using detail::Json;
using detail::SchemaContext;

namespace {

std::vector<std::string> default_alphabet(std::size_t k) {
  std::vector<std::string> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back("v" + std::to_string(i));
  return out;
}

void check_alignment(const WorldTask& task, const EncodingMask& mask) {
  if (mask.size() != task.dims.size()) {
    throw Error(ErrorKind::LengthMismatch,
                "mask has " + std::to_string(mask.size()) + " entries, task has " +
                    std::to_string(task.dims.size()) + " dimensions",
                task.task_id);
  }
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask.bits[i].dimension != task.dims[i].id) {
      throw Error(ErrorKind::LengthMismatch, "mask is not aligned to the task's dimensions",
                  mask.bits[i].dimension.str());
    }
  }
}

std::size_t sample_index(std::span<const double> prior, double u) {
  double cumulative = 0.0;
  for (std::size_t i = 0; i < prior.size(); ++i) {
    cumulative += prior[i];
    if (u < cumulative) return i;
  }
  // u landed in the rounding gap above the last cumulative value.
  for (std::size_t i = prior.size(); i-- > 0;) {
    if (prior[i] > 0.0) return i;
  }
  return 0;
}

}  // namespace

std::string_view to_string(RecoveryMode mode) {
  return mode == RecoveryMode::Argmax ? "argmax" : "sample";
}

RecoveryMode recovery_mode_from_string(std::string_view s) {
  if (s == "argmax") return RecoveryMode::Argmax;
  if (s == "sample") return RecoveryMode::Sample;
  throw Error(ErrorKind::BadConfig, "mode must be \"argmax\" or \"sample\"", std::string(s));
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::CopiedFromCarrier: return "copied_from_carrier";
    case Provenance::PriorDefault: return "prior_default";
    case Provenance::PriorSample: return "prior_sample";
  }
  return "unknown";
}

std::vector<DimensionId> WorldTask::ids() const {
  std::vector<DimensionId> out;
  for (const auto& d : dims) out.push_back(d.id);
  return out;
}

std::vector<double> WorldTask::weights() const {
  std::vector<double> out;
  for (const auto& d : dims) out.push_back(d.weight);
  return out;
}

IntentSpec WorldTask::spec() const {
  IntentSpec s;
  s.task_id = task_id;
  s.task_type = task_type;
  for (const auto& d : dims) {
    Dimension dim;
    dim.id = d.id;
    dim.weight = d.weight;
    dim.intended_value = ValueRef::token(d.alphabet[d.user_value]);
    s.dimensions.push_back(std::move(dim));
  }
  return s;
}

std::size_t SyntheticWorld::task_index(std::string_view task_id) const {
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (tasks[i].task_id == task_id) return i;
  }
  throw Error(ErrorKind::UnknownTask, "no such task in world", std::string(task_id));
}

const WorldTask& SyntheticWorld::task(std::string_view task_id) const {
  return tasks[task_index(task_id)];
}

RealizedValues SimulatedOutput::realized_values() const {
  RealizedValues out;
  for (const auto& d : dims) out.emplace(d.id, d.value);
  return out;
}

std::vector<double> mixture_prior(std::size_t alphabet_size, std::size_t user_value, double lambda) {
  if (alphabet_size < 2) throw Error(ErrorKind::BadConfig, "alphabet size must be >= 2");
  if (user_value >= alphabet_size) throw Error(ErrorKind::BadConfig, "user value outside alphabet");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error(ErrorKind::BadConfig, "lambda must lie in [0, 1]");
  const double floor = (1.0 - lambda) / static_cast<double>(alphabet_size);
  std::vector<double> prior(alphabet_size, floor);
  prior[user_value] += lambda;
  return prior;
}

std::size_t prior_argmax(std::span<const double> prior) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < prior.size(); ++i) {
    if (prior[i] > prior[best]) best = i;
  }
  return best;
}

WorldConfig parse_world_config(std::string_view text, const ParseOptions& options) {
  const SchemaContext ctx(options.lenient, options.warnings);
  const Json j = detail::parse_json(text);
  ctx.expect_object(j, "");
  ctx.check_fields(j, "", {"tasks", "seed"});
  WorldConfig cfg;
  if (const auto* s = ctx.optional(j, "seed")) cfg.seed = ctx.unsigned_at(*s, "seed");
  const auto& tasks = ctx.require(j, "", "tasks");
  ctx.expect_array(tasks, "tasks");
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const auto tpath = index_path("tasks", t);
    const auto& tj = tasks[t];
    ctx.expect_object(tj, tpath);
    ctx.check_fields(tj, tpath, {"task_id", "task_type", "dims"});
    TaskConfig task;
    task.task_id = ctx.string_at(ctx.require(tj, tpath, "task_id"), child_path(tpath, "task_id"));
    if (const auto* tt = ctx.optional(tj, "task_type")) task.task_type = ctx.string_at(*tt, child_path(tpath, "task_type"));
    const auto dpath = child_path(tpath, "dims");
    const auto& dims = ctx.require(tj, tpath, "dims");
    ctx.expect_array(dims, dpath);
    for (std::size_t d = 0; d < dims.size(); ++d) {
      const auto path = index_path(dpath, d);
      const auto& dj = dims[d];
      ctx.expect_object(dj, path);
      ctx.check_fields(dj, path, {"id", "weight", "K", "lambda", "user_value", "alphabet"});
      DimensionConfig dim;
      dim.id = detail::id_from_json(ctx.require(dj, path, "id"), child_path(path, "id"), ctx);
      dim.weight = ctx.number_at(ctx.require(dj, path, "weight"), child_path(path, "weight"));
      dim.lambda = ctx.number_at(ctx.require(dj, path, "lambda"), child_path(path, "lambda"));
      if (const auto* a = ctx.optional(dj, "alphabet")) {
        const auto apath = child_path(path, "alphabet");
        ctx.expect_array(*a, apath);
        for (std::size_t i = 0; i < a->size(); ++i) dim.alphabet.push_back(ctx.string_at((*a)[i], index_path(apath, i)));
      }
      if (const auto* k = ctx.optional(dj, "K")) {
        dim.alphabet_size = static_cast<std::size_t>(ctx.unsigned_at(*k, child_path(path, "K")));
      } else if (!dim.alphabet.empty()) {
        dim.alphabet_size = dim.alphabet.size();
      } else {
        ctx.fail(child_path(path, "K"), "missing required field");
      }
      if (const auto* u = ctx.optional(dj, "user_value")) {
        const auto upath = child_path(path, "user_value");
        if (u->is_string()) {
          const auto names = dim.alphabet.empty() ? default_alphabet(dim.alphabet_size) : dim.alphabet;
          const auto name = u->get<std::string>();
          auto it = std::find(names.begin(), names.end(), name);
          if (it == names.end()) ctx.fail(upath, "token \"" + name + "\" is not in the alphabet");
          dim.user_value = static_cast<std::size_t>(it - names.begin());
        } else {
          dim.user_value = static_cast<std::size_t>(ctx.unsigned_at(*u, upath));
        }
      }
      task.dims.push_back(std::move(dim));
    }
    cfg.tasks.push_back(std::move(task));
  }
  return cfg;
}

std::string serialize_world_config(const WorldConfig& config) {
  Json j = Json::object();
  Json tasks = Json::array();
  for (const auto& t : config.tasks) {
    Json tj = Json::object();
    tj["task_id"] = t.task_id;
    tj["task_type"] = t.task_type;
    Json dims = Json::array();
    for (const auto& d : t.dims) {
      Json dj = Json::object();
      dj["id"] = d.id.str();
      dj["weight"] = d.weight;
      dj["K"] = d.alphabet_size;
      dj["lambda"] = d.lambda;
      if (d.user_value) dj["user_value"] = *d.user_value;
      if (!d.alphabet.empty()) dj["alphabet"] = d.alphabet;
      dims.push_back(std::move(dj));
    }
    tj["dims"] = std::move(dims);
    tasks.push_back(std::move(tj));
  }
  j["tasks"] = std::move(tasks);
  if (config.seed) j["seed"] = *config.seed;
  return detail::canonical_dump(j);
}

SyntheticWorld build_world(const WorldConfig& config, std::uint64_t seed) {
  if (config.tasks.empty()) throw Error(ErrorKind::BadConfig, "world needs at least one task");
  SyntheticWorld world;
  world.seed = seed;
  std::set<std::string> task_ids;
  for (std::size_t t = 0; t < config.tasks.size(); ++t) {
    const auto& tc = config.tasks[t];
    if (!task_ids.insert(tc.task_id).second) throw Error(ErrorKind::BadConfig, "duplicate task id", tc.task_id);
    if (tc.dims.empty()) throw Error(ErrorKind::BadConfig, "task needs at least one dimension", tc.task_id);

    std::vector<double> raw;
    for (const auto& d : tc.dims) raw.push_back(d.weight);
    std::vector<double> weights;
    try {
      weights = normalize_weights(raw);
    } catch (const Error& e) {
      throw Error(ErrorKind::BadConfig, e.what(), tc.task_id);
    }
    if (std::fabs(compensated_sum(raw) - 1.0) > kTopWeightTolerance) {
      throw Error(ErrorKind::BadConfig, "dimension weights must sum to 1", tc.task_id);
    }

    WorldTask task;
    task.task_id = tc.task_id;
    task.task_type = tc.task_type;
    std::set<DimensionId> ids;
    for (std::size_t d = 0; d < tc.dims.size(); ++d) {
      const auto& dc = tc.dims[d];
      const auto where = tc.task_id + "/" + dc.id.str();
      if (!ids.insert(dc.id).second) throw Error(ErrorKind::BadConfig, "duplicate dimension id", where);
      if (dc.alphabet_size < 2) throw Error(ErrorKind::BadConfig, "alphabet size K must be >= 2", where);
      if (!(dc.lambda >= 0.0 && dc.lambda <= 1.0)) throw Error(ErrorKind::BadConfig, "lambda must lie in [0, 1]", where);
      if (!dc.alphabet.empty() && dc.alphabet.size() != dc.alphabet_size) {
        throw Error(ErrorKind::BadConfig, "alphabet length differs from K", where);
      }
      WorldDimension dim;
      dim.id = dc.id;
      dim.weight = weights[d];
      dim.lambda = dc.lambda;
      dim.alphabet = dc.alphabet.empty() ? default_alphabet(dc.alphabet_size) : dc.alphabet;
      if (std::set<std::string>(dim.alphabet.begin(), dim.alphabet.end()).size() != dim.alphabet.size()) {
        throw Error(ErrorKind::BadConfig, "alphabet tokens must be distinct", where);
      }
      if (dc.user_value) {
        if (*dc.user_value >= dc.alphabet_size) throw Error(ErrorKind::BadConfig, "user value outside alphabet", where);
        dim.user_value = *dc.user_value;
      } else {
        const double u = unit_interval(derive_seed(seed, t, d, kUserValueDraw));
        dim.user_value = std::min(dc.alphabet_size - 1,
                                  static_cast<std::size_t>(u * static_cast<double>(dc.alphabet_size)));
      }
      dim.prior = mixture_prior(dc.alphabet_size, dim.user_value, dc.lambda);
      if (std::fabs(compensated_sum(dim.prior) - 1.0) > 1e-12) {
        throw Error(ErrorKind::Internal, "prior does not sum to 1", where);
      }
      task.dims.push_back(std::move(dim));
    }
    world.tasks.push_back(std::move(task));
  }
  return world;
}

SimulatedOutput simulate_output(const SyntheticWorld& world, std::size_t task_index,
                                const EncodingMask& mask, RecoveryMode mode, std::uint64_t seed,
                                std::uint64_t draw) {
  if (task_index >= world.tasks.size()) {
    throw Error(ErrorKind::UnknownTask, "task index out of range", std::to_string(task_index));
  }
  const auto& task = world.tasks[task_index];
  check_alignment(task, mask);
  SimulatedOutput out;
  out.dims.reserve(task.dims.size());
  for (std::size_t d = 0; d < task.dims.size(); ++d) {
    const auto& dim = task.dims[d];
    RealizedDimension r;
    r.id = dim.id;
    if (mask.bits[d].m == 1) {
      r.token = dim.user_value;
      r.provenance = Provenance::CopiedFromCarrier;
    } else if (mode == RecoveryMode::Argmax) {
      r.token = prior_argmax(dim.prior);
      r.provenance = Provenance::PriorDefault;
    } else {
      r.token = sample_index(dim.prior, unit_interval(derive_seed(seed, task_index, d, draw)));
      r.provenance = Provenance::PriorSample;
    }
    r.value = ValueRef::token(dim.alphabet[r.token]);
    out.dims.push_back(std::move(r));
  }
  return out;
}

SimulatedOutput simulate_output(const SyntheticWorld& world, std::string_view task_id,
                                const EncodingMask& mask, RecoveryMode mode, std::uint64_t seed,
                                std::uint64_t draw) {
  return simulate_output(world, world.task_index(task_id), mask, mode, seed, draw);
}

double expected_f_icmw(const SyntheticWorld& world, std::size_t task_index,
                       const EncodingMask& mask, RecoveryMode mode) {
  if (task_index >= world.tasks.size()) {
    throw Error(ErrorKind::UnknownTask, "task index out of range", std::to_string(task_index));
  }
  const auto& task = world.tasks[task_index];
  check_alignment(task, mask);
  CompensatedAccumulator acc;
  for (std::size_t d = 0; d < task.dims.size(); ++d) {
    const auto& dim = task.dims[d];
    double expected_f = 1.0;
    if (mask.bits[d].m == 0) {
      if (mode == RecoveryMode::Sample) {
        expected_f = dim.prior[dim.user_value];
      } else {
        expected_f = dim.lambda > 0.0 ? 1.0 : 1.0 / static_cast<double>(dim.alphabet_size());
      }
    }
    acc.add(dim.weight * expected_f);
  }
  return std::clamp(acc.value(), 0.0, 1.0);
}

}  // namespace ist
