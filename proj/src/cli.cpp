#include "ist/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "io_json.hpp"
#include "ist/audit.hpp"
#include "ist/demo.hpp"
#include "ist/error.hpp"
#include "ist/experiments.hpp"
#include "ist/info_oracle.hpp"
#include "ist/metrics.hpp"
#include "ist/numeric.hpp"
#include "ist/prior_sim.hpp"
#include "ist/spec_io.hpp"

namespace ist {

namespace {

namespace fs = std::filesystem;
using detail::Json;

struct GlobalFlags {
  std::optional<std::uint64_t> seed;
  std::string format = "text";
  bool lenient = false;
  std::string out;
  std::size_t threads = 1;
  std::string timestamp;
};

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

ParseOptions parse_options(const GlobalFlags& g, std::vector<std::string>& warnings) {
  return ParseOptions{g.lenient, &warnings};
}

void flush_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << "\n";
}

// Writes to --out when given (and not "-"), otherwise to the output stream.
void emit(const GlobalFlags& g, std::ostream& out, const std::string& content) {
  if (g.out.empty() || g.out == "-") {
    out << content;
  } else {
    write_text_file(g.out, content);
  }
}

Clock make_clock(const GlobalFlags& g) {
  if (g.timestamp.empty()) return [] { return std::chrono::system_clock::now(); };
  const auto tp = parse_rfc3339(g.timestamp);
  return [tp] { return tp; };
}

ReportFormat report_format(const GlobalFlags& g) { return report_format_from_string(g.format); }

int gate(const AuditRecord& r, std::optional<double> max_drift, std::ostream& err) {
  bool violated = false;
  if (r.split_zone) {
    err << "gate: split zone detected for " << r.task_id << " (ga " << r.ga << ", f_icmw " << fixed4(r.f_icmw)
        << ")\n";
    violated = true;
  }
  if (max_drift && r.d_drift > *max_drift) {
    err << "gate: drift " << fixed4(r.d_drift) << " exceeds --max-drift " << fixed4(*max_drift) << " for "
        << r.task_id << "\n";
    violated = true;
  }
  return violated ? kExitGateViolated : kExitOk;
}

PrivacyLabels oracle_labels(const SyntheticWorld& world, const IntentSpec& spec, const PrivacyThresholds& th) {
  PrivacyLabels labels;
  for (std::size_t t = 0; t < world.tasks.size(); ++t) {
    if (world.tasks[t].task_id != spec.task_id) continue;
    for (const auto& d : world.tasks[t].dims) labels[d.id] = classify_privacy(world, t, d.id, th).label;
    return labels;
  }
  throw Error(ErrorKind::Inconsistent, "world has no task matching the spec", spec.task_id);
}

std::string metrics_text(const std::string& task_id, const DimensionScores& scores, const Aggregates& agg, int ga,
                         std::optional<double> l_enc) {
  std::ostringstream s;
  s << "task " << task_id << "\n";
  for (const auto& e : scores.entries) {
    s << "  " << e.dimension.str() << ": r " << fixed4(e.r) << "  f " << fixed4(e.f) << "\n";
  }
  if (l_enc) s << "l_enc " << fixed4(*l_enc) << "\n";
  s << "s_icmw " << fixed4(agg.s_icmw) << "\n";
  s << "f_icmw " << fixed4(agg.f_icmw) << "\n";
  s << "d_drift " << fixed4(agg.d_drift) << "\n";
  s << "ga " << ga << "\n";
  s << "split_zone " << (detect_split_zone(ga, agg.f_icmw) ? "true" : "false") << "\n";
  return s.str();
}

SyntheticWorld load_world(const std::string& path, const GlobalFlags& g, std::vector<std::string>& warnings) {
  const auto cfg = parse_world_config(read_text_file(path), parse_options(g, warnings));
  return build_world(cfg, g.seed.value_or(cfg.seed.value_or(0)));
}

// Subcommand implementations -------------------------------------------------

int cmd_validate(const GlobalFlags& g, const std::string& spec_path, Streams s) {
  std::vector<std::string> warnings;
  const auto spec = parse_intent_spec(read_text_file(spec_path), parse_options(g, warnings));
  flush_warnings(warnings, s.err);
  const auto flat = flatten(spec);
  if (g.format == "json") {
    Json j = Json::object();
    j["valid"] = true;
    j["task_id"] = spec.task_id;
    j["leaf_dimensions"] = flat.size();
    emit(g, s.out, detail::canonical_dump(j) + "\n");
  } else {
    emit(g, s.out, "valid: " + spec.task_id + " (" + std::to_string(flat.size()) + " leaf dimensions)\n");
  }
  return kExitOk;
}

int cmd_mask(const GlobalFlags& g, const std::string& spec_path, const std::string& carrier_path, Streams s) {
  std::vector<std::string> warnings;
  const auto opts = parse_options(g, warnings);
  const auto spec = parse_intent_spec(read_text_file(spec_path), opts);
  const auto carrier = parse_carrier(read_text_file(carrier_path), opts);
  flush_warnings(warnings, s.err);
  const auto mask = compute_mask(spec, carrier);
  const double l_enc = encoding_loss(flat_weights(spec), mask);
  if (g.format == "json") {
    Json j = Json::object();
    j["task_id"] = spec.task_id;
    j["mask"] = detail::mask_to_json(mask);
    j["l_enc"] = l_enc;
    emit(g, s.out, detail::canonical_dump(j) + "\n");
  } else {
    std::ostringstream o;
    for (const auto& b : mask.bits) o << b.dimension.str() << " " << static_cast<int>(b.m) << "\n";
    o << "l_enc " << fixed4(l_enc) << "\n";
    emit(g, s.out, o.str());
  }
  return kExitOk;
}

int cmd_score(const GlobalFlags& g, const std::string& spec_path, const std::string& output_path,
              const std::string& carrier_path, Streams s) {
  std::vector<std::string> warnings;
  const auto opts = parse_options(g, warnings);
  const auto spec = parse_intent_spec(read_text_file(spec_path), opts);
  const auto output = parse_model_output(read_text_file(output_path), opts);
  std::optional<Carrier> carrier;
  if (!carrier_path.empty()) carrier = parse_carrier(read_text_file(carrier_path), opts);
  flush_warnings(warnings, s.err);
  if (output.task_id != spec.task_id) {
    throw Error(ErrorKind::Inconsistent, "output task differs from spec task", output.task_id);
  }
  const auto weights = flat_weights(spec);
  const auto scores = score_output(spec, output.realized_values);
  const auto agg = aggregate(weights, scores);
  const int ga = output.ga.value_or(ga_from_structure(agg.s_icmw));
  std::optional<double> l_enc;
  if (carrier) l_enc = encoding_loss(weights, compute_mask(spec, *carrier));
  if (g.format == "json") {
    Json j = Json::object();
    j["task_id"] = spec.task_id;
    Json sc = Json::array();
    for (const auto& e : scores.entries) {
      Json ej = Json::object();
      ej["dimension"] = e.dimension.str();
      ej["r"] = e.r;
      ej["f"] = e.f;
      sc.push_back(std::move(ej));
    }
    j["scores"] = std::move(sc);
    if (l_enc) j["l_enc"] = *l_enc;
    j["s_icmw"] = agg.s_icmw;
    j["f_icmw"] = agg.f_icmw;
    j["d_drift"] = agg.d_drift;
    j["ga"] = ga;
    j["split_zone"] = detect_split_zone(ga, agg.f_icmw);
    emit(g, s.out, detail::canonical_dump(j) + "\n");
  } else {
    emit(g, s.out, metrics_text(spec.task_id, scores, agg, ga, l_enc));
  }
  return kExitOk;
}

struct AuditFlags {
  std::string spec, carrier, output, world;
  std::optional<double> max_drift;
  double r_threshold = 0.5;
  double f_threshold = 0.5;
  double theta_pub = 0.9;
};

int cmd_audit(const GlobalFlags& g, const AuditFlags& a, Streams s) {
  std::vector<std::string> warnings;
  const auto opts = parse_options(g, warnings);
  const auto spec = parse_intent_spec(read_text_file(a.spec), opts);
  const auto carrier = parse_carrier(read_text_file(a.carrier), opts);
  const auto output = parse_model_output(read_text_file(a.output), opts);
  std::optional<PrivacyLabels> labels;
  if (!a.world.empty()) {
    labels = oracle_labels(load_world(a.world, g, warnings), spec, PrivacyThresholds{a.theta_pub, 0.1});
  }
  flush_warnings(warnings, s.err);
  if (output.task_id != spec.task_id) {
    throw Error(ErrorKind::Inconsistent, "output task differs from spec task", output.task_id);
  }
  AuditInputs in{spec, carrier, labels ? &*labels : nullptr, {a.r_threshold, a.f_threshold}, output.ga};
  const auto rec = build_audit_record(in, output.realized_values, make_clock(g));
  emit(g, s.out, serialize_audit_record(rec) + "\n");
  return gate(rec, a.max_drift, s.err);
}

int cmd_demo(const GlobalFlags& g, std::optional<double> max_drift, const std::string& emit_dir, Streams s) {
  const auto spec = demo::spec();
  const auto carrier = demo::carrier();
  const auto output = demo::simulated_output();
  if (!emit_dir.empty()) {
    fs::create_directories(emit_dir);
    const fs::path dir(emit_dir);
    write_text_file(dir / "spec.json", serialize_intent_spec(spec) + "\n");
    write_text_file(dir / "carrier.json", serialize_carrier(carrier) + "\n");
    write_text_file(dir / "output.json", serialize_model_output(output) + "\n");
    write_text_file(dir / "world.json", serialize_world_config(demo::world_config()) + "\n");
  }
  AuditInputs in{spec, carrier, nullptr, {}, std::nullopt};
  const auto rec = build_audit_record(in, output.realized_values, make_clock(g));
  emit(g, s.out, serialize_audit_record(rec) + "\n");
  s.err << "demo: encoded " << rec.encoded_dims.size() << " of " << rec.encoded_dims.size() + rec.absent_dims.size()
        << " dimensions; ga " << rec.ga << ", s_icmw " << fixed4(rec.s_icmw) << ", f_icmw " << fixed4(rec.f_icmw)
        << ", drift " << fixed4(rec.d_drift) << "\n";
  return gate(rec, max_drift, s.err);
}

struct ExperimentFlags {
  std::string config;
  std::string summary;
};

ExperimentConfig load_experiment(const GlobalFlags& g, const std::string& path, std::vector<std::string>& warnings) {
  ExperimentConfig cfg;
  if (!path.empty()) {
    cfg = parse_experiment_config(read_text_file(path), fs::path(path).parent_path(), parse_options(g, warnings));
  }
  if (g.seed) cfg.seed = *g.seed;
  return cfg;
}

void emit_summary(const GlobalFlags& g, const ExperimentFlags& e, Streams s, const std::string& summary) {
  if (!e.summary.empty()) {
    write_text_file(e.summary, summary + "\n");
  } else if (!g.out.empty() && g.out != "-") {
    s.out << summary << "\n";
  } else {
    s.err << summary << "\n";
  }
}

std::string records_text(std::span<const OutputRecord> records) {
  std::ostringstream o;
  write_records(o, records);
  return o.str();
}

int cmd_ablate(const GlobalFlags& g, const ExperimentFlags& e, Streams s) {
  std::vector<std::string> warnings;
  const auto cfg = load_experiment(g, e.config, warnings);
  flush_warnings(warnings, s.err);
  if (!cfg.world) throw Error(ErrorKind::BadConfig, "ablate needs world_config or world_path", e.config);
  const auto world = build_world(*cfg.world, cfg.seed);
  AblationPlan plan;
  plan.task_ids = cfg.tasks;
  plan.replicates = effective_replicates(cfg);
  plan.mode = cfg.mode;
  plan.seed = cfg.seed;
  plan.model_tag = cfg.model_tag;
  const auto records = run_ablation(world, plan, g.threads);
  emit(g, s.out, records_text(records));
  emit_summary(g, e, s, ablation_summary_json(summarize_ablation(world, records)));
  return kExitOk;
}

int cmd_perturb(const GlobalFlags& g, const ExperimentFlags& e, Streams s) {
  std::vector<std::string> warnings;
  const auto cfg = load_experiment(g, e.config, warnings);
  flush_warnings(warnings, s.err);
  std::vector<WorldVariant> worlds;
  if (cfg.world) {
    worlds.push_back({cfg.model_tag, build_world(*cfg.world, cfg.seed)});
  } else {
    worlds = default_perturbation_grid(cfg.seed);
  }
  const auto perturbations = cfg.perturbations.empty() ? default_perturbations() : cfg.perturbations;
  PerturbationOptions opts;
  opts.budget = cfg.budget;
  opts.mode = cfg.mode;
  opts.replicates = effective_replicates(cfg);
  opts.seed = cfg.seed;
  const auto report = run_weight_perturbation(worlds, perturbations, opts, g.threads);
  const auto summary = perturbation_summary_json(report);
  if (!g.out.empty() && g.out != "-") {
    write_text_file(g.out, records_text(report.records));
    if (!e.summary.empty()) {
      write_text_file(e.summary, summary + "\n");
    } else {
      s.out << summary << "\n";
    }
  } else {
    if (!e.summary.empty()) write_text_file(e.summary, summary + "\n");
    s.out << summary << "\n";
  }
  return kExitOk;
}

int cmd_tiil(const GlobalFlags& g, const std::string& world_path, const std::string& task_filter, double theta_pub,
             Streams s) {
  std::vector<std::string> warnings;
  const auto world = load_world(world_path, g, warnings);
  flush_warnings(warnings, s.err);
  const PrivacyThresholds th{theta_pub, 0.1};
  const std::uint64_t seed = g.seed.value_or(world.seed);
  bool all_hold = true;
  Json tasks = Json::array();
  std::ostringstream text;
  bool matched = task_filter.empty();
  for (std::size_t t = 0; t < world.tasks.size(); ++t) {
    const auto& task = world.tasks[t];
    if (!task_filter.empty() && task.task_id != task_filter) continue;
    matched = true;
    Json tj = Json::object();
    tj["task_id"] = task.task_id;
    Json dims = Json::array();
    text << "task " << task.task_id << "\n";
    for (std::size_t d = 0; d < task.dims.size(); ++d) {
      const auto rep = check_tiil(world, t, d, derive_seed(seed, t, d, 0), th);
      all_hold = all_hold && rep.dpi_holds;
      Json dj = Json::object();
      dj["dimension"] = rep.dimension.str();
      dj["lambda"] = task.dims[d].lambda;
      dj["K"] = task.dims[d].alphabet_size();
      dj["label"] = std::string(to_string(rep.verdict.label));
      dj["bayes_accuracy"] = rep.bayes_accuracy;
      dj["chance"] = rep.chance;
      dj["mi_bits"] = rep.i_v_evidence;
      dj["full_carrier_state"] = rep.full_carrier_state;
      dj["tiil_regime"] = rep.tiil_regime;
      dj["dpi_holds"] = rep.dpi_holds;
      Json decs = Json::array();
      for (const auto& c : rep.decoders) {
        Json cj = Json::object();
        cj["family"] = c.family;
        cj["i_v_g"] = c.i_v_g;
        cj["accuracy"] = c.accuracy;
        cj["slack"] = c.dpi.slack;
        cj["holds"] = c.dpi.holds;
        decs.push_back(std::move(cj));
      }
      dj["decoders"] = std::move(decs);
      dims.push_back(std::move(dj));
      text << "  " << rep.dimension.str() << ": " << to_string(rep.verdict.label) << "  bayes "
           << fixed4(rep.bayes_accuracy) << "  chance " << fixed4(rep.chance) << "  I(v;P,M) "
           << fixed4(rep.i_v_evidence) << " bits  dpi " << (rep.dpi_holds ? "holds" : "VIOLATED")
           << (rep.tiil_regime ? "  [no recovery beyond generic substitution]" : "") << "\n";
    }
    tj["dimensions"] = std::move(dims);
    tasks.push_back(std::move(tj));
  }
  if (!matched) throw Error(ErrorKind::UnknownTask, "no such task in world", task_filter);
  if (g.format == "json") {
    Json j = Json::object();
    j["tasks"] = std::move(tasks);
    j["dpi_holds"] = all_hold;
    emit(g, s.out, detail::canonical_dump(j) + "\n");
  } else {
    text << (all_hold ? "DPI holds for every decoder\n" : "DPI VIOLATED\n");
    emit(g, s.out, text.str());
  }
  if (!all_hold) {
    s.err << "internal error: data processing inequality violated\n";
    return kExitInternalError;
  }
  return kExitOk;
}

int cmd_report(const GlobalFlags& g, const std::string& path, Streams s) {
  std::vector<std::string> warnings;
  const auto records = parse_audit_records(read_text_file(path), parse_options(g, warnings));
  flush_warnings(warnings, s.err);
  emit(g, s.out, render_report(records, report_format(g)));
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Intent fidelity toolkit: specs, masks, metrics, simulation, oracle checks and audits", "ist"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags g;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Master seed (overrides config files)");
  app.add_option("--format", g.format, "Output format: text, markdown or json")
      ->check(CLI::IsMember({"text", "markdown", "md", "json"}));
  app.add_flag("--lenient", g.lenient, "Warn about unknown fields instead of rejecting them");
  app.add_option("--out", g.out, "Write results to this file instead of standard output");
  app.add_option("--threads", g.threads, "Worker threads for batch commands (0: all cores)");
  app.add_option("--timestamp", g.timestamp, "Fixed audit timestamp (YYYY-MM-DDTHH:MM:SSZ)");

  std::string spec_path, carrier_path, output_path, config_path, world_path, records_path, task_filter, emit_dir;
  double theta_pub = 0.9;
  std::optional<double> max_drift;
  AuditFlags audit_flags;
  ExperimentFlags exp_flags;

  auto* validate = app.add_subcommand("validate", "Validate an intent spec");
  validate->add_option("spec", spec_path, "Intent spec JSON")->required();

  auto* mask = app.add_subcommand("mask", "Encoding mask and L_enc for a spec/carrier pair");
  mask->add_option("--spec", spec_path)->required();
  mask->add_option("--carrier", carrier_path)->required();

  auto* score = app.add_subcommand("score", "Dimensional metrics for a model output");
  score->add_option("--spec", spec_path)->required();
  score->add_option("--output", output_path)->required();
  score->add_option("--carrier", carrier_path, "Optional carrier, adds L_enc");

  auto* audit = app.add_subcommand("audit", "Emit an audit record (JSONL) and apply the CI gate");
  audit->add_option("--spec", audit_flags.spec)->required();
  audit->add_option("--carrier", audit_flags.carrier)->required();
  audit->add_option("--output", audit_flags.output)->required();
  audit->add_option("--world", audit_flags.world, "World config used to label privacy for unhinted dimensions");
  audit->add_option("--max-drift", audit_flags.max_drift, "Fail when drift exceeds this value");
  audit->add_option("--r-threshold", audit_flags.r_threshold)->check(CLI::Range(0.0, 1.0));
  audit->add_option("--f-threshold", audit_flags.f_threshold)->check(CLI::Range(0.0, 1.0));
  audit->add_option("--theta-pub", audit_flags.theta_pub)->check(CLI::Range(0.0, 1.0));

  auto* ablate = app.add_subcommand("ablate", "Run FULL + single-dimension ablations over a synthetic world");
  ablate->add_option("config", exp_flags.config, "Experiment config JSON")->required();
  ablate->add_option("--summary", exp_flags.summary, "Write the summary JSON here");

  auto* perturb = app.add_subcommand("perturb", "Weight-perturbation sweep (plateau and cliff)");
  perturb->add_option("config", exp_flags.config, "Experiment config JSON (default: built-in 30-cell grid)");
  perturb->add_option("--summary", exp_flags.summary, "Write the summary JSON here");

  auto* tiil = app.add_subcommand("tiil-check", "Enumerate DPI and privacy verdicts for a world");
  tiil->add_option("--world", world_path)->required();
  tiil->add_option("--task", task_filter);
  tiil->add_option("--theta-pub", theta_pub)->check(CLI::Range(0.0, 1.0));

  auto* report = app.add_subcommand("report", "Render audit records as text, markdown or json");
  report->add_option("records", records_path, "Audit record JSONL")->required();

  auto* demo_cmd = app.add_subcommand("demo", "Structural-fidelity split scenario end to end");
  demo_cmd->add_option("--max-drift", max_drift, "Fail when drift exceeds this value");
  demo_cmd->add_option("--emit-dir", emit_dir, "Also write the scenario's spec, carrier, output and world files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInputError;
  }
  if (seed_opt->count() > 0) g.seed = seed_value;

  const Streams s{out, err};
  try {
    if (*validate) return cmd_validate(g, spec_path, s);
    if (*mask) return cmd_mask(g, spec_path, carrier_path, s);
    if (*score) return cmd_score(g, spec_path, output_path, carrier_path, s);
    if (*audit) return cmd_audit(g, audit_flags, s);
    if (*ablate) return cmd_ablate(g, exp_flags, s);
    if (*perturb) return cmd_perturb(g, exp_flags, s);
    if (*tiil) return cmd_tiil(g, world_path, task_filter, theta_pub, s);
    if (*report) return cmd_report(g, records_path, s);
    if (*demo_cmd) return cmd_demo(g, max_drift, emit_dir, s);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::Internal ? kExitInternalError : kExitInputError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternalError;
  }
  err << "internal error: no subcommand dispatched\n";
  return kExitInternalError;
}

}  // namespace ist
