// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.
//
// usage: ist_acceptance [path-to-ist-binary]

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ist/audit.hpp"
#include "ist/demo.hpp"
#include "ist/error.hpp"
#include "ist/experiments.hpp"
#include "ist/info_oracle.hpp"
#include "ist/metrics.hpp"
#include "ist/numeric.hpp"
#include "ist/prior_sim.hpp"
#include "ist/spec_io.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace ist;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects the first few failure messages of a criterion.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    ++failures_;
    if (messages_.size() < 5) messages_.push_back(what);
  }
  bool ok() const { return failures_ == 0; }
  std::string summary() const {
    std::ostringstream s;
    s << checks_ << " checks";
    if (failures_) {
      s << ", " << failures_ << " failed:";
      for (const auto& m : messages_) s << " [" << m << "]";
    }
    return s.str();
  }

 private:
  std::size_t checks_ = 0;
  std::size_t failures_ = 0;
  std::vector<std::string> messages_;
};

std::string fmt(double v, int prec = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

fs::path g_ist;     // real binary; empty when not supplied
fs::path g_scratch;

std::string quote(const std::string& s) { return "'" + s + "'"; }

int run_ist(const std::string& args, const fs::path& stdout_file = {}) {
  std::string cmd = quote(g_ist.string()) + " " + args;
  cmd += " >" + (stdout_file.empty() ? std::string("/dev/null") : quote(stdout_file.string()));
  cmd += " 2>>" + quote((g_scratch / "stderr.log").string());
  const int status = std::system(cmd.c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

std::vector<DimensionId> ids_for(std::size_t n) {
  std::vector<DimensionId> ids;
  for (std::size_t i = 0; i < n; ++i) ids.emplace_back("d" + std::to_string(i));
  return ids;
}

// 1 --------------------------------------------------------------------------
Outcome metric_identity_fuzz() {
  Checker c;
  std::mt19937_64 rng(0x5eed0001);
  std::uniform_real_distribution<double> u(0, 1);
  const auto all_ids = ids_for(16);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = 1 + rng() % 16;
    const auto w = oracle::random_simplex(rng, n, 0.15);
    const std::span<const DimensionId> ids(all_ids.data(), n);
    std::vector<std::uint8_t> m(n);
    for (auto& b : m) b = rng() % 2;
    const bool pointwise = trial % 2 == 0;  // half the instances have f <= r everywhere
    DimensionScores s;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = u(rng) < 0.3 ? 1.0 : u(rng);
      const double f = pointwise ? r * u(rng) : u(rng);
      s.entries.push_back({ids[i], r, f});
    }
    const auto mask = EncodingMask::from_values(ids, m);
    const double l = encoding_loss(w, mask);
    const auto a = aggregate(w, s);
    const std::string tag = "trial " + std::to_string(trial);
    c.expect(l >= 0 && l <= 1, tag + " l_enc range");
    c.expect(a.s_icmw >= 0 && a.s_icmw <= 1, tag + " s range");
    c.expect(a.f_icmw >= 0 && a.f_icmw <= 1, tag + " f range");
    c.expect(a.d_drift >= 0 && a.d_drift <= 1, tag + " d range");
    c.expect(a.d_drift + a.f_icmw == 1.0, tag + " d + f != 1");
    if (pointwise) c.expect(a.f_icmw <= a.s_icmw, tag + " f > s");
    // Monotone: encoding one more dimension never increases the loss.
    for (std::size_t i = 0; i < n; ++i) {
      if (m[i]) continue;
      auto more = m;
      more[i] = 1;
      c.expect(encoding_loss(w, EncodingMask::from_values(ids, more)) <= l, tag + " l_enc not monotone");
    }
  }
  return {c.ok(), c.summary()};
}

// 2 --------------------------------------------------------------------------
Outcome dpi_suite() {
  Checker c;
  std::mt19937_64 rng(0x5eed0002);
  double min_slack = 1e300;
  for (int trial = 0; trial < 150; ++trial) {
    std::vector<Variable> vars{{"v", 2 + rng() % 5}};
    const std::size_t n_evidence = 1 + rng() % 3;
    std::vector<std::string> evidence;
    std::size_t cells = vars[0].cardinality;
    for (std::size_t i = 0; i < n_evidence; ++i) {
      vars.push_back({"e" + std::to_string(i), 2 + rng() % 4});
      evidence.push_back(vars.back().name);
      cells *= vars.back().cardinality;
    }
    const DiscreteJoint j(vars, oracle::random_simplex(rng, cells, 0.25));
    const std::size_t out = 2 + rng() % 4;
    const std::string tag = "joint " + std::to_string(trial);
    for (const auto& d : {bayes_decoder(j, "v", evidence), random_deterministic_decoder(j, evidence, out, rng()),
                          random_stochastic_decoder(j, evidence, out, rng())}) {
      const auto r = verify_dpi(j, d, "v");
      min_slack = std::min(min_slack, r.slack);
      c.expect(r.holds && r.slack >= -1e-9, tag + " dpi slack " + fmt(r.slack));

      // MI sanity on the decoded joint.
      const auto jg = apply_decoder(j, d);
      const std::vector<std::string> vx{"v"}, gx{"g"};
      const double ivg = mutual_information(jg, vx, gx);
      c.expect(ivg >= 0, tag + " I(v;g) negative");
      c.expect(std::abs(ivg - mutual_information(jg, gx, vx)) <= 1e-12, tag + " MI asymmetric");
      c.expect(ivg <= joint_entropy(jg, vx) + 1e-9 && ivg <= joint_entropy(jg, gx) + 1e-9, tag + " MI bound");
    }
    const std::vector<std::string> vx{"v"};
    const double ive = mutual_information(j, vx, evidence);
    c.expect(ive >= 0, tag + " I(v;e) negative");
    c.expect(std::abs(ive - mutual_information(j, evidence, vx)) <= 1e-12, tag + " MI asymmetric");
    c.expect(ive <= joint_entropy(j, vx) + 1e-9 && ive <= joint_entropy(j, evidence) + 1e-9, tag + " MI bound");
    if (n_evidence == 1) {
      // Independent KL-form oracle on the two-variable table.
      const std::size_t kv = vars[0].cardinality, ke = vars[1].cardinality;
      std::vector<std::vector<double>> t(kv, std::vector<double>(ke));
      for (std::size_t a = 0; a < kv; ++a) {
        for (std::size_t b = 0; b < ke; ++b) t[a][b] = j.table()[a * ke + b];
      }
      c.expect(std::abs(ive - oracle::mutual_information_kl(t)) <= 1e-9, tag + " MI vs oracle");
    }
  }
  auto o = Outcome{c.ok(), c.summary()};
  o.detail += ", 150 joints x 3 decoder families, min slack " + fmt(min_slack);
  return o;
}

// 3 --------------------------------------------------------------------------
Outcome tiil_regime() {
  Checker c;
  std::mt19937_64 rng(0x5eed0003);
  std::uniform_real_distribution<double> u(0, 1);
  std::size_t full_state = 0;
  for (int world_no = 0; world_no < 20; ++world_no) {
    const std::size_t n = 2 + rng() % 3;
    const std::size_t k_dim = rng() % n;
    const auto weights = oracle::random_simplex(rng, n);
    WorldConfig cfg;
    TaskConfig t;
    t.task_id = "w" + std::to_string(world_no);
    for (std::size_t i = 0; i < n; ++i) {
      DimensionConfig d;
      d.id = DimensionId("d" + std::to_string(i));
      d.weight = weights[i];
      d.alphabet_size = 2 + rng() % 5;
      d.lambda = i == k_dim ? 0.0 : u(rng);
      t.dims.push_back(d);
    }
    cfg.tasks.push_back(t);
    const auto world = build_world(cfg, rng());
    const auto rep = check_tiil(world, 0, k_dim, rng());
    const std::string tag = "world " + std::to_string(world_no);
    full_state += rep.full_carrier_state;
    c.expect(rep.bayes_accuracy <= rep.chance + 1e-9,
             tag + " bayes " + fmt(rep.bayes_accuracy) + " > chance " + fmt(rep.chance));
    c.expect(rep.i_v_evidence <= 1e-9, tag + " I(v;evidence) " + fmt(rep.i_v_evidence));
    c.expect(rep.decoders.size() >= 3, tag + " decoder count");
    for (const auto& d : rep.decoders) {
      c.expect(d.i_v_g <= 1e-9, tag + " " + d.family + " I(v;g) " + fmt(d.i_v_g));
      c.expect(d.dpi.holds, tag + " " + d.family + " dpi");
    }
    // Independent check: generic substitution is right exactly 1/K of the time.
    const double k = static_cast<double>(world.tasks[0].dims[k_dim].alphabet_size());
    c.expect(std::abs(rep.chance - 1.0 / k) <= 1e-12, tag + " chance != 1/K");
  }
  auto o = Outcome{c.ok(), c.summary()};
  o.detail += ", " + std::to_string(full_state) + "/20 on the full carrier state";
  return o;
}

// 4 --------------------------------------------------------------------------
Outcome split_mechanism() {
  Checker c;
  const auto world = demo::world();
  const auto& task = world.tasks[0];
  const auto weights = task.weights();
  const auto spec = task.spec();
  const auto mask = compute_mask(demo::spec(), demo::carrier());

  double private_mass = 0;
  for (const auto& d : task.dims) {
    if (d.lambda == 0.0) {
      private_mass += d.weight;
      c.expect(d.alphabet_size() == 10, "private alphabet size");
    }
  }
  c.expect(std::abs(private_mass - 0.4) <= 1e-12, "private mass " + fmt(private_mass));
  c.expect(mask.values() == std::vector<std::uint8_t>{1, 0, 0, 0, 0}, "private dims ablated");

  constexpr std::size_t kN = 10000;
  std::size_t in_zone = 0;
  for (std::size_t i = 0; i < kN; ++i) {
    const auto out = simulate_output(world, 0, mask, RecoveryMode::Argmax, demo::kSeed + i, i);
    const auto scores = score_output(spec, out.realized_values());
    const auto agg = aggregate(weights, scores);
    const int ga = synthesize_ga(scores, weights);
    c.expect(ga == 5 && agg.f_icmw <= 0.64, "argmax output " + std::to_string(i));
    in_zone += detect_split_zone(ga, agg.f_icmw);
  }
  c.expect(in_zone == kN, "split-zone rate " + fmt(double(in_zone) / kN));

  // Monte Carlo vs closed form, two ways. Sample mode on the shipped world:
  const double want_sample = expected_f_icmw(world, 0, mask, RecoveryMode::Sample);
  CompensatedAccumulator sample_acc;
  for (std::size_t i = 0; i < kN; ++i) {
    const auto out = simulate_output(world, 0, mask, RecoveryMode::Sample, demo::kSeed, i);
    sample_acc.add(aggregate(weights, score_output(spec, out.realized_values())).f_icmw);
  }
  const double mc_sample = sample_acc.value() / kN;
  c.expect(std::abs(mc_sample - want_sample) <= 0.015,
           "sample MC " + fmt(mc_sample) + " vs " + fmt(want_sample));

  // Argmax mode with the private user values redrawn per world.
  auto cfg = demo::world_config();
  for (auto& d : cfg.tasks[0].dims) {
    if (d.lambda == 0.0) d.user_value.reset();
  }
  const double want_argmax = expected_f_icmw(world, 0, mask, RecoveryMode::Argmax);
  CompensatedAccumulator argmax_acc;
  for (std::size_t i = 0; i < kN; ++i) {
    const auto w = build_world(cfg, demo::kSeed + 1 + i);
    const auto out = simulate_output(w, 0, mask, RecoveryMode::Argmax, demo::kSeed);
    argmax_acc.add(aggregate(weights, score_output(w.tasks[0].spec(), out.realized_values())).f_icmw);
  }
  const double mc_argmax = argmax_acc.value() / kN;
  c.expect(std::abs(mc_argmax - want_argmax) <= 0.015,
           "argmax MC " + fmt(mc_argmax) + " vs " + fmt(want_argmax));
  c.expect(std::abs(want_argmax - 0.64) <= 1e-12 && std::abs(want_sample - 0.64) <= 1e-12, "closed form 0.64");

  auto o = Outcome{c.ok(), c.summary()};
  o.detail += ", split-zone rate " + fmt(100.0 * in_zone / kN) + "%, E[f] " + fmt(want_argmax) +
              ", MC sample " + fmt(mc_sample) + ", MC argmax " + fmt(mc_argmax);
  return o;
}

// 5 --------------------------------------------------------------------------
Outcome plateau_cliff() {
  Checker c;
  const auto grid = default_perturbation_grid(20240917);
  const auto perts = default_perturbations();
  const auto rep = run_weight_perturbation(grid, perts, PerturbationOptions{});
  c.expect(rep.cell_count == 30, "cell count " + std::to_string(rep.cell_count));
  std::size_t order_preserving = 0;
  for (std::size_t i = 0; i < rep.cells.size(); ++i) {
    const auto& cell = rep.cells[i];
    const auto& spec = perts[i % perts.size()];
    c.expect(cell.perturbation == spec.label(), "cell order: " + cell.perturbation + " vs " + spec.label());
    if (spec.order_preserving_kind()) {
      ++order_preserving;
      c.expect(cell.delta_vs_baseline == 0.0,
               cell.model_tag + "/" + cell.task_id + " " + cell.perturbation + " dWAS " + fmt(cell.delta_vs_baseline));
      c.expect(cell.ranking_preserved, cell.task_id + " " + cell.perturbation + " ranking changed");
    }
    if (spec.kind == PerturbationSpec::Kind::FullInversion) {
      c.expect(cell.delta_vs_baseline < 0.0, cell.model_tag + "/" + cell.task_id + " inversion did not drop");
    }
  }
  c.expect(rep.inversion_cells == 30 && rep.inversion_drops == 30,
           "inversion drops " + std::to_string(rep.inversion_drops) + "/" + std::to_string(rep.inversion_cells));
  c.expect(rep.cliff_onsets == 0, "order-preserving run crossed the budget boundary");
  const double mean_drop = rep.mean_inversion_drop.value_or(0.0);
  c.expect(mean_drop >= 0.1, "mean inversion drop " + fmt(mean_drop));
  auto o = Outcome{c.ok(), c.summary()};
  o.detail += ", " + std::to_string(order_preserving) + " order-preserving runs with dWAS = 0, cliff " +
              std::to_string(rep.inversion_drops) + "/" + std::to_string(rep.inversion_cells) + ", mean drop " +
              fmt(mean_drop);
  return o;
}

// 6 --------------------------------------------------------------------------
Outcome weight_estimation() {
  Checker c;
  std::mt19937_64 rng(0x5eed0006);
  double worst_analytic = 0, worst_sampling = 0, worst_argmax_records = 0;
  for (int world_no = 0; world_no < 6; ++world_no) {
    const std::size_t n = 3 + world_no % 3;
    const auto w = oracle::random_simplex(rng, n);
    WorldConfig cfg;
    TaskConfig t;
    t.task_id = "private_" + std::to_string(world_no);
    for (std::size_t i = 0; i < n; ++i) {
      DimensionConfig d;
      d.id = DimensionId("d" + std::to_string(i));
      d.weight = w[i];
      d.alphabet_size = world_no % 2 ? 20 : 50;
      d.lambda = 0.0;
      d.user_value = 1 + rng() % (d.alphabet_size - 1);  // avoid the generic default
      t.dims.push_back(d);
    }
    cfg.tasks.push_back(t);
    const auto world = build_world(cfg, 1000 + world_no);
    const auto truth = world.tasks[0].weights();
    const auto l1 = [&](const std::vector<double>& est) {
      double e = 0;
      for (std::size_t i = 0; i < n; ++i) e += std::abs(est[i] - truth[i]);
      return e;
    };
    const double analytic = l1(analytic_weight_estimate(world, 0, RecoveryMode::Argmax));
    worst_analytic = std::max(worst_analytic, analytic);
    c.expect(analytic <= 1e-9, t.task_id + " analytic L1 " + fmt(analytic));

    AblationPlan plan;
    plan.mode = RecoveryMode::Argmax;
    const double argmax_records = l1(estimate_weights_by_ablation(run_ablation(world, plan)));
    worst_argmax_records = std::max(worst_argmax_records, argmax_records);
    c.expect(argmax_records <= 1e-9, t.task_id + " argmax records L1 " + fmt(argmax_records));

    plan.mode = RecoveryMode::Sample;
    plan.replicates = 2000;
    plan.seed = 77 + world_no;
    const double sampling = l1(estimate_weights_by_ablation(run_ablation(world, plan)));
    worst_sampling = std::max(worst_sampling, sampling);
    c.expect(sampling <= 0.02, t.task_id + " sampling L1 " + fmt(sampling));
  }
  auto o = Outcome{c.ok(), c.summary()};
  o.detail += ", worst L1 analytic " + fmt(worst_analytic) + ", argmax records " + fmt(worst_argmax_records) +
              ", sampling (2000 reps) " + fmt(worst_sampling);
  return o;
}

// 7 --------------------------------------------------------------------------
Outcome privacy_migration() {
  Checker c;
  const std::vector<std::size_t> ks{2, 3, 4, 5, 10, 20};
  const std::vector<double> thetas{0.5, 0.6, 0.75, 0.9, 0.95, 1.0};
  std::size_t pairs = 0;
  for (std::size_t k : ks) {
    for (double theta : thetas) {
      ++pairs;
      const PrivacyThresholds th{theta, 0.1};
      const std::string tag = "K=" + std::to_string(k) + " theta=" + fmt(theta);
      int flips = 0;
      std::optional<int> flip_at;
      std::optional<int> oracle_flip;
      PrivacyLabel prev = PrivacyLabel::Private;
      for (int i = 0; i <= 20; ++i) {
        const double lambda = i / 20.0;
        WorldConfig cfg;
        TaskConfig t;
        t.task_id = "sweep";
        DimensionConfig d;
        d.id = DimensionId("x");
        d.weight = 1.0;
        d.alphabet_size = k;
        d.lambda = lambda;
        d.user_value = 0;
        t.dims.push_back(d);
        cfg.tasks.push_back(t);
        const auto verdict = classify_privacy(build_world(cfg, 1), 0, DimensionId("x"), th);
        if (i == 0) {
          c.expect(verdict.label == PrivacyLabel::Private, tag + " public at lambda 0");
        } else if (verdict.label != prev) {
          ++flips;
          if (verdict.label == PrivacyLabel::Public) flip_at = i;
        }
        prev = verdict.label;
        // Independent oracle: enumerate p(v, e) and apply the thresholds.
        const double acc = oracle::bayes_accuracy_table(oracle::prior_evidence_table(k, lambda));
        const double chance = 1.0 / static_cast<double>(k);
        const bool pub = acc >= theta - 1e-12 && acc >= chance + 0.1 - 1e-12;
        if (pub && !oracle_flip) oracle_flip = i;
      }
      c.expect(flips == 1, tag + " flips " + std::to_string(flips));
      c.expect(flip_at == oracle_flip, tag + " flip index differs from enumeration");
      if (flip_at) {
        // The flip is the first grid point at or past the closed-form threshold.
        const double lstar = public_threshold_lambda(k, th);
        const double at = *flip_at / 20.0;
        const double before = (*flip_at - 1) / 20.0;
        c.expect(at >= lstar - 1e-12 && before < lstar - 1e-12,
                 tag + " flip at " + fmt(at) + " vs threshold " + fmt(lstar));
      }
    }
  }
  auto o = Outcome{c.ok(), c.summary()};
  o.detail += ", " + std::to_string(pairs) + " (K, theta) pairs x 21 lambda values";
  return o;
}

// 8 --------------------------------------------------------------------------
std::string random_token(std::mt19937_64& rng) {
  static const char* pool[] = {"alpha", "beta", "board_members", "q3", "emea", "x", "one_page", "formal"};
  return std::string(pool[rng() % 8]) + (rng() % 3 ? "" : std::to_string(rng() % 100));
}

std::string random_text(std::mt19937_64& rng) {
  static const char* pool[] = {"plain words", "quote \" and backslash \\", "line\nbreak", "tab\there",
                               "caf\xc3\xa9 na\xc3\xafve", "\xe2\x9c\x93 check", "", "{\"json\": [1, 2]}"};
  return pool[rng() % 8];
}

ValueRef random_value(std::mt19937_64& rng) {
  return rng() % 3 ? ValueRef::token(random_token(rng)) : ValueRef::text(random_text(rng));
}

std::vector<Dimension> random_dims(std::mt19937_64& rng, const std::string& prefix, int depth, int& counter) {
  const std::size_t n = 1 + rng() % (depth == 0 ? 6 : 3);
  const auto w = oracle::random_simplex(rng, n, 0.1);
  std::vector<Dimension> dims;
  for (std::size_t i = 0; i < n; ++i) {
    Dimension d;
    d.id = DimensionId(prefix + "d" + std::to_string(counter++));
    d.weight = w[i];
    d.intended_value = random_value(rng);
    const auto h = rng() % 4;
    if (h == 1) d.privacy_hint = PrivacyHint::Public;
    if (h == 2) d.privacy_hint = PrivacyHint::Private;
    if (h == 3 && rng() % 2) d.privacy_hint = PrivacyHint::Unknown;
    if (depth < 2 && rng() % 4 == 0) d.children = random_dims(rng, d.id.str() + ".", depth + 1, counter);
    dims.push_back(std::move(d));
  }
  return dims;
}

Outcome io_contracts() {
  Checker c;
  std::mt19937_64 rng(0x5eed0008);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 1000; ++i) {
    const std::string tag = "instance " + std::to_string(i);
    int counter = 0;
    IntentSpec spec;
    spec.task_id = "task_" + std::to_string(i);
    spec.task_type = random_token(rng);
    spec.dimensions = random_dims(rng, "", 0, counter);
    const auto spec_text = serialize_intent_spec(spec);
    const auto spec_back = parse_intent_spec(spec_text);
    c.expect(spec_back == spec, tag + " spec round trip");
    c.expect(serialize_intent_spec(spec_back) == spec_text, tag + " spec bytes");

    const auto ids = flat_ids(spec);
    Carrier carrier;
    carrier.task_id = spec.task_id;
    if (rng() % 2) carrier.text = random_text(rng);
    for (const auto& id : ids) {
      if (rng() % 2) carrier.encoded_dimensions.push_back(id);
    }
    const auto carrier_text = serialize_carrier(carrier);
    c.expect(parse_carrier(carrier_text) == carrier, tag + " carrier round trip");
    c.expect(serialize_carrier(parse_carrier(carrier_text)) == carrier_text, tag + " carrier bytes");

    OutputRecord rec;
    rec.task_id = spec.task_id;
    rec.condition = rng() % 2 ? "FULL" : "ABL_" + ids[rng() % ids.size()].str();
    rec.model_tag = random_token(rng);
    rec.mask = compute_mask(spec, carrier);
    for (const auto& id : ids) {
      if (rng() % 4) rec.realized_values[id] = random_value(rng);
    }
    rec.s_icmw = u(rng);
    rec.f_icmw = rec.s_icmw * u(rng);
    rec.ga = 1 + static_cast<int>(rng() % 5);
    if (rng() % 2) rec.text = random_text(rng);
    const auto line = serialize_record(rec);
    c.expect(parse_record(line) == rec, tag + " record round trip");
    c.expect(serialize_record(parse_record(line)) == line, tag + " record bytes");
    c.expect(line.find('\n') == std::string::npos, tag + " record spans lines");
  }

  // End to end through the real binary.
  if (g_ist.empty()) {
    c.expect(false, "no ist binary supplied");
    return {c.ok(), c.summary()};
  }
  const auto audit_out = g_scratch / "demo_audit.jsonl";
  const int demo_code = run_ist("--timestamp 2026-01-01T00:00:00Z demo --max-drift 0.2", audit_out);
  c.expect(demo_code == 1, "ist demo --max-drift 0.2 exit " + std::to_string(demo_code));
  try {
    const auto recs = parse_audit_records(read_text_file(audit_out));
    c.expect(recs.size() == 1, "demo emitted " + std::to_string(recs.size()) + " records");
    if (!recs.empty()) {
      c.expect(recs[0].split_zone && recs[0].ga == 5 && recs[0].private_at_risk.size() == 4, "demo record content");
    }
  } catch (const Error& e) {
    c.expect(false, std::string("demo record not schema-valid: ") + e.what());
  }

  const auto write = [&](const char* name, const std::string& body) {
    const auto p = g_scratch / name;
    write_text_file(p, body);
    return quote(p.string());
  };
  const auto data = fs::path(IST_DATA_DIR);
  const std::string spec_arg = quote((data / "demo/spec.json").string());
  const std::vector<std::pair<std::string, std::string>> malformed = {
      {"empty spec", "validate " + write("empty.json", "")},
      {"truncated spec", "validate " + write("trunc.json", "{\"format_version\": \"1\", \"task_id\": ")},
      {"negative weight",
       "validate " + write("neg.json", R"({"format_version":"1","task_id":"t","task_type":"x","dimensions":[
         {"id":"a","weight":-0.1,"intended_value":"v"},{"id":"b","weight":1.1,"intended_value":"v"}]})")},
      {"unknown field",
       "validate " + write("unk.json", R"({"format_version":"1","task_id":"t","task_type":"x","extra":1,
         "dimensions":[{"id":"a","weight":1,"intended_value":"v"}]})")},
      {"missing file", "validate " + quote((g_scratch / "does_not_exist.json").string())},
      {"bad output", "score --spec " + spec_arg + " --output " + write("out.json", "[1, 2, 3]")},
      {"bad carrier", "mask --spec " + spec_arg + " --carrier " + write("car.json", R"({"task_id":"t"})")},
      {"unknown carrier dim",
       "mask --spec " + spec_arg + " --carrier " +
           write("car2.json", R"({"task_id":"competitive_analysis","encoded_dimensions":["why"]})")},
      {"bad audit jsonl", "report " + write("audit.jsonl", "{\"task_id\":\"t\"}\nnot json\n")},
      {"bad world", "tiil-check --world " + write("world.json", R"({"tasks":[{"task_id":"t","dims":[]}]})")},
      {"bad experiment", "ablate " + write("exp.json", R"({"mode":"sometimes"})")},
      {"unknown flag", "demo --no-such-flag"},
      {"unknown command", "frobnicate"},
  };
  for (const auto& [name, args] : malformed) {
    const int code = run_ist(args);
    c.expect(code == 2, name + " exit " + std::to_string(code));
  }
  auto o = Outcome{c.ok(), c.summary()};
  o.detail += ", 1000 spec/carrier/record round trips, demo exit " + std::to_string(demo_code) + ", " +
              std::to_string(malformed.size()) + " malformed inputs";
  return o;
}

// 9 --------------------------------------------------------------------------
Outcome determinism() {
  Checker c;
  if (g_ist.empty()) {
    c.expect(false, "no ist binary supplied");
    return {c.ok(), c.summary()};
  }
  const auto data = fs::path(IST_DATA_DIR);
  struct Job {
    std::string name;
    std::string args;
  };
  const std::vector<Job> jobs = {
      {"ablate", "ablate " + quote((data / "ablate_config.json").string())},
      {"perturb", "perturb " + quote((data / "perturb_config.json").string())},
      {"perturb-default", "perturb"},
  };
  std::size_t bytes = 0;
  for (const auto& job : jobs) {
    std::vector<std::string> records, summaries;
    for (const char* threads : {"1", "4"}) {
      const auto rec = g_scratch / (job.name + "_t" + threads + ".jsonl");
      const auto sum = g_scratch / (job.name + "_t" + threads + ".summary.json");
      const int code = run_ist("--seed 424242 --threads " + std::string(threads) + " --out " + quote(rec.string()) +
                               " " + job.args + " --summary " + quote(sum.string()));
      c.expect(code == 0, job.name + " threads " + threads + " exit " + std::to_string(code));
      records.push_back(fs::exists(rec) ? read_text_file(rec) : std::string());
      summaries.push_back(fs::exists(sum) ? read_text_file(sum) : std::string());
    }
    c.expect(!records[0].empty(), job.name + " produced no records");
    c.expect(records[0] == records[1], job.name + " records differ across thread counts");
    c.expect(summaries[0] == summaries[1], job.name + " summaries differ across thread counts");
    bytes += records[0].size();
  }
  auto o = Outcome{c.ok(), c.summary()};
  o.detail += ", " + std::to_string(bytes) + " record bytes compared at --threads 1 vs 4";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_ist = fs::absolute(argv[1]);
  g_scratch = fs::temp_directory_path() / ("ist_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(g_scratch);

  struct Criterion {
    int id;
    const char* name;
    double budget_s;  // 0: no runtime bound
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "metric identity fuzz (10^4 instances)", 5.0, metric_identity_fuzz},
      {2, "data processing inequality suite", 10.0, dpi_suite},
      {3, "generic-substitution bound in 20 uniform-prior worlds", 0.0, tiil_regime},
      {4, "structural-fidelity split on the demo world", 0.0, split_mechanism},
      {5, "plateau plus cliff on the 30-cell grid", 30.0, plateau_cliff},
      {6, "weight estimation by ablation", 0.0, weight_estimation},
      {7, "privacy boundary migration under lambda sweep", 0.0, privacy_migration},
      {8, "I/O contracts and CLI exit codes", 0.0, io_contracts},
      {9, "thread-count independence of ablate and perturb", 0.0, determinism},
  };

  int failed = 0;
  for (const auto& cr : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = cr.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (cr.budget_s > 0 && secs >= cr.budget_s) {
      o.pass = false;
      o.detail += ", over the " + fmt(cr.budget_s) + " s budget";
    }
    failed += !o.pass;
    std::printf("[%s] %d. %s (%.2f s): %s\n", o.pass ? "PASS" : "FAIL", cr.id, cr.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  std::error_code ec;
  fs::remove_all(g_scratch, ec);
  return failed == 0 ? 0 : 1;
}
