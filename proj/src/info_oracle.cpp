#include "ist/info_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ist/error.hpp"
#include "ist/numeric.hpp"

namespace ist {

namespace {

constexpr double kAccuracyTolerance = 1e-12;

std::size_t checked_product(std::span<const std::size_t> cards) {
  std::size_t total = 1;
  for (auto c : cards) {
    if (c == 0) throw Error(ErrorKind::InvalidDistribution, "variable with empty alphabet");
    if (total > kMaxJointCells / c) {
      throw Error(ErrorKind::WorldTooLarge,
                  "joint table exceeds " + std::to_string(kMaxJointCells) + " cells");
    }
    total *= c;
  }
  return total;
}

std::vector<std::string> dedup(std::span<const std::string> names) {
  std::vector<std::string> out;
  for (const auto& n : names) {
    if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
  }
  return out;
}

// Calls fn(cell, projected_index) for every cell, where projected_index is
// the row-major index of the cell's values on `selected` (variable
// positions, in order).
template <typename Fn>
void for_each_projection(const DiscreteJoint& joint, const std::vector<std::size_t>& selected, Fn&& fn) {
  const auto& vars = joint.variables();
  const std::size_t n = vars.size();
  std::vector<std::size_t> proj_stride(n, 0);
  std::size_t stride = 1;
  for (std::size_t i = selected.size(); i-- > 0;) {
    proj_stride[selected[i]] = stride;
    stride *= vars[selected[i]].cardinality;
  }
  std::vector<std::size_t> digits(n, 0);
  std::size_t proj = 0;
  const std::size_t cells = joint.cell_count();
  for (std::size_t cell = 0; cell < cells; ++cell) {
    fn(cell, proj);
    for (std::size_t v = n; v-- > 0;) {
      if (++digits[v] < vars[v].cardinality) {
        proj += proj_stride[v];
        break;
      }
      proj -= proj_stride[v] * (digits[v] - 1);
      digits[v] = 0;
    }
  }
}

std::vector<std::size_t> positions(const DiscreteJoint& joint, std::span<const std::string> names) {
  std::vector<std::size_t> out;
  for (const auto& n : dedup(names)) out.push_back(joint.index_of(n));
  return out;
}

std::size_t cells_of(const DiscreteJoint& joint, std::span<const std::string> names) {
  std::vector<std::size_t> cards;
  for (const auto& n : dedup(names)) cards.push_back(joint.cardinality(n));
  return checked_product(cards);
}

Decoder make_decoder(const DiscreteJoint& joint, std::vector<std::string> evidence,
                     std::size_t output_size, std::string output_name) {
  if (output_size == 0) throw Error(ErrorKind::DomainMismatch, "decoder output alphabet is empty");
  Decoder d;
  d.output_size = output_size;
  d.output_name = std::move(output_name);
  d.evidence = dedup(evidence);
  const std::size_t cells = cells_of(joint, d.evidence);
  d.rows.assign(cells * output_size, 0.0);
  return d;
}

}  // namespace

DiscreteJoint::DiscreteJoint(std::vector<Variable> variables, std::vector<double> table)
    : variables_(std::move(variables)), table_(std::move(table)) {
  std::set<std::string> names;
  std::vector<std::size_t> cards;
  for (const auto& v : variables_) {
    if (!names.insert(v.name).second) throw Error(ErrorKind::InvalidDistribution, "duplicate variable name", v.name);
    cards.push_back(v.cardinality);
  }
  if (variables_.empty()) throw Error(ErrorKind::InvalidDistribution, "joint needs at least one variable");
  const std::size_t cells = checked_product(cards);
  if (cells != table_.size()) {
    throw Error(ErrorKind::InvalidDistribution,
                "table has " + std::to_string(table_.size()) + " cells, alphabets imply " + std::to_string(cells));
  }
  for (double p : table_) {
    if (!std::isfinite(p) || p < 0.0) throw Error(ErrorKind::InvalidDistribution, "probabilities must be finite and >= 0");
  }
  if (std::fabs(compensated_sum(table_) - 1.0) > 1e-9) {
    throw Error(ErrorKind::InvalidDistribution, "probabilities must sum to 1");
  }
}

std::size_t DiscreteJoint::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (variables_[i].name == name) return i;
  }
  throw Error(ErrorKind::UnknownVariable, "no such variable in joint", std::string(name));
}

std::size_t DiscreteJoint::cardinality(std::string_view name) const {
  return variables_[index_of(name)].cardinality;
}

std::vector<double> DiscreteJoint::marginal(std::span<const std::string> names) const {
  const auto selected = positions(*this, names);
  std::vector<double> out(cells_of(*this, names), 0.0);
  std::vector<double> carry(out.size(), 0.0);
  for_each_projection(*this, selected, [&](std::size_t cell, std::size_t proj) {
    // Neumaier update per bucket; cell order is fixed so sums are reproducible.
    const double v = table_[cell];
    double& s = out[proj];
    const double t = s + v;
    carry[proj] += std::fabs(s) >= std::fabs(v) ? (s - t) + v : (v - t) + s;
    s = t;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += carry[i];
  return out;
}

double entropy(std::span<const double> dist) {
  if (dist.empty()) throw Error(ErrorKind::InvalidDistribution, "empty distribution");
  for (double p : dist) {
    if (!std::isfinite(p) || p < 0.0) throw Error(ErrorKind::InvalidDistribution, "probabilities must be finite and >= 0");
  }
  if (std::fabs(compensated_sum(dist) - 1.0) > 1e-9) {
    throw Error(ErrorKind::InvalidDistribution, "probabilities must sum to 1");
  }
  CompensatedAccumulator acc;
  for (double p : dist) {
    if (p > 0.0) acc.add(-p * std::log2(p));
  }
  return std::max(0.0, acc.value());
}

double joint_entropy(const DiscreteJoint& joint, std::span<const std::string> names) {
  return entropy(joint.marginal(names));
}

double mutual_information(const DiscreteJoint& joint, std::span<const std::string> x,
                          std::span<const std::string> y) {
  std::vector<std::string> xy(x.begin(), x.end());
  xy.insert(xy.end(), y.begin(), y.end());
  const double mi = joint_entropy(joint, x) + joint_entropy(joint, y) - joint_entropy(joint, xy);
  if (mi < 0.0 && mi >= -1e-12) return 0.0;
  return mi;
}

double mutual_information(const DiscreteJoint& joint, std::string_view x, std::string_view y) {
  const std::string xs[] = {std::string(x)};
  const std::string ys[] = {std::string(y)};
  return mutual_information(joint, xs, ys);
}

DiscreteJoint apply_decoder(const DiscreteJoint& joint, const Decoder& decoder) {
  if (decoder.output_size == 0) throw Error(ErrorKind::DomainMismatch, "decoder output alphabet is empty");
  for (const auto& v : joint.variables()) {
    if (v.name == decoder.output_name) {
      throw Error(ErrorKind::DomainMismatch, "decoder output name collides with a joint variable", v.name);
    }
  }
  const auto selected = positions(joint, decoder.evidence);
  const std::size_t evidence_cells = cells_of(joint, decoder.evidence);
  if (decoder.rows.size() != evidence_cells * decoder.output_size) {
    throw Error(ErrorKind::DomainMismatch, "decoder rows do not match the evidence alphabet");
  }
  for (std::size_t e = 0; e < evidence_cells; ++e) {
    const std::span<const double> row(decoder.rows.data() + e * decoder.output_size, decoder.output_size);
    for (double p : row) {
      if (!std::isfinite(p) || p < 0.0) throw Error(ErrorKind::InvalidDistribution, "decoder row has invalid entries");
    }
    if (std::fabs(compensated_sum(row) - 1.0) > 1e-9) {
      throw Error(ErrorKind::InvalidDistribution, "decoder row does not sum to 1");
    }
  }
  const std::size_t g = decoder.output_size;
  std::vector<std::size_t> cards;
  for (const auto& v : joint.variables()) cards.push_back(v.cardinality);
  cards.push_back(g);
  std::vector<double> table(checked_product(cards), 0.0);
  const auto source = joint.table();
  for_each_projection(joint, selected, [&](std::size_t cell, std::size_t e) {
    for (std::size_t k = 0; k < g; ++k) table[cell * g + k] = source[cell] * decoder.rows[e * g + k];
  });
  auto vars = joint.variables();
  vars.push_back({decoder.output_name, g});
  return DiscreteJoint(std::move(vars), std::move(table));
}

Decoder constant_decoder(const DiscreteJoint& joint, std::vector<std::string> evidence,
                         std::size_t output_size, std::size_t value, std::string output_name) {
  if (value >= output_size) throw Error(ErrorKind::DomainMismatch, "constant outside output alphabet");
  auto d = make_decoder(joint, std::move(evidence), output_size, std::move(output_name));
  for (std::size_t e = 0; e < d.evidence_cells(); ++e) d.rows[e * output_size + value] = 1.0;
  return d;
}

Decoder identity_decoder(const DiscreteJoint& joint, std::string evidence, std::string output_name) {
  const std::size_t card = joint.cardinality(evidence);
  auto d = make_decoder(joint, {std::move(evidence)}, card, std::move(output_name));
  for (std::size_t e = 0; e < card; ++e) d.rows[e * card + e] = 1.0;
  return d;
}

Decoder random_deterministic_decoder(const DiscreteJoint& joint, std::vector<std::string> evidence,
                                     std::size_t output_size, std::uint64_t seed, std::string output_name) {
  auto d = make_decoder(joint, std::move(evidence), output_size, std::move(output_name));
  for (std::size_t e = 0; e < d.evidence_cells(); ++e) {
    const double u = unit_interval(derive_seed(seed, 0, e, 0));
    const auto choice = std::min(output_size - 1, static_cast<std::size_t>(u * static_cast<double>(output_size)));
    d.rows[e * output_size + choice] = 1.0;
  }
  return d;
}

Decoder random_stochastic_decoder(const DiscreteJoint& joint, std::vector<std::string> evidence,
                                  std::size_t output_size, std::uint64_t seed, std::string output_name) {
  auto d = make_decoder(joint, std::move(evidence), output_size, std::move(output_name));
  for (std::size_t e = 0; e < d.evidence_cells(); ++e) {
    std::vector<double> raw(output_size);
    for (std::size_t k = 0; k < output_size; ++k) raw[k] = unit_interval(derive_seed(seed, 1, e, k)) + 1e-3;
    const auto row = normalize_weights(raw);
    std::copy(row.begin(), row.end(), d.rows.begin() + static_cast<std::ptrdiff_t>(e * output_size));
  }
  return d;
}

Decoder bayes_decoder(const DiscreteJoint& joint, std::string_view target,
                      std::vector<std::string> evidence, std::string output_name) {
  const std::size_t k = joint.cardinality(target);
  auto d = make_decoder(joint, evidence, k, std::move(output_name));
  auto names = dedup(evidence);
  names.emplace_back(target);
  if (std::count(names.begin(), names.end(), std::string(target)) > 1) {
    // Target is itself evidence: the decoder just copies it.
    const auto pos = static_cast<std::size_t>(std::find(d.evidence.begin(), d.evidence.end(), std::string(target)) - d.evidence.begin());
    const auto sel = positions(joint, d.evidence);
    std::size_t stride = 1;
    for (std::size_t i = sel.size(); i-- > pos + 1;) stride *= joint.variables()[sel[i]].cardinality;
    for (std::size_t e = 0; e < d.evidence_cells(); ++e) d.rows[e * k + (e / stride) % k] = 1.0;
    return d;
  }
  const auto table = joint.marginal(names);  // evidence-major, target fastest
  for (std::size_t e = 0; e < d.evidence_cells(); ++e) {
    std::size_t best = 0;
    for (std::size_t v = 1; v < k; ++v) {
      if (table[e * k + v] > table[e * k + best]) best = v;
    }
    d.rows[e * k + best] = 1.0;
  }
  return d;
}

DpiReport verify_dpi(const DiscreteJoint& joint, const Decoder& decoder, std::string_view target) {
  const std::string t[] = {std::string(target)};
  DpiReport r;
  r.i_v_evidence = decoder.evidence.empty() ? 0.0 : mutual_information(joint, t, decoder.evidence);
  const auto extended = apply_decoder(joint, decoder);
  r.i_v_g = mutual_information(extended, target, decoder.output_name);
  r.slack = r.i_v_evidence - r.i_v_g;
  r.holds = r.i_v_g <= r.i_v_evidence + kInfoEpsilon;
  return r;
}

double bayes_accuracy(const DiscreteJoint& joint, std::string_view target,
                      std::span<const std::string> evidence) {
  const std::size_t k = joint.cardinality(target);
  auto names = dedup(evidence);
  if (std::find(names.begin(), names.end(), std::string(target)) != names.end()) return 1.0;
  names.emplace_back(target);
  const auto table = joint.marginal(names);
  CompensatedAccumulator acc;
  for (std::size_t e = 0; e * k < table.size(); ++e) {
    acc.add(*std::max_element(table.begin() + static_cast<std::ptrdiff_t>(e * k),
                              table.begin() + static_cast<std::ptrdiff_t>((e + 1) * k)));
  }
  return std::clamp(acc.value(), 0.0, 1.0);
}

double chance_accuracy(const DiscreteJoint& joint, std::string_view target) {
  const std::string t[] = {std::string(target)};
  const auto m = joint.marginal(t);
  return *std::max_element(m.begin(), m.end());
}

double decoder_accuracy(const DiscreteJoint& joint, std::string_view target, std::string_view output) {
  const std::size_t k = joint.cardinality(target);
  if (joint.cardinality(output) != k) throw Error(ErrorKind::DomainMismatch, "decoder output and target alphabets differ");
  const std::string names[] = {std::string(target), std::string(output)};
  const auto m = joint.marginal(names);
  CompensatedAccumulator acc;
  for (std::size_t v = 0; v < k; ++v) acc.add(m[v * k + v]);
  return std::clamp(acc.value(), 0.0, 1.0);
}

std::string_view to_string(PrivacyLabel label) {
  return label == PrivacyLabel::Public ? "public" : "private";
}

DiscreteJoint prior_evidence_joint(const WorldDimension& dim) {
  const std::size_t k = dim.alphabet_size();
  std::vector<double> table(k * k);
  for (std::size_t v = 0; v < k; ++v) {
    const auto prior = mixture_prior(k, v, dim.lambda);
    for (std::size_t e = 0; e < k; ++e) table[v * k + e] = prior[e] / static_cast<double>(k);
  }
  return DiscreteJoint({{"v:" + dim.id.str(), k}, {"e:" + dim.id.str(), k}}, std::move(table));
}

DiscreteJoint carrier_state_joint(const SyntheticWorld& world, std::size_t task_index,
                                  std::size_t dim_index, const EncodingMask& mask) {
  if (task_index >= world.tasks.size()) throw Error(ErrorKind::UnknownTask, "task index out of range");
  const auto& task = world.tasks[task_index];
  if (dim_index >= task.dims.size()) throw Error(ErrorKind::UnknownDimension, "dimension index out of range");
  if (mask.size() != task.dims.size()) throw Error(ErrorKind::LengthMismatch, "mask not aligned to task");
  const auto& target = task.dims[dim_index];
  const std::size_t k = target.alphabet_size();

  std::vector<Variable> vars{{"v:" + target.id.str(), k}};
  std::vector<std::size_t> cards{k};
  for (const auto& d : task.dims) {
    vars.push_back({"c:" + d.id.str(), d.alphabet_size()});
    cards.push_back(d.alphabet_size());
  }
  const std::size_t cells = checked_product(cards);

  // Stride of c_k and of the block of variables after it.
  std::size_t after_k = 1;
  for (std::size_t j = dim_index + 1; j < task.dims.size(); ++j) after_k *= task.dims[j].alphabet_size();
  std::size_t others = 1;
  for (std::size_t j = 0; j < task.dims.size(); ++j) {
    if (j != dim_index) others *= task.dims[j].alphabet_size();
  }
  const bool encoded = mask.bits[dim_index].m == 1;
  std::vector<std::vector<double>> channel(k);
  for (std::size_t v = 0; v < k; ++v) channel[v] = mixture_prior(k, v, target.lambda);

  std::vector<double> table(cells, 0.0);
  const std::size_t per_v = cells / k;
  for (std::size_t v = 0; v < k; ++v) {
    for (std::size_t rest = 0; rest < per_v; ++rest) {
      const std::size_t ck = (rest / after_k) % k;
      const double p_ck = encoded ? (ck == v ? 1.0 : 0.0) : channel[v][ck];
      table[v * per_v + rest] = p_ck / (static_cast<double>(k) * static_cast<double>(others));
    }
  }
  return DiscreteJoint(std::move(vars), std::move(table));
}

double public_threshold_lambda(std::size_t alphabet_size, const PrivacyThresholds& thresholds) {
  const double chance = 1.0 / static_cast<double>(alphabet_size);
  const double needed = std::max(thresholds.theta_pub, chance + thresholds.chance_margin);
  return (needed - chance) / (1.0 - chance);
}

PrivacyVerdict classify_privacy(const SyntheticWorld& world, std::size_t task_index,
                                const DimensionId& dimension, const PrivacyThresholds& thresholds) {
  if (task_index >= world.tasks.size()) throw Error(ErrorKind::UnknownTask, "task index out of range");
  const auto& task = world.tasks[task_index];
  auto it = std::find_if(task.dims.begin(), task.dims.end(), [&](const auto& d) { return d.id == dimension; });
  if (it == task.dims.end()) throw Error(ErrorKind::UnknownDimension, "no such dimension in task", dimension.str());
  checked_product(std::vector<std::size_t>{it->alphabet_size(), it->alphabet_size()});

  const auto joint = prior_evidence_joint(*it);
  const std::string v = "v:" + dimension.str();
  const std::string e[] = {"e:" + dimension.str()};
  PrivacyVerdict verdict;
  verdict.dimension = dimension;
  verdict.mi_bits = mutual_information(joint, std::span<const std::string>(&v, 1), e);
  verdict.bayes_accuracy = bayes_accuracy(joint, v, e);
  verdict.chance = chance_accuracy(joint, v);
  const bool above_theta = verdict.bayes_accuracy >= thresholds.theta_pub - kAccuracyTolerance;
  const bool above_chance = verdict.bayes_accuracy >= verdict.chance + thresholds.chance_margin - kAccuracyTolerance;
  verdict.label = above_theta && above_chance ? PrivacyLabel::Public : PrivacyLabel::Private;
  return verdict;
}

TiilReport check_tiil(const SyntheticWorld& world, std::size_t task_index, std::size_t dim_index,
                      std::uint64_t seed, const PrivacyThresholds& thresholds) {
  if (task_index >= world.tasks.size()) throw Error(ErrorKind::UnknownTask, "task index out of range");
  const auto& task = world.tasks[task_index];
  if (dim_index >= task.dims.size()) throw Error(ErrorKind::UnknownDimension, "dimension index out of range");
  const auto& dim = task.dims[dim_index];

  TiilReport report;
  report.dimension = dim.id;
  report.verdict = classify_privacy(world, task_index, dim.id, thresholds);

  std::vector<std::uint8_t> bits(task.dims.size(), 1);
  bits[dim_index] = 0;
  const auto ids = task.ids();
  const auto mask = EncodingMask::from_values(ids, bits);

  const std::string target = "v:" + dim.id.str();
  const std::size_t k = dim.alphabet_size();

  // Decoding appends an output variable, so the decoded joint must fit
  // under the cap too; otherwise fall back to the dimension-only joint.
  const auto evaluate = [&](const DiscreteJoint& joint, const std::vector<std::string>& evidence,
                            const std::string& own) {
    if (joint.cell_count() > kMaxJointCells / k) {
      throw Error(ErrorKind::WorldTooLarge, "decoded joint would exceed the cell cap");
    }
    report.i_v_evidence = mutual_information(joint, std::span<const std::string>(&target, 1), evidence);
    report.bayes_accuracy = bayes_accuracy(joint, target, evidence);
    report.chance = chance_accuracy(joint, target);
    report.tiil_regime = report.bayes_accuracy <= report.chance + kInfoEpsilon;

    const std::vector<std::pair<std::string, Decoder>> decoders = {
        {"bayes", bayes_decoder(joint, target, evidence)},
        {"constant", constant_decoder(joint, evidence, k, 0)},
        {"prior_token", identity_decoder(joint, own)},
        {"random_deterministic", random_deterministic_decoder(joint, evidence, k, seed)},
        {"random_stochastic", random_stochastic_decoder(joint, evidence, k, mix64(seed))},
    };
    report.decoders.clear();
    report.dpi_holds = true;
    for (const auto& [family, decoder] : decoders) {
      DecoderCheck check;
      check.family = family;
      check.dpi = verify_dpi(joint, decoder, target);
      check.i_v_g = check.dpi.i_v_g;
      check.accuracy = decoder_accuracy(apply_decoder(joint, decoder), target, decoder.output_name);
      report.dpi_holds = report.dpi_holds && check.dpi.holds;
      report.decoders.push_back(std::move(check));
    }
  };

  try {
    const auto joint = carrier_state_joint(world, task_index, dim_index, mask);
    std::vector<std::string> evidence;
    for (const auto& d : task.dims) evidence.push_back("c:" + d.id.str());
    evaluate(joint, evidence, evidence[dim_index]);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::WorldTooLarge) throw;
    report.full_carrier_state = false;
    const std::vector<std::string> evidence{"e:" + dim.id.str()};
    evaluate(prior_evidence_joint(dim), evidence, evidence[0]);
  }
  return report;
}

}  // namespace ist
