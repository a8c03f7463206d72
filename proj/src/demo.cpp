#include "ist/demo.hpp"

namespace ist::demo {

namespace {

DimensionConfig private_dim(const char* id, std::vector<std::string> alphabet, std::size_t user_value) {
  DimensionConfig d;
  d.id = DimensionId(id);
  d.weight = 0.1;
  d.alphabet_size = alphabet.size();
  d.lambda = 0.0;
  d.user_value = user_value;
  d.alphabet = std::move(alphabet);
  return d;
}

}  // namespace

WorldConfig world_config() {
  // Token 0 of every alphabet is the prior's generic default.
  TaskConfig task;
  task.task_id = std::string(kTaskId);
  task.task_type = "business_report";

  DimensionConfig what;
  what.id = DimensionId("what");
  what.weight = 0.6;
  what.alphabet = {"competitive_analysis", "market_overview", "swot_summary", "product_review", "pricing_study",
                   "feature_matrix", "trend_report", "customer_survey", "investor_memo", "press_brief"};
  what.alphabet_size = what.alphabet.size();
  what.lambda = 1.0;
  what.user_value = 0;
  task.dims.push_back(std::move(what));

  task.dims.push_back(private_dim("who",
                                  {"general_consumers", "enterprise_clients", "small_business", "students",
                                   "developers", "investors", "regulators", "journalists", "retail_buyers",
                                   "public_sector"},
                                  1));
  task.dims.push_back(private_dim("where",
                                  {"consumer_market", "b2b_market", "emea_region", "apac_region", "us_midmarket",
                                   "latam_region", "online_only", "retail_channel", "government", "education"},
                                  1));
  task.dims.push_back(private_dim("how_to",
                                  {"standard_feature_comparison", "proprietary_benchmarks", "price_matrix",
                                   "swot_grid", "porter_forces", "user_reviews", "analyst_rankings",
                                   "patent_landscape", "hiring_signals", "web_traffic"},
                                  1));
  task.dims.push_back(private_dim("how_feel",
                                  {"neutral_marketing", "board_level", "casual_blog", "academic", "sales_pitch",
                                   "technical_brief", "executive_summary", "investor_deck", "internal_memo",
                                   "press_release"},
                                  1));

  WorldConfig cfg;
  cfg.tasks.push_back(std::move(task));
  cfg.seed = kSeed;
  return cfg;
}

SyntheticWorld world() { return build_world(world_config(), kSeed); }

IntentSpec spec() {
  auto s = world().task(kTaskId).spec();
  for (auto& d : s.dimensions) {
    d.privacy_hint = d.id.str() == "what" ? PrivacyHint::Public : PrivacyHint::Private;
  }
  return s;
}

Carrier carrier() {
  Carrier c;
  c.task_id = std::string(kTaskId);
  c.text = "Write a competitive analysis for our product.";
  c.encoded_dimensions = {DimensionId("what")};
  return c;
}

ModelOutput simulated_output() {
  const auto w = world();
  const auto& task = w.task(kTaskId);
  const auto mask = compute_mask(spec(), carrier());
  const auto sim = simulate_output(w, kTaskId, mask, RecoveryMode::Argmax, kSeed);
  ModelOutput out;
  out.task_id = task.task_id;
  out.model_tag = "prior_sim:argmax";
  out.realized_values = sim.realized_values();
  return out;
}

}  // namespace ist::demo
