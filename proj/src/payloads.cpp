#include "spurlens/payloads.hpp"

#include <cmath>

namespace spurlens {

namespace {

template <class T>
Json opt(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

Json finite(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json opt_finite(const std::optional<double>& v) { return v ? finite(*v) : Json(nullptr); }

Json scope_json(const ScopeTag& s) {
  if (s.is_population()) return "population";
  return Json{{"subgroup", *s.subgroup}};
}

template <class T, class F>
Json section_json(const Section<T>& s, F&& render) {
  if (s.value) return render(*s.value);
  Json j;
  j["failure"] = s.failure ? Json{{"error_code", s.failure->error_code}, {"message", s.failure->message}}
                           : Json(nullptr);
  return j;
}

const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw Error(ErrorCode::invalid_argument, std::string("missing field '") + key + "'", key);
  return j.at(key);
}

}  // namespace

Json dataset_json(const Dataset& ds) {
  Json cols = Json::array();
  for (const auto& c : ds.columns()) {
    Json col{{"name", c.name}, {"type", kind_name(c.type.kind)}};
    if (c.is_categorical()) col["levels"] = c.type.levels;
    cols.push_back(std::move(col));
  }
  return Json{{"dataset_id", ds.id()}, {"columns", std::move(cols)}, {"n_rows", ds.n_rows()}};
}

Json config_json(const CausalConfig& cfg) {
  return Json{{"cause", cfg.cause},
              {"outcome", cfg.outcome},
              {"covariates", cfg.covariates},
              {"confounders", cfg.confounders}};
}

Json cf_score_json(const CFScore& s) {
  Json j{{"covariate", s.covariate},
         {"cf_score", opt_finite(s.score)},
         {"model_kind", model_name(s.model_kind)},
         {"n_used", s.n_used}};
  if (s.failure) {
    j["unadjusted_beta1"] = nullptr;
    j["adjusted_beta1"] = nullptr;
    j["failure"] = Json{{"error_code", *s.failure_code}, {"message", *s.failure}};
  } else {
    j["unadjusted_beta1"] = finite(s.unadjusted_beta1);
    j["adjusted_beta1"] = finite(s.adjusted_beta1);
    j["failure"] = nullptr;
  }
  j["warnings"] = s.warnings;
  return j;
}

Json histogram_json(const std::vector<HistogramBin>& bins) {
  Json out = Json::array();
  for (const auto& b : bins)
    out.push_back(Json{{"label", b.label}, {"low", b.low}, {"high", b.high}, {"count", b.count}});
  return out;
}

Json split_histograms_json(const SplitHistograms& h) {
  return Json{{"split_rule", opt(h.split_rule)},
              {"n_treated", h.n_treated},
              {"n_untreated", h.n_untreated},
              {"treated", histogram_json(h.treated)},
              {"untreated", histogram_json(h.untreated)}};
}

Json bootstrap_json(const BootstrapCI& ci) {
  return Json{{"low", finite(ci.low)},
              {"high", finite(ci.high)},
              {"level", ci.level},
              {"replicates", ci.replicates},
              {"seed", ci.seed}};
}

Json effect_json(const EffectEstimate& e) {
  return Json{{"estimator", estimator_name(e.estimator)},
              {"effect", opt_finite(e.effect)},
              {"ci", e.ci ? bootstrap_json(*e.ci) : Json(nullptr)},
              {"p_value", opt_finite(e.p_value)},
              {"bootstrap_se", opt_finite(e.bootstrap_se)},
              {"log_odds_ratio", opt_finite(e.log_odds_ratio)},
              {"n", e.n},
              {"n_treated", e.n_treated},
              {"n_untreated", e.n_untreated},
              {"positivity_ok", e.positivity_ok},
              {"undefined_reason", opt(e.undefined_reason)},
              {"warnings", e.warnings}};
}

Json imbalance_json(const ImbalanceReport& r) {
  Json entries = Json::array();
  for (const auto& e : r.entries) {
    entries.push_back(Json{{"covariate", e.covariate},
                           {"score", opt_finite(e.score)},
                           {"metric", metric_name(e.metric)},
                           {"flagged", e.flagged},
                           {"degenerate", e.degenerate},
                           {"indicator", opt(e.indicator)},
                           {"failure", opt(e.failure)}});
  }
  return Json{{"scope", scope_json(r.scope)},
              {"threshold", r.threshold},
              {"warning", r.warning},
              {"mean_abs_score", finite(r.mean_abs_score)},
              {"n_rows", r.n_rows},
              {"n_treated", r.n_treated},
              {"n_untreated", r.n_untreated},
              {"entries", std::move(entries)}};
}

Json path_json(const std::vector<PathStep>& path) {
  Json out = Json::array();
  for (const auto& s : path) {
    Json j{{"covariate", s.covariate}, {"condition", describe(s)}};
    if (!s.levels.empty()) {
      j["levels"] = s.levels;
      j["exclude"] = s.exclude;
    } else {
      j["lower"] = opt(s.lower);
      j["upper"] = opt(s.upper);
    }
    out.push_back(std::move(j));
  }
  return out;
}

Json tree_json(const TreeNode& node) {
  Json j{{"n", node.n}, {"target_mean", finite(node.target_mean)}};
  if (node.is_leaf()) {
    j["subgroup_id"] = node.subgroup_id;
    return j;
  }
  j["feature"] = node.feature;
  j["threshold"] = node.threshold;
  j["gain"] = node.gain;
  Json children = Json::array();
  for (const auto& c : node.children) children.push_back(tree_json(c));
  j["children"] = std::move(children);
  return j;
}

Json partition_json(const Partition& p) {
  Json subgroups = Json::array();
  for (const auto& sg : p.subgroups)
    subgroups.push_back(Json{{"id", sg.id},
                             {"label", sg.label},
                             {"size", sg.mask.count()},
                             {"defining_path", path_json(sg.path)}});
  Json j{{"source", p.source == PartitionSource::manual ? "manual" : "auto"},
         {"dataset_id", p.dataset_id},
         {"scope_size", p.scope.count()},
         {"subgroups", std::move(subgroups)},
         {"tree", p.tree ? tree_json(*p.tree) : Json(nullptr)},
         {"notices", p.notices}};
  return j;
}

Json space_model_json(const SpaceModel& m) {
  if (const auto* c = std::get_if<CircleLineModel>(&m)) {
    return Json{{"subgroup_id", opt(c->subgroup_id)},
                {"size", c->size},
                {"untreated", Json{{"size", c->untreated.size}, {"mean_outcome", opt_finite(c->untreated.mean_outcome)}}},
                {"treated", Json{{"size", c->treated.size}, {"mean_outcome", opt_finite(c->treated.mean_outcome)}}},
                {"slope_sign", slope_sign_name(c->slope_sign)}};
  }
  const auto& e = std::get<EllipseModel>(m);
  return Json{{"subgroup_id", opt(e.subgroup_id)},
              {"size", e.size},
              {"centroid", Json::array({finite(e.mean_x), finite(e.mean_y)})},
              {"half_widths", Json::array({finite(e.sd_x), finite(e.sd_y)})},
              {"slope", opt_finite(e.slope)},
              {"xy_correlation", opt_finite(e.xy_correlation)}};
}

Json causality_space_json(const CausalitySpace& s) {
  Json subgroups = Json::array();
  for (const auto& m : s.subgroups) subgroups.push_back(space_model_json(m));
  return Json{{"mode", s.mode == ViewerMode::circleline ? "circleline" : "ellipse"},
              {"aggregate", space_model_json(s.aggregate)},
              {"subgroups", std::move(subgroups)},
              {"degenerate", s.degenerate},
              {"notices", s.notices}};
}

Json glyphs_json(const RadarGlyphs& g) {
  Json rows = Json::array();
  for (const auto& r : g.rows)
    rows.push_back(Json{{"scope", scope_json(r.scope)}, {"size", r.size}, {"values", r.values}});
  Json degenerate = Json::array();
  for (bool d : g.degenerate) degenerate.push_back(d);
  return Json{{"axes", g.axes}, {"degenerate_axes", std::move(degenerate)}, {"rows", std::move(rows)}};
}

Json diagram_json(const StoryboardDiagram& d) {
  Json nodes = Json::array();
  for (const auto& n : d.cause_nodes)
    nodes.push_back(Json{{"bin_index", n.bin}, {"count", n.count}, {"fraction", n.fraction}});
  Json paths = Json::array();
  for (const auto& p : d.pathways)
    paths.push_back(Json{{"bin_index", p.bin}, {"count", p.count}, {"fraction", p.fraction}, {"endpoint", p.endpoint}});
  return Json{{"scope", scope_json(d.scope)},
              {"size", d.size},
              {"n_bins", d.n_bins},
              {"cause_nodes", std::move(nodes)},
              {"pathways", std::move(paths)},
              {"scope_mean_outcome", finite(d.scope_mean_outcome)},
              {"scope_outcome_sd", finite(d.scope_outcome_sd)}};
}

Json shape_json(const ShapeLabel& s) {
  return Json{{"label", shape_name(s.label)},
              {"degenerate", s.degenerate},
              {"evidence", Json{{"p_hi", s.evidence.p_hi},
                                {"p_hi_pop", s.evidence.p_hi_pop},
                                {"rel_outcome", finite(s.evidence.rel_outcome)},
                                {"bin_trend_rho", opt_finite(s.evidence.bin_trend_rho)}}}};
}

Json simpson_json(const SimpsonWarning& w) {
  return Json{{"flag", w.flag},
              {"message", w.flag ? Json(std::string(kSimpsonWarningText)) : Json(nullptr)},
              {"overall_effect", opt_finite(w.overall_effect)},
              {"subgroup_effect", opt_finite(w.subgroup_effect)},
              {"significance_notes", Json{{"overall_ci_excludes_zero", opt(w.overall_ci_excludes_zero)},
                                          {"subgroup_ci_excludes_zero", opt(w.subgroup_ci_excludes_zero)}}},
              {"suppressed_reason", opt(w.suppressed_reason)}};
}

Json diagnosis_json(const DiagnosisReport& r) {
  return Json{{"scope", scope_json(r.scope)},
              {"n_dropped", r.n_dropped},
              {"statistics", section_json(r.statistics, effect_json)},
              {"population_statistics", section_json(r.population_statistics, effect_json)},
              {"simpson_warning", section_json(r.simpson_warning, simpson_json)},
              {"imbalance", Json{{"population", section_json(r.population_imbalance, imbalance_json)},
                                 {"subgroup", section_json(r.subgroup_imbalance, imbalance_json)}}},
              {"residual_confounders", r.residual_confounders}};
}

Json error_json(const Error& e) {
  return Json{{"error_code", e.name()}, {"message", e.what()}, {"detail", e.detail()}};
}

std::vector<PartitionRule> rules_from_json(const Json& j) {
  const Json& arr = j.is_array() ? j : require(j, "rules");
  if (!arr.is_array()) throw Error(ErrorCode::invalid_rule, "rules must be an array");
  std::vector<PartitionRule> rules;
  try {
    for (const auto& r : arr) {
      PartitionRule rule;
      rule.covariate = require(r, "covariate").get<std::string>();
      if (r.contains("cut_points")) rule.cut_points = r.at("cut_points").get<std::vector<double>>();
      if (r.contains("levels")) rule.levels = r.at("levels").get<std::vector<std::string>>();
      rules.push_back(std::move(rule));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_rule, std::string("malformed rule: ") + e.what());
  }
  return rules;
}

TreeConfig tree_config_from_json(const Json& j) {
  TreeConfig t;
  try {
    t.target_leaves = require(j, "target_leaves").get<std::size_t>();
    t.min_leaf_size = require(j, "min_leaf_size").get<std::size_t>();
    if (j.contains("features") && !j.at("features").is_null())
      t.features = j.at("features").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("malformed tree config: ") + e.what());
  }
  return t;
}

}  // namespace spurlens
