#include "spurlens/pipeline.hpp"

#include <algorithm>

namespace spurlens {

std::string_view engine_version() noexcept { return SPURLENS_VERSION; }

Json ranking_payload(const Dataset& ds, const CausalConfig& cfg, const AnalysisOptions& opts) {
  validate_config(ds, cfg);
  Json entries = Json::array();
  for (const auto& score : rank_confounders(ds, cfg)) {
    Json e = cf_score_json(score);
    try {
      e["histograms"] = split_histograms_json(
          treatment_split_histograms(ds, cfg, score.covariate, opts.histogram_bins));
    } catch (const Error& err) {
      e["histograms"] = Json{{"failure", Json{{"error_code", err.name()}, {"message", err.what()}}}};
    }
    entries.push_back(std::move(e));
  }
  return Json{{"tooltip", kConfounderDefinition},
              {"n_dropped", ds.n_rows() - analysis_scope(ds, cfg).count()},
              {"entries", std::move(entries)}};
}

Partition run_partition(const Dataset& ds, const CausalConfig& cfg, const Json& request,
                        std::uint64_t seed) {
  validate_config(ds, cfg);
  if (!request.is_object())
    throw Error(ErrorCode::invalid_argument, "partition request must be an object");
  const bool manual = request.contains("manual");
  const bool automatic = request.contains("auto");
  if (manual == automatic)
    throw Error(ErrorCode::invalid_argument, "partition request needs exactly one of 'manual' or 'auto'");
  if (manual) {
    Partition p = manual_partition(ds, rules_from_json(request.at("manual")), analysis_scope(ds, cfg));
    p.seed = seed;
    return p;
  }
  return propensity_tree(ds, cfg, tree_config_from_json(request.at("auto")), seed);
}

Json viewer_payload(const Dataset& ds, const CausalConfig& cfg, const Partition& partition,
                    const AnalysisOptions& opts) {
  const auto features = discriminative_features(ds, partition, cfg.covariates, opts.top_features);
  Json disc = Json::array();
  std::vector<std::string> axes;
  for (const auto& f : features) {
    disc.push_back(Json{{"feature", f.feature}, {"auc", f.auc}, {"indicator", f.indicator ? Json(*f.indicator) : Json(nullptr)}});
    if (axes.size() < kMaxGlyphAxes) axes.push_back(f.indicator.value_or(f.feature));
  }
  Json out = causality_space_json(causality_space(ds, cfg, partition));
  out["glyphs"] = glyphs_json(radar_glyphs(ds, partition, axes));
  out["discriminative"] = std::move(disc);
  return out;
}

Json storyboard_payload(const Dataset& ds, const CausalConfig& cfg, const Partition* partition,
                        const AnalysisOptions& opts) {
  validate_config(ds, cfg);
  const RowMask population = analysis_scope(ds, cfg);
  const auto edges = population_edges(ds, cfg, population, opts.cause_bins);
  const auto pop = build_storyboard(ds, cfg, population, edges, ScopeTag{});

  Json subgroups = Json::array();
  if (partition) {
    for (const auto& sg : partition->subgroups) {
      const RowMask rows = sg.mask & population;
      if (rows.empty()) continue;
      const auto d = build_storyboard(ds, cfg, rows, edges, ScopeTag{sg.id});
      subgroups.push_back(Json{{"id", sg.id},
                               {"label", sg.label},
                               {"diagram", diagram_json(d)},
                               {"shape", shape_json(classify_shape(d, pop, false))}});
    }
  }
  return Json{{"bin_edges", edges},
              {"n_bins", edges.size() + 1},
              {"population", Json{{"diagram", diagram_json(pop)},
                                  {"shape", shape_json(classify_shape(pop, pop, true))}}},
              {"subgroups", std::move(subgroups)}};
}

Json diagnosis_payload(const Dataset& ds, const CausalConfig& cfg, const Partition* partition,
                       std::optional<int> subgroup, const AnalysisOptions& opts) {
  return diagnosis_json(diagnose(ds, cfg, partition, subgroup, opts.replicates, opts.seed, opts.threshold));
}

Json full_report(const Dataset& ds, const CausalConfig& cfg, const Partition* partition,
                 const AnalysisOptions& opts) {
  validate_config(ds, cfg);
  Json report;
  report["engine_version"] = engine_version();
  report["seed"] = opts.seed;
  report["config"] = config_json(cfg);
  report["confounders"] = ranking_payload(ds, cfg, opts);
  report["partition"] = partition ? partition_json(*partition) : Json(nullptr);
  report["subgroups"] = partition ? viewer_payload(ds, cfg, *partition, opts) : Json(nullptr);
  report["storyboard"] = storyboard_payload(ds, cfg, partition, opts);
  Json diagnoses = Json::array();
  diagnoses.push_back(diagnosis_payload(ds, cfg, partition, std::nullopt, opts));
  if (partition)
    for (const auto& sg : partition->subgroups)
      diagnoses.push_back(diagnosis_payload(ds, cfg, partition, sg.id, opts));
  report["diagnoses"] = std::move(diagnoses);
  return report;
}

}  // namespace spurlens
