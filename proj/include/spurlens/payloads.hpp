#pragma once

// JSON wire formats shared by the HTTP service and the CLI report.

#include <json.hpp>

#include "spurlens/confounding.hpp"
#include "spurlens/diagnosis.hpp"
#include "spurlens/error.hpp"
#include "spurlens/imbalance.hpp"
#include "spurlens/partition.hpp"
#include "spurlens/storyboard.hpp"
#include "spurlens/subgroup_views.hpp"

namespace spurlens {

using Json = nlohmann::ordered_json;

Json dataset_json(const Dataset& ds);
Json config_json(const CausalConfig& cfg);
Json cf_score_json(const CFScore& s);
Json histogram_json(const std::vector<HistogramBin>& bins);
Json split_histograms_json(const SplitHistograms& h);
Json bootstrap_json(const BootstrapCI& ci);
Json effect_json(const EffectEstimate& e);
Json imbalance_json(const ImbalanceReport& r);
Json path_json(const std::vector<PathStep>& path);
Json tree_json(const TreeNode& node);
Json partition_json(const Partition& p);
Json space_model_json(const SpaceModel& m);
Json causality_space_json(const CausalitySpace& s);
Json glyphs_json(const RadarGlyphs& g);
Json diagram_json(const StoryboardDiagram& d);
Json shape_json(const ShapeLabel& s);
Json simpson_json(const SimpsonWarning& w);
Json diagnosis_json(const DiagnosisReport& r);

/// {error_code, message, detail}
Json error_json(const Error& e);

std::vector<PartitionRule> rules_from_json(const Json& j);
TreeConfig tree_config_from_json(const Json& j);

}  // namespace spurlens
