#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spurlens/dataset.hpp"
#include "spurlens/stats.hpp"

namespace spurlens {

inline constexpr std::string_view kConfounderDefinition =
    "a third variable that influences both cause and outcome yet does not lie on a causal pathway";

/// Relative denominators below this leave the linear CF score undefined.
inline constexpr double kSlopeGuard = 1e-8;

struct CFScore {
  std::string covariate;
  std::optional<double> score;  // nullopt = undefined or failed
  double unadjusted_beta1 = 0.0;
  double adjusted_beta1 = 0.0;
  ModelKind model_kind = ModelKind::linear;
  std::size_t n_used = 0;
  std::optional<std::string> failure_code;
  std::optional<std::string> failure;
  std::vector<std::string> warnings;
};

/// Confounding score of one covariate: the relative change of the cause
/// coefficient (odds ratio for a binary outcome, slope otherwise) when the
/// covariate enters the model.
CFScore cf_score(const Dataset& ds, const CausalConfig& cfg, std::string_view covariate);

/// Scores every candidate covariate; failures are annotated, not thrown.
/// Descending by score, undefined entries last, names ascending on ties.
std::vector<CFScore> rank_confounders(const Dataset& ds, const CausalConfig& cfg);

struct SplitHistograms {
  std::vector<HistogramBin> treated;
  std::vector<HistogramBin> untreated;
  std::optional<std::string> split_rule;  // continuous cause only
  std::optional<double> threshold;
  std::size_t n_treated = 0;
  std::size_t n_untreated = 0;
};

/// Paired histograms of a covariate for treated vs untreated rows over a
/// shared grid. A continuous cause is split at its median.
SplitHistograms treatment_split_histograms(const Dataset& ds, const CausalConfig& cfg,
                                           std::string_view covariate,
                                           std::size_t bins = kDefaultHistogramBins);

}  // namespace spurlens
