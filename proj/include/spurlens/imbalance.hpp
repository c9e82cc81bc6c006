#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spurlens/dataset.hpp"

namespace spurlens {

inline constexpr double kImbalanceThreshold = 0.2;

enum class BalanceMetric { smd, spearman };

std::string_view metric_name(BalanceMetric m) noexcept;

struct SmdResult {
  std::optional<double> value;
  bool degenerate = false;  // zero pooled variance with differing means
};

/// Standardized mean difference (mean1 - mean0) / sqrt((s1^2 + s0^2) / 2)
/// with sample variances. Each arm needs at least two values.
SmdResult smd(std::span<const double> treated, std::span<const double> untreated);

/// Same, splitting `z` (NaN = missing) by a treated mask of equal length.
SmdResult smd(std::span<const double> z, const RowMask& treated);

struct ImbalanceEntry {
  std::string covariate;
  std::optional<double> score;
  BalanceMetric metric = BalanceMetric::smd;
  ScopeTag scope;
  bool degenerate = false;
  bool flagged = false;                   // |score| > threshold
  std::optional<std::string> indicator;   // worst indicator of a categorical covariate
  std::optional<std::string> failure;
};

/// Imbalance of one covariate inside `scope`: SMD across arms for a binary
/// cause, Spearman correlation with the cause otherwise. Categorical
/// covariates report their most imbalanced indicator.
ImbalanceEntry imbalance_score(const Dataset& ds, const CausalConfig& cfg, std::string_view covariate,
                               const RowMask& scope, ScopeTag tag = {});

struct ImbalanceReport {
  ScopeTag scope;
  std::vector<ImbalanceEntry> entries;  // |score| descending, undefined last
  double mean_abs_score = 0.0;
  bool warning = false;
  double threshold = kImbalanceThreshold;
  std::size_t n_treated = 0;
  std::size_t n_untreated = 0;
  std::size_t n_rows = 0;
};

ImbalanceReport imbalance_report(const Dataset& ds, const CausalConfig& cfg, const RowMask& scope,
                                 ScopeTag tag = {}, double threshold = kImbalanceThreshold);

}  // namespace spurlens
