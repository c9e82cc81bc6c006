#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "spurlens/dataset.hpp"

namespace spurlens {

inline constexpr std::size_t kDefaultCauseBins = 4;

struct BinAssignment {
  std::vector<double> edges;  // interior edges, ascending
  std::size_t requested = 0;
  std::size_t n_bins = 0;     // edges.size() + 1, after collapsing duplicates
  bool binary = false;
  std::vector<int> bin;       // per input value; -1 for missing
};

/// Index of the bin holding `v`: bins are right-open except the last.
int bin_index(std::span<const double> edges, double v);

/// Percentile bins of the cause: interior edges at quantiles i/L with
/// linear interpolation, duplicate edges collapsed. A 0/1 cause always
/// gets the two bins {0} and {1}.
BinAssignment bin_treatment(std::span<const double> values, std::size_t bins = kDefaultCauseBins);

struct CauseNode {
  std::size_t bin = 0;
  std::size_t count = 0;
  double fraction = 0.0;
};

struct Pathway {
  std::size_t bin = 0;
  std::size_t count = 0;
  double fraction = 0.0;
  double endpoint = 0.0;  // mean outcome of the bin's members
};

struct StoryboardDiagram {
  ScopeTag scope;
  std::vector<double> bin_edges;
  std::size_t n_bins = 0;
  std::size_t size = 0;
  std::vector<CauseNode> cause_nodes;  // every bin, ascending
  std::vector<Pathway> pathways;       // occupied bins only
  double scope_mean_outcome = 0.0;
  double scope_outcome_sd = 0.0;
};

/// Flow model of one scope over shared bin edges.
StoryboardDiagram build_storyboard(const Dataset& ds, const CausalConfig& cfg, const RowMask& scope,
                                   std::span<const double> bin_edges, ScopeTag tag = {});

/// Edges computed on the population: {0.5} for a binary cause, percentile
/// edges otherwise.
std::vector<double> population_edges(const Dataset& ds, const CausalConfig& cfg,
                                     const RowMask& population, std::size_t bins);

enum class Shape { pass_through, hill, valley, mixed };
std::string_view shape_name(Shape s) noexcept;

struct ShapeThresholds {
  double propensity_margin = 0.05;
  double outcome_margin = 0.1;  // in population outcome SDs
  double pass_through_rho = -0.5;
};

struct ShapeEvidence {
  double p_hi = 0.0;
  double p_hi_pop = 0.0;
  double rel_outcome = 0.0;
  std::optional<double> bin_trend_rho;
};

struct ShapeLabel {
  Shape label = Shape::mixed;
  ShapeEvidence evidence;
  bool degenerate = false;
};

/// Rule, first match wins: hill when the scope leans to the upper bins and
/// its outcome sits below the population; valley for the mirror image;
/// pass-through when outcomes fall across occupied bins; mixed otherwise.
/// The population diagram is only ever pass-through or mixed.
ShapeLabel classify_shape(const StoryboardDiagram& diagram, const StoryboardDiagram& population,
                          bool is_population = false, const ShapeThresholds& thresholds = {});

}  // namespace spurlens
