#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "spurlens/dataset.hpp"
#include "spurlens/partition.hpp"

namespace spurlens {

enum class SlopeSign { positive, negative, flat, undefined };
std::string_view slope_sign_name(SlopeSign s) noexcept;

struct ArmSummary {
  std::size_t size = 0;
  std::optional<double> mean_outcome;
};

/// Binary cause: arm circles sized by count, joined by the outcome line.
struct CircleLineModel {
  std::optional<int> subgroup_id;  // nullopt = aggregate
  ArmSummary untreated;
  ArmSummary treated;
  SlopeSign slope_sign = SlopeSign::flat;
  std::size_t size = 0;
};

/// Continuous cause: centroid, axis-aligned SD half-widths and OLS slope.
struct EllipseModel {
  std::optional<int> subgroup_id;
  double mean_x = 0.0;
  double mean_y = 0.0;
  double sd_x = 0.0;
  double sd_y = 0.0;
  std::optional<double> slope;
  std::optional<double> xy_correlation;
  std::size_t size = 0;
};

enum class ViewerMode { circleline, ellipse };

using SpaceModel = std::variant<CircleLineModel, EllipseModel>;

struct CausalitySpace {
  ViewerMode mode = ViewerMode::circleline;
  SpaceModel aggregate;
  std::vector<SpaceModel> subgroups;
  std::vector<int> degenerate;  // excluded subgroup ids
  std::vector<std::string> notices;
};

inline constexpr double kSlopeSignTolerance = 1e-12;

CircleLineModel circle_line(const Dataset& ds, const CausalConfig& cfg, const RowMask& rows,
                            std::optional<int> id);
EllipseModel ellipse(const Dataset& ds, const CausalConfig& cfg, const RowMask& rows,
                     std::optional<int> id);

/// Per-subgroup geometry in the cause-outcome plane plus the aggregate
/// over the union of subgroup rows.
CausalitySpace causality_space(const Dataset& ds, const CausalConfig& cfg, const Partition& partition);

struct FeatureScore {
  std::string feature;
  double auc = 0.5;
  std::optional<std::string> indicator;
};

inline constexpr std::size_t kDefaultTopFeatures = 5;

/// Top-k features by mean folded one-vs-rest rank AUC over subgroups.
std::vector<FeatureScore> discriminative_features(const Dataset& ds, const Partition& partition,
                                                  const std::vector<std::string>& features,
                                                  std::size_t k = kDefaultTopFeatures);

inline constexpr std::size_t kMaxGlyphAxes = 8;

struct RadarGlyph {
  ScopeTag scope;
  std::size_t size = 0;
  std::vector<double> values;  // aligned with the axes
};

struct RadarGlyphs {
  std::vector<std::string> axes;
  std::vector<bool> degenerate;  // per axis: max == min in the population
  std::vector<RadarGlyph> rows;  // population first, then subgroups
};

/// Min-max normalized feature means. Bounds come from the population so
/// glyphs are comparable; categorical axes expand to their indicators.
RadarGlyphs radar_glyphs(const Dataset& ds, const Partition& partition,
                         const std::vector<std::string>& axes);

}  // namespace spurlens
