#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spurlens/dataset.hpp"
#include "spurlens/kernels.hpp"

namespace spurlens {

/// Slider-style rule on one covariate: ascending cut points for numeric
/// covariates (a binary covariate with no cuts splits at 0.5), or a level
/// subset for categorical ones.
struct PartitionRule {
  std::string covariate;
  std::vector<double> cut_points;
  std::vector<std::string> levels;
};

/// One conjunct of a subgroup definition. Numeric steps select
/// [lower, upper); categorical steps select membership in `levels`
/// (or non-membership when `exclude`).
struct PathStep {
  std::string covariate;
  std::optional<double> lower;
  std::optional<double> upper;
  std::vector<std::string> levels;
  bool exclude = false;
  bool binary = false;
};

std::string describe(const PathStep& step);
std::string describe(const std::vector<PathStep>& path);

struct Subgroup {
  int id = 0;
  std::string label;
  RowMask mask;
  std::vector<PathStep> path;
};

struct TreeConfig {
  std::size_t target_leaves = 4;
  std::size_t min_leaf_size = 10;
  std::vector<std::string> features;  // empty = every candidate covariate
};

struct TreeNode {
  std::size_t n = 0;
  double target_mean = 0.0;  // treated share for a binary cause
  std::string feature;       // empty on leaves
  double threshold = 0.0;
  double gain = 0.0;
  int subgroup_id = 0;  // leaves only
  std::vector<TreeNode> children;  // none or {left: < threshold, right: >= threshold}

  bool is_leaf() const noexcept { return children.empty(); }
};

/// Split taken at a growth step, in the order the tree took them.
struct SplitRecord {
  std::string feature;
  double threshold = 0.0;
  double gain = 0.0;
  bool two_arm = true;
  std::size_t n_left = 0;
  std::size_t n_right = 0;
};

enum class PartitionSource { manual, automatic };

struct Partition {
  PartitionSource source = PartitionSource::manual;
  std::string dataset_id;
  RowMask scope;
  std::vector<Subgroup> subgroups;
  std::vector<PartitionRule> rules;        // manual
  std::optional<TreeConfig> tree_config;   // automatic
  std::optional<TreeNode> tree;            // automatic
  std::vector<SplitRecord> splits;         // automatic, growth order
  std::vector<std::string> notices;
  std::uint64_t seed = 0;

  const Subgroup& subgroup(int id) const;  // throws not_found
};

/// Cartesian product of per-rule cells over `scope`; empty cells are
/// dropped with a notice. Rows missing a rule covariate leave the scope.
Partition manual_partition(const Dataset& ds, const std::vector<PartitionRule>& rules,
                           const RowMask& scope);

/// Rows usable by every analysis of `cfg`: complete cause and outcome.
RowMask analysis_scope(const Dataset& ds, const CausalConfig& cfg);

/// Best-first propensity tree: repeatedly split the leaf whose best split
/// most reduces impurity of the cause (Gini for a binary cause, variance
/// otherwise) until the leaf budget is met. Splits that would leave a leaf
/// with a single treatment arm rank below every two-arm split.
Partition propensity_tree(const Dataset& ds, const CausalConfig& cfg, const TreeConfig& tcfg,
                          std::uint64_t seed = 0);

/// Reference single-node search used by the tree, exposed for tests.
std::optional<SplitCandidate> best_root_split(const Dataset& ds, const CausalConfig& cfg,
                                              const TreeConfig& tcfg,
                                              std::vector<std::string>* feature_names = nullptr);

enum class Estimator { mean_difference, linear_slope, logistic_slope };

std::string_view estimator_name(Estimator e) noexcept;

struct EffectEstimate {
  std::optional<double> effect;
  std::optional<BootstrapCI> ci;
  std::optional<double> p_value;
  std::optional<double> bootstrap_se;
  std::optional<double> log_odds_ratio;  // binary cause with binary outcome
  std::size_t n = 0;
  std::size_t n_treated = 0;
  std::size_t n_untreated = 0;
  Estimator estimator = Estimator::mean_difference;
  bool positivity_ok = true;
  std::optional<std::string> undefined_reason;
  std::vector<std::string> warnings;
};

inline constexpr std::size_t kDefaultReplicates = 1000;

/// Effect of the cause on the outcome over the rows of `mask`.
EffectEstimate leaf_effect(const Dataset& ds, const CausalConfig& cfg, const RowMask& mask,
                           std::size_t replicates = kDefaultReplicates, std::uint64_t seed = 0);

}  // namespace spurlens
