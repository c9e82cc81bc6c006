#pragma once

// Data-parallel kernels. Each kernel has a serial reference under
// kernels::serial and an OpenMP version under kernels::parallel; both
// return bit-identical results for identical inputs.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace spurlens {

/// Statistic evaluated on a resample, given as row indices. Returns
/// nullopt where undefined. Must be safe to call concurrently.
using Statistic = std::function<std::optional<double>(std::span<const std::size_t>)>;

inline constexpr std::size_t kMinReplicates = 100;

struct BootstrapOptions {
  std::size_t replicates = 1000;
  double level = 0.95;
  std::uint64_t seed = 0;
};

struct BootstrapCI {
  double low = 0.0;
  double high = 0.0;
  double level = 0.95;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
};

struct BootstrapResult {
  BootstrapCI ci;
  std::vector<double> statistics;  // one per replicate, replicate order
  std::size_t attempts = 0;
  std::size_t undefined = 0;

  double standard_error() const;
};

/// Per-replicate attempt cap; B replicates draw at most 10 * B resamples.
inline constexpr std::size_t kMaxAttemptsPerReplicate = 10;

/// Percentile bootstrap over `rows`; dispatches to the OpenMP kernel.
BootstrapResult bootstrap_ci(const Statistic& statistic, std::span<const std::size_t> rows,
                             const BootstrapOptions& options);

enum class SplitCriterion { gini, variance };

/// A feature column over all dataset rows (NaN never appears in `rows`).
struct FeatureView {
  std::span<const double> values;
};

struct SplitCandidate {
  std::size_t feature = 0;
  double threshold = 0.0;
  double gain = 0.0;
  bool two_arm = true;
  std::size_t n_left = 0;
  std::size_t n_right = 0;
};

/// True when `a` should be chosen over `b`: two-arm splits first, then
/// larger gain, then lower feature index, then lower threshold.
bool better_split(const SplitCandidate& a, const SplitCandidate& b);

/// Impurity of `target` over `rows`, scaled by the row count (Gini:
/// n * 2p(1-p); variance: sum of squared deviations).
double node_impurity(std::span<const double> target, std::span<const std::size_t> rows,
                     SplitCriterion criterion);

/// Per-feature aggregated one-vs-rest AUC. `features[f][i]` is the value of
/// feature f at scope position i (NaN = missing); `group[i]` is the
/// subgroup index of position i in [0, n_groups).
std::vector<double> aggregated_auc(std::span<const std::vector<double>> features,
                                   std::span<const int> group, int n_groups);

namespace kernels {
namespace serial {

BootstrapResult bootstrap(const Statistic& statistic, std::span<const std::size_t> rows,
                          const BootstrapOptions& options);

std::optional<SplitCandidate> best_split(std::span<const FeatureView> features,
                                         std::span<const double> target,
                                         std::span<const std::size_t> rows,
                                         SplitCriterion criterion, std::size_t min_leaf);

std::vector<double> aggregated_auc(std::span<const std::vector<double>> features,
                                   std::span<const int> group, int n_groups);

}  // namespace serial

namespace parallel {

BootstrapResult bootstrap(const Statistic& statistic, std::span<const std::size_t> rows,
                          const BootstrapOptions& options);

std::optional<SplitCandidate> best_split(std::span<const FeatureView> features,
                                         std::span<const double> target,
                                         std::span<const std::size_t> rows,
                                         SplitCriterion criterion, std::size_t min_leaf);

std::vector<double> aggregated_auc(std::span<const std::vector<double>> features,
                                   std::span<const int> group, int n_groups);

}  // namespace parallel

/// Seed of replicate `index` derived from a base seed (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace kernels
}  // namespace spurlens
