#include <cmath>

#include "spurlens/kernels.hpp"
#include "spurlens/stats.hpp"

namespace spurlens {

namespace {

// Mean over subgroups of the folded one-vs-rest rank AUC of one feature.
// Subgroups with no observed member, or holding every observed member,
// are skipped; a constant feature scores 0.5.
double feature_score(const std::vector<double>& values, std::span<const int> group, int n_groups) {
  std::vector<double> observed;
  std::vector<int> labels;
  observed.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::isnan(values[i])) continue;
    observed.push_back(values[i]);
    labels.push_back(group[i]);
  }
  if (observed.size() < 2) return 0.5;
  const auto ranks = midranks(observed);
  std::vector<double> rank_sum(static_cast<std::size_t>(n_groups), 0.0);
  std::vector<double> size(static_cast<std::size_t>(n_groups), 0.0);
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    rank_sum[static_cast<std::size_t>(labels[i])] += ranks[i];
    size[static_cast<std::size_t>(labels[i])] += 1.0;
  }
  const double n = static_cast<double>(observed.size());
  double total = 0.0;
  int used = 0;
  for (std::size_t g = 0; g < size.size(); ++g) {
    const double ng = size[g];
    if (ng == 0.0 || ng == n) continue;
    const double auc = (rank_sum[g] - ng * (ng + 1.0) / 2.0) / (ng * (n - ng));
    total += std::max(auc, 1.0 - auc);
    ++used;
  }
  return used == 0 ? 0.5 : total / used;
}

}  // namespace

namespace kernels {
namespace serial {

std::vector<double> aggregated_auc(std::span<const std::vector<double>> features,
                                   std::span<const int> group, int n_groups) {
  std::vector<double> out(features.size());
  for (std::size_t f = 0; f < features.size(); ++f)
    out[f] = feature_score(features[f], group, n_groups);
  return out;
}

}  // namespace serial

namespace parallel {

std::vector<double> aggregated_auc(std::span<const std::vector<double>> features,
                                   std::span<const int> group, int n_groups) {
  std::vector<double> out(features.size());
  const auto n_features = static_cast<std::ptrdiff_t>(features.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t f = 0; f < n_features; ++f)
    out[static_cast<std::size_t>(f)] =
        feature_score(features[static_cast<std::size_t>(f)], group, n_groups);
  return out;
}

}  // namespace parallel
}  // namespace kernels

std::vector<double> aggregated_auc(std::span<const std::vector<double>> features,
                                   std::span<const int> group, int n_groups) {
  return kernels::parallel::aggregated_auc(features, group, n_groups);
}

}  // namespace spurlens
