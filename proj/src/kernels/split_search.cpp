#include <algorithm>
#include <cmath>
#include <utility>

#include "spurlens/kernels.hpp"

namespace spurlens {

namespace {

struct Accumulator {
  double n = 0;
  double sum = 0;    // gini: treated count; variance: sum of centred target
  double sumsq = 0;  // variance only

  void add(double y) {
    n += 1;
    sum += y;
    sumsq += y * y;
  }
  void remove(double y) {
    n -= 1;
    sum -= y;
    sumsq -= y * y;
  }
  double impurity(SplitCriterion c) const {
    if (n <= 0) return 0.0;
    if (c == SplitCriterion::gini) return 2.0 * sum * (n - sum) / n;
    return std::max(0.0, sumsq - sum * sum / n);
  }
};

std::optional<SplitCandidate> best_for_feature(std::size_t feature, std::span<const double> values,
                                               std::span<const double> target,
                                               std::span<const std::size_t> rows,
                                               SplitCriterion criterion, std::size_t min_leaf,
                                               double centre, double parent_impurity) {
  std::vector<std::pair<double, double>> cells;
  cells.reserve(rows.size());
  for (std::size_t r : rows) {
    const double y = criterion == SplitCriterion::gini ? target[r] : target[r] - centre;
    cells.emplace_back(values[r], y);
  }
  std::sort(cells.begin(), cells.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  Accumulator left, right;
  for (const auto& c : cells) right.add(c.second);

  const double min_gain = 1e-12 * std::max(1.0, parent_impurity);
  std::optional<SplitCandidate> best;
  for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
    left.add(cells[i].second);
    right.remove(cells[i].second);
    if (cells[i].first == cells[i + 1].first) continue;
    const std::size_t n_left = i + 1;
    const std::size_t n_right = cells.size() - n_left;
    if (n_left < min_leaf || n_right < min_leaf) continue;
    const double gain = parent_impurity - left.impurity(criterion) - right.impurity(criterion);
    if (!(gain > min_gain)) continue;
    SplitCandidate cand;
    cand.feature = feature;
    cand.threshold = 0.5 * (cells[i].first + cells[i + 1].first);
    cand.gain = gain;
    cand.n_left = n_left;
    cand.n_right = n_right;
    if (criterion == SplitCriterion::gini) {
      const double t_left = std::round(left.sum);
      const double t_right = std::round(right.sum);
      cand.two_arm = t_left > 0 && t_left < left.n && t_right > 0 && t_right < right.n;
    }
    if (!best || better_split(cand, *best)) best = cand;
  }
  return best;
}

double target_centre(std::span<const double> target, std::span<const std::size_t> rows) {
  double s = 0;
  for (std::size_t r : rows) s += target[r];
  return rows.empty() ? 0.0 : s / static_cast<double>(rows.size());
}

}  // namespace

bool better_split(const SplitCandidate& a, const SplitCandidate& b) {
  if (a.two_arm != b.two_arm) return a.two_arm;
  const double tol = 1e-9 * std::max({1.0, std::abs(a.gain), std::abs(b.gain)});
  if (std::abs(a.gain - b.gain) > tol) return a.gain > b.gain;
  if (a.feature != b.feature) return a.feature < b.feature;
  return a.threshold < b.threshold;
}

double node_impurity(std::span<const double> target, std::span<const std::size_t> rows,
                     SplitCriterion criterion) {
  const double centre = criterion == SplitCriterion::gini ? 0.0 : target_centre(target, rows);
  Accumulator acc;
  for (std::size_t r : rows) acc.add(target[r] - centre);
  return acc.impurity(criterion);
}

namespace kernels {
namespace serial {

std::optional<SplitCandidate> best_split(std::span<const FeatureView> features,
                                         std::span<const double> target,
                                         std::span<const std::size_t> rows,
                                         SplitCriterion criterion, std::size_t min_leaf) {
  const double centre = criterion == SplitCriterion::gini ? 0.0 : target_centre(target, rows);
  const double parent = node_impurity(target, rows, criterion);
  std::optional<SplitCandidate> best;
  for (std::size_t f = 0; f < features.size(); ++f) {
    auto cand = best_for_feature(f, features[f].values, target, rows, criterion, min_leaf, centre,
                                 parent);
    if (cand && (!best || better_split(*cand, *best))) best = cand;
  }
  return best;
}

}  // namespace serial

namespace parallel {

std::optional<SplitCandidate> best_split(std::span<const FeatureView> features,
                                         std::span<const double> target,
                                         std::span<const std::size_t> rows,
                                         SplitCriterion criterion, std::size_t min_leaf) {
  const double centre = criterion == SplitCriterion::gini ? 0.0 : target_centre(target, rows);
  const double parent = node_impurity(target, rows, criterion);
  std::vector<std::optional<SplitCandidate>> per_feature(features.size());
  const auto n_features = static_cast<std::ptrdiff_t>(features.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t f = 0; f < n_features; ++f) {
    const auto fi = static_cast<std::size_t>(f);
    per_feature[fi] = best_for_feature(fi, features[fi].values, target, rows, criterion, min_leaf,
                                       centre, parent);
  }
  // reduce in feature order so ties resolve exactly as in the serial scan
  std::optional<SplitCandidate> best;
  for (const auto& cand : per_feature)
    if (cand && (!best || better_split(*cand, *best))) best = cand;
  return best;
}

}  // namespace parallel
}  // namespace kernels
}  // namespace spurlens
