#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spurlens {

enum class ModelKind { linear, logistic };

std::string_view model_name(ModelKind kind) noexcept;

/// One named design-matrix column. The intercept is implicit.
struct Predictor {
  std::string name;
  std::vector<double> values;
};

struct RegressionFit {
  ModelKind model_kind = ModelKind::linear;
  std::vector<std::string> names;  // "(intercept)" first
  std::vector<double> coefficients;
  std::vector<double> standard_errors;
  std::vector<double> p_values;  // two-sided Wald
  std::size_t n_used = 0;
  bool converged = true;
  int iterations = 0;
  std::optional<std::string> warning;

  double slope(std::size_t predictor = 0) const { return coefficients.at(predictor + 1); }
};

struct LogisticOptions {
  double tolerance = 1e-8;
  int max_iterations = 50;
  double separation_bound = 15.0;
};

/// Least squares with intercept. Throws collinearity (naming the first
/// dependent column) or insufficient_sample when n < p + 2.
RegressionFit fit_ols(std::span<const Predictor> predictors, std::span<const double> y);

/// Maximum-likelihood logistic regression by iteratively reweighted least
/// squares. Stops when the largest coefficient change is below the
/// tolerance or the iteration cap is reached; a non-converged fit with a
/// coefficient beyond the separation bound carries a quasi-separation
/// warning. Throws separation when y holds a single class.
RegressionFit fit_logistic(std::span<const Predictor> predictors, std::span<const double> y,
                           const LogisticOptions& options = {});

/// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> midranks(std::span<const double> x);

/// Pearson correlation; nullopt when either input is constant.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// Pearson correlation of midranks. Requires n >= 3 and non-constant
/// inputs (undefined_correlation otherwise).
double spearman(std::span<const double> x, std::span<const double> y);

/// Mann-Whitney probability that a positive outscores a negative, ties
/// counting one half. Labels are 0/1.
double rank_auc(std::span<const double> scores, std::span<const double> labels);

/// Quantile with linear interpolation between order statistics of a
/// sorted sample.
double quantile_sorted(std::span<const double> sorted, double p);
double quantile(std::vector<double> values, double p);

double mean(std::span<const double> x);
/// Sample variance (n-1 denominator); 0 for n < 2.
double sample_variance(std::span<const double> x);

/// Two-sided p-value of a standard-normal statistic.
double two_sided_normal_p(double z);

}  // namespace spurlens
