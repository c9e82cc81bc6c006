#include "spurlens/stats.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "spurlens/error.hpp"

namespace spurlens {

namespace {

constexpr double kRankTolerance = 1e-10;

Eigen::MatrixXd design_matrix(std::span<const Predictor> predictors, std::size_t n) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(predictors.size() + 1));
  x.col(0).setOnes();
  for (std::size_t j = 0; j < predictors.size(); ++j) {
    if (predictors[j].values.size() != n)
      throw Error(ErrorCode::invalid_argument, "predictor length differs from outcome length",
                  predictors[j].name);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = predictors[j].values[i];
      if (std::isnan(v))
        throw Error(ErrorCode::invalid_argument, "missing cell in design matrix", predictors[j].name);
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j + 1)) = v;
    }
  }
  return x;
}

// Adds columns left to right and reports the first one that does not
// raise the rank. Columns are normalized so scale does not matter.
void check_rank(const Eigen::MatrixXd& x, std::span<const Predictor> predictors) {
  Eigen::MatrixXd scaled = x;
  for (Eigen::Index j = 0; j < scaled.cols(); ++j) {
    const double norm = scaled.col(j).norm();
    if (norm > 0) scaled.col(j) /= norm;
  }
  for (Eigen::Index j = 1; j < scaled.cols(); ++j) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled.leftCols(j + 1));
    qr.setThreshold(kRankTolerance);
    if (qr.rank() < j + 1) {
      const auto& name = predictors[static_cast<std::size_t>(j - 1)].name;
      throw Error(ErrorCode::collinearity, "design is rank deficient at column '" + name + "'",
                  name);
    }
  }
}

void check_sample(std::size_t n, std::size_t p) {
  if (n < p + 2)
    throw Error(ErrorCode::insufficient_sample,
                "need at least " + std::to_string(p + 2) + " rows, have " + std::to_string(n));
}

void fill_inference(RegressionFit& fit, const Eigen::VectorXd& beta, const Eigen::MatrixXd& cov,
                    std::span<const Predictor> predictors) {
  fit.names.assign(1, "(intercept)");
  for (const auto& p : predictors) fit.names.push_back(p.name);
  const auto k = static_cast<std::size_t>(beta.size());
  fit.coefficients.resize(k);
  fit.standard_errors.resize(k);
  fit.p_values.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    fit.coefficients[j] = beta(jj);
    const double var = std::max(0.0, cov(jj, jj));
    fit.standard_errors[j] = std::sqrt(var);
    if (fit.standard_errors[j] > 0)
      fit.p_values[j] = two_sided_normal_p(beta(jj) / fit.standard_errors[j]);
    else
      fit.p_values[j] = std::abs(beta(jj)) > 0 ? 0.0 : 1.0;
  }
}

}  // namespace

std::string_view model_name(ModelKind kind) noexcept {
  return kind == ModelKind::linear ? "linear" : "logistic";
}

RegressionFit fit_ols(std::span<const Predictor> predictors, std::span<const double> y) {
  const std::size_t n = y.size();
  check_sample(n, predictors.size());
  Eigen::MatrixXd x = design_matrix(predictors, n);
  check_rank(x, predictors);
  Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(n));

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  Eigen::VectorXd beta = qr.solve(yv);
  Eigen::VectorXd resid = yv - x * beta;
  const double df = static_cast<double>(n - predictors.size() - 1);
  const double sigma2 = resid.squaredNorm() / df;
  Eigen::MatrixXd xtx_inv = (x.transpose() * x).ldlt().solve(
      Eigen::MatrixXd::Identity(x.cols(), x.cols()));

  RegressionFit fit;
  fit.model_kind = ModelKind::linear;
  fit.n_used = n;
  fit.converged = true;
  fit.iterations = 1;
  fill_inference(fit, beta, sigma2 * xtx_inv, predictors);
  return fit;
}

RegressionFit fit_logistic(std::span<const Predictor> predictors, std::span<const double> y,
                           const LogisticOptions& options) {
  const std::size_t n = y.size();
  std::size_t positives = 0;
  for (double v : y) {
    if (v != 0.0 && v != 1.0)
      throw Error(ErrorCode::invalid_argument, "logistic outcome must be 0/1");
    positives += v == 1.0;
  }
  if (positives == 0 || positives == n)
    throw Error(ErrorCode::separation, "outcome has a single class");
  check_sample(n, predictors.size());
  Eigen::MatrixXd x = design_matrix(predictors, n);
  check_rank(x, predictors);
  Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(n));

  const Eigen::Index k = x.cols();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd mu(static_cast<Eigen::Index>(n));
  Eigen::VectorXd w(static_cast<Eigen::Index>(n));

  auto update_moments = [&] {
    Eigen::VectorXd eta = x * beta;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      mu(i) = 1.0 / (1.0 + std::exp(-eta(i)));
      w(i) = std::max(mu(i) * (1.0 - mu(i)), 1e-12);
    }
  };

  bool converged = false;
  int it = 0;
  while (it < options.max_iterations) {
    ++it;
    update_moments();
    Eigen::MatrixXd info = x.transpose() * w.asDiagonal() * x;
    Eigen::VectorXd score = x.transpose() * (yv - mu);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success) break;
    Eigen::VectorXd delta = ldlt.solve(score);
    if (!delta.allFinite()) break;
    beta += delta;
    if (delta.cwiseAbs().maxCoeff() < options.tolerance) {
      converged = true;
      break;
    }
  }

  update_moments();
  Eigen::MatrixXd info = x.transpose() * w.asDiagonal() * x;
  Eigen::MatrixXd cov = info.ldlt().solve(Eigen::MatrixXd::Identity(k, k));

  RegressionFit fit;
  fit.model_kind = ModelKind::logistic;
  fit.n_used = n;
  fit.converged = converged;
  fit.iterations = it;
  fill_inference(fit, beta, cov, predictors);
  if (!converged && beta.cwiseAbs().maxCoeff() > options.separation_bound)
    fit.warning = "quasi-separation: coefficients diverge without convergence";
  return fit;
}

std::vector<double> midranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0 || syy <= 0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw Error(ErrorCode::invalid_argument, "spearman inputs differ in length");
  if (x.size() < 3)
    throw Error(ErrorCode::insufficient_sample, "spearman needs at least 3 pairs");
  const auto rx = midranks(x);
  const auto ry = midranks(y);
  auto rho = pearson(rx, ry);
  if (!rho) throw Error(ErrorCode::undefined_correlation, "correlation of a constant input");
  return *rho;
}

double rank_auc(std::span<const double> scores, std::span<const double> labels) {
  if (scores.size() != labels.size())
    throw Error(ErrorCode::invalid_argument, "scores and labels differ in length");
  std::size_t n_pos = 0;
  for (double l : labels) n_pos += l == 1.0;
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw Error(ErrorCode::degenerate_auc, "AUC needs both label classes");
  const auto ranks = midranks(scores);
  double pos_rank_sum = 0.0;
  for (std::size_t i = 0; i < ranks.size(); ++i)
    if (labels[i] == 1.0) pos_rank_sum += ranks[i];
  const double np = static_cast<double>(n_pos);
  const double u = pos_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorCode::invalid_argument, "quantile of an empty sample");
  if (sorted.size() == 1) return sorted.front();
  const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double quantile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, p);
}

double two_sided_normal_p(double z) { return std::clamp(std::erfc(std::abs(z) / std::sqrt(2.0)), 0.0, 1.0); }

}  // namespace spurlens
