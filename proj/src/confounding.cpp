#include "spurlens/confounding.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "spurlens/error.hpp"

namespace spurlens {

namespace {

std::vector<Predictor> covariate_block(const Column& col, const RowMask& rows) {
  std::vector<Predictor> block;
  if (col.is_categorical()) {
    for (auto& ind : encode_categorical(col, rows))
      block.push_back({ind.name, gather(ind, rows)});
  } else {
    block.push_back({col.name, gather(col, rows)});
  }
  return block;
}

RegressionFit fit_model(ModelKind kind, std::span<const Predictor> predictors,
                        std::span<const double> y, std::string_view which) {
  try {
    return kind == ModelKind::logistic ? fit_logistic(predictors, y) : fit_ols(predictors, y);
  } catch (const Error& e) {
    throw Error(ErrorCode::scoring_error, std::string(which) + " fit failed: " + e.what(),
                std::string(e.name()));
  }
}

}  // namespace

CFScore cf_score(const Dataset& ds, const CausalConfig& cfg, std::string_view covariate) {
  if (covariate == cfg.cause || covariate == cfg.outcome)
    throw Error(ErrorCode::invalid_config, "covariate equals the cause or outcome",
                std::string(covariate));
  if (std::find(cfg.covariates.begin(), cfg.covariates.end(), covariate) == cfg.covariates.end())
    throw Error(ErrorCode::invalid_config, "not a candidate covariate", std::string(covariate));

  const Column& x = ds.column(cfg.cause);
  const Column& y = ds.column(cfg.outcome);
  const Column& z = ds.column(covariate);
  const RowMask rows = listwise_complete(ds, {cfg.cause, cfg.outcome, covariate});

  CFScore out;
  out.covariate = std::string(covariate);
  out.model_kind = y.is_binary() ? ModelKind::logistic : ModelKind::linear;
  out.n_used = rows.count();

  const auto yv = gather(y, rows);
  std::vector<Predictor> predictors{{cfg.cause, gather(x, rows)}};
  const RegressionFit unadjusted = fit_model(out.model_kind, predictors, yv, "unadjusted");
  std::vector<Predictor> block;
  try {
    block = covariate_block(z, rows);
  } catch (const Error& e) {
    throw Error(ErrorCode::scoring_error, std::string("adjusted fit failed: ") + e.what(),
                std::string(e.name()));
  }
  predictors.insert(predictors.end(), block.begin(), block.end());
  const RegressionFit adjusted = fit_model(out.model_kind, predictors, yv, "adjusted");

  out.unadjusted_beta1 = unadjusted.slope();
  out.adjusted_beta1 = adjusted.slope();
  if (unadjusted.warning) out.warnings.push_back("unadjusted: " + *unadjusted.warning);
  if (adjusted.warning) out.warnings.push_back("adjusted: " + *adjusted.warning);

  if (out.model_kind == ModelKind::logistic) {
    // |e^b1' - e^b1| / e^b1 == |e^(b1' - b1) - 1|
    out.score = std::abs(std::expm1(out.adjusted_beta1 - out.unadjusted_beta1));
  } else if (std::abs(out.unadjusted_beta1) >= kSlopeGuard) {
    out.score = std::abs(out.adjusted_beta1 - out.unadjusted_beta1) / std::abs(out.unadjusted_beta1);
  }
  return out;
}

std::vector<CFScore> rank_confounders(const Dataset& ds, const CausalConfig& cfg) {
  const auto& candidates = cfg.covariates;
  if (candidates.empty())
    throw Error(ErrorCode::invalid_config, "no candidate covariates to rank");
  const auto& y = ds.column(cfg.outcome);
  std::vector<CFScore> scores(candidates.size());
  std::exception_ptr unexpected;
  const auto n = static_cast<std::ptrdiff_t>(candidates.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      scores[k] = cf_score(ds, cfg, candidates[k]);
    } catch (const Error& e) {
      CFScore failed;
      failed.covariate = candidates[k];
      failed.model_kind = y.is_binary() ? ModelKind::logistic : ModelKind::linear;
      failed.failure_code =
          e.code() == ErrorCode::scoring_error && !e.detail().empty() ? e.detail() : std::string(e.name());
      failed.failure = e.what();
      scores[k] = std::move(failed);
    } catch (...) {
#pragma omp critical(spurlens_rank_failure)
      if (!unexpected) unexpected = std::current_exception();
    }
  }
  if (unexpected) std::rethrow_exception(unexpected);

  if (std::all_of(scores.begin(), scores.end(), [](const CFScore& s) { return s.failure.has_value(); }))
    throw Error(ErrorCode::empty_ranking, "every candidate covariate failed to score");

  std::sort(scores.begin(), scores.end(), [](const CFScore& a, const CFScore& b) {
    if (a.score.has_value() != b.score.has_value()) return a.score.has_value();
    if (a.score && *a.score != *b.score) return *a.score > *b.score;
    return a.covariate < b.covariate;
  });
  return scores;
}

SplitHistograms treatment_split_histograms(const Dataset& ds, const CausalConfig& cfg,
                                           std::string_view covariate, std::size_t bins) {
  const Column& x = ds.column(cfg.cause);
  const Column& z = ds.column(covariate);
  const RowMask rows = listwise_complete(ds, {cfg.cause, covariate});

  SplitHistograms out;
  RowMask treated(ds.n_rows());
  if (x.is_binary()) {
    for (std::size_t r : rows.indices())
      if (x.values[r] == 1.0) treated.set(r);
  } else {
    const double median = quantile(gather(x, rows), 0.5);
    out.threshold = median;
    out.split_rule = cfg.cause + " > " + format_number(median);
    for (std::size_t r : rows.indices())
      if (x.values[r] > median) treated.set(r);
  }
  const RowMask untreated = rows & ~treated;
  out.n_treated = treated.count();
  out.n_untreated = untreated.count();
  if (treated.empty() || untreated.empty())
    throw Error(ErrorCode::degenerate_split, "one treatment arm is empty", std::string(covariate));

  double lo = 0.0, hi = 0.0;
  if (!z.is_categorical() && !z.is_binary()) {
    const auto values = gather(z, rows);
    lo = *std::min_element(values.begin(), values.end());
    hi = *std::max_element(values.begin(), values.end());
  }
  out.treated = histogram(z, treated, lo, hi, bins);
  out.untreated = histogram(z, untreated, lo, hi, bins);
  return out;
}

}  // namespace spurlens
