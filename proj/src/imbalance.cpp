#include "spurlens/imbalance.hpp"

#include <algorithm>
#include <cmath>

#include "spurlens/error.hpp"
#include "spurlens/stats.hpp"

namespace spurlens {

namespace {

std::optional<double> score_indicator(std::span<const double> z, std::span<const double> x,
                                      bool binary_cause, bool& degenerate) {
  if (binary_cause) {
    std::vector<double> t, u;
    for (std::size_t i = 0; i < z.size(); ++i) (x[i] == 1.0 ? t : u).push_back(z[i]);
    auto r = smd(t, u);
    degenerate = degenerate || r.degenerate;
    return r.value;
  }
  try {
    return spearman(z, x);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::undefined_correlation) throw;
    return std::nullopt;
  }
}

}  // namespace

std::string_view metric_name(BalanceMetric m) noexcept {
  return m == BalanceMetric::smd ? "smd" : "spearman";
}

SmdResult smd(std::span<const double> treated, std::span<const double> untreated) {
  if (treated.size() < 2 || untreated.size() < 2)
    throw Error(ErrorCode::arm_size, "each arm needs at least two rows",
                std::to_string(treated.size()) + " treated, " + std::to_string(untreated.size()) +
                    " untreated");
  const double m1 = mean(treated);
  const double m0 = mean(untreated);
  const double pooled = 0.5 * (sample_variance(treated) + sample_variance(untreated));
  SmdResult out;
  if (pooled <= 0.0) {
    if (m1 == m0)
      out.value = 0.0;
    else
      out.degenerate = true;
    return out;
  }
  out.value = (m1 - m0) / std::sqrt(pooled);
  return out;
}

SmdResult smd(std::span<const double> z, const RowMask& treated) {
  if (treated.size() != z.size())
    throw Error(ErrorCode::invalid_argument, "mask length differs from column length");
  std::vector<double> t, u;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (is_missing(z[i])) continue;
    (treated.test(i) ? t : u).push_back(z[i]);
  }
  return smd(t, u);
}

ImbalanceEntry imbalance_score(const Dataset& ds, const CausalConfig& cfg, std::string_view covariate,
                               const RowMask& scope, ScopeTag tag) {
  const Column& x = ds.column(cfg.cause);
  const Column& z = ds.column(covariate);
  const RowMask rows = scope & listwise_complete(ds, {cfg.cause, covariate});
  if (rows.count() < 4)
    throw Error(ErrorCode::insufficient_sample,
                "imbalance needs at least 4 complete rows in scope", std::string(covariate));

  ImbalanceEntry entry;
  entry.covariate = std::string(covariate);
  entry.scope = tag;
  const bool binary_cause = x.is_binary();
  entry.metric = binary_cause ? BalanceMetric::smd : BalanceMetric::spearman;
  const auto xv = gather(x, rows);

  if (!z.is_categorical()) {
    entry.score = score_indicator(gather(z, rows), xv, binary_cause, entry.degenerate);
    return entry;
  }

  std::vector<Column> indicators;
  try {
    indicators = encode_categorical(z, rows);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::degenerate_encoding) throw;
    return entry;  // a single level in scope: constant covariate
  }
  for (const auto& ind : indicators) {
    auto s = score_indicator(gather(ind, rows), xv, binary_cause, entry.degenerate);
    if (s && (!entry.score || std::abs(*s) > std::abs(*entry.score))) {
      entry.score = s;
      entry.indicator = ind.name;
    }
  }
  return entry;
}

ImbalanceReport imbalance_report(const Dataset& ds, const CausalConfig& cfg, const RowMask& scope,
                                 ScopeTag tag, double threshold) {
  if (!(threshold >= 0.0)) throw Error(ErrorCode::invalid_argument, "threshold must be non-negative");
  ImbalanceReport report;
  report.scope = tag;
  report.threshold = threshold;

  const Column& x = ds.column(cfg.cause);
  const RowMask rows = scope & listwise_complete(ds, {cfg.cause});
  report.n_rows = rows.count();
  if (x.is_binary())
    for (std::size_t r : rows.indices()) (x.values[r] == 1.0 ? report.n_treated : report.n_untreated)++;

  for (const auto& name : cfg.active_confounders()) {
    ImbalanceEntry entry;
    try {
      entry = imbalance_score(ds, cfg, name, scope, tag);
    } catch (const Error& e) {
      entry.covariate = name;
      entry.scope = tag;
      entry.metric = x.is_binary() ? BalanceMetric::smd : BalanceMetric::spearman;
      entry.failure = std::string(e.name()) + ": " + e.what();
    }
    if (entry.score) entry.flagged = std::abs(*entry.score) > threshold;
    report.entries.push_back(std::move(entry));
  }

  double total = 0.0;
  std::size_t defined = 0;
  for (const auto& e : report.entries)
    if (e.score) {
      total += std::abs(*e.score);
      ++defined;
    }
  if (defined == 0)
    throw Error(ErrorCode::empty_report, "no covariate has a defined imbalance score in scope",
                tag.label());
  report.mean_abs_score = total / static_cast<double>(defined);
  report.warning = report.mean_abs_score > threshold;

  std::stable_sort(report.entries.begin(), report.entries.end(),
                   [](const ImbalanceEntry& a, const ImbalanceEntry& b) {
                     if (a.score.has_value() != b.score.has_value()) return a.score.has_value();
                     if (a.score && std::abs(*a.score) != std::abs(*b.score))
                       return std::abs(*a.score) > std::abs(*b.score);
                     return a.covariate < b.covariate;
                   });
  return report;
}

}  // namespace spurlens
