#include "spurlens/diagnosis.hpp"

#include "spurlens/error.hpp"
#include "spurlens/kernels.hpp"

namespace spurlens {

namespace {

template <class T, class F>
Section<T> attempt(F&& f) {
  Section<T> s;
  try {
    s.value = f();
  } catch (const Error& e) {
    s.failure = SectionFailure{std::string(e.name()), e.what()};
  }
  return s;
}

std::optional<bool> excludes_zero(const EffectEstimate& e) {
  if (!e.ci) return std::nullopt;
  return e.ci->low > 0.0 || e.ci->high < 0.0;
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

EffectEstimate basic_statistics(const Dataset& ds, const CausalConfig& cfg, const RowMask& scope,
                                std::size_t replicates, std::uint64_t seed) {
  const RowMask rows = scope & analysis_scope(ds, cfg);
  if (rows.count() < 4)
    throw Error(ErrorCode::insufficient_sample, "basic statistics need at least 4 complete rows",
                std::to_string(rows.count()));
  return leaf_effect(ds, cfg, rows, replicates, seed);
}

SimpsonWarning simpson_check(const EffectEstimate& overall, const EffectEstimate& subgroup) {
  if (!overall.effect)
    throw Error(ErrorCode::invalid_argument, "overall effect is undefined",
                overall.undefined_reason.value_or(""));
  SimpsonWarning w;
  w.overall_effect = overall.effect;
  w.subgroup_effect = subgroup.effect;
  w.overall_ci_excludes_zero = excludes_zero(overall);
  w.subgroup_ci_excludes_zero = excludes_zero(subgroup);
  if (!subgroup.effect) {
    w.suppressed_reason = subgroup.undefined_reason.value_or("subgroup effect undefined");
    return w;
  }
  const int a = sign(*overall.effect);
  const int b = sign(*subgroup.effect);
  w.flag = a != 0 && b != 0 && a != b;
  return w;
}

std::vector<SimpsonWarning> detect_simpsons(const EffectEstimate& overall,
                                            std::span<const EffectEstimate> subgroups) {
  std::vector<SimpsonWarning> out;
  out.reserve(subgroups.size());
  for (const auto& s : subgroups) out.push_back(simpson_check(overall, s));
  return out;
}

std::uint64_t diagnosis_seed(std::string_view dataset_id, std::optional<int> subgroup,
                             std::uint64_t seed) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : dataset_id) {
    h ^= c;
    h *= 1099511628211ull;
  }
  const std::uint64_t scope = subgroup ? static_cast<std::uint64_t>(*subgroup) + 1 : 0;
  return kernels::derive_seed(kernels::derive_seed(seed, h), scope);
}

DiagnosisReport diagnose(const Dataset& ds, const CausalConfig& cfg, const Partition* partition,
                         std::optional<int> subgroup, std::size_t replicates, std::uint64_t seed,
                         double threshold) {
  validate_config(ds, cfg);
  const RowMask population = analysis_scope(ds, cfg);
  RowMask scope = population;
  if (subgroup) {
    if (!partition)
      throw Error(ErrorCode::partition_required, "subgroup diagnosis needs a partition");
    scope = partition->subgroup(*subgroup).mask & population;
  }

  DiagnosisReport report;
  report.scope = ScopeTag{subgroup};
  report.n_dropped = ds.n_rows() - population.count();

  report.population_statistics = attempt<EffectEstimate>([&] {
    return basic_statistics(ds, cfg, population, replicates, diagnosis_seed(ds.id(), std::nullopt, seed));
  });
  if (subgroup) {
    report.statistics = attempt<EffectEstimate>([&] {
      return basic_statistics(ds, cfg, scope, replicates, diagnosis_seed(ds.id(), subgroup, seed));
    });
  } else {
    report.statistics = report.population_statistics;
  }

  if (report.population_statistics.value && report.statistics.value) {
    report.simpson_warning = attempt<SimpsonWarning>(
        [&] { return simpson_check(*report.population_statistics.value, *report.statistics.value); });
  } else {
    report.simpson_warning.failure =
        SectionFailure{"unavailable", "effect estimates are missing for the comparison"};
  }

  report.population_imbalance = attempt<ImbalanceReport>(
      [&] { return imbalance_report(ds, cfg, population, ScopeTag{}, threshold); });
  report.subgroup_imbalance = attempt<ImbalanceReport>(
      [&] { return imbalance_report(ds, cfg, scope, ScopeTag{subgroup}, threshold); });
  if (report.subgroup_imbalance.value)
    for (const auto& e : report.subgroup_imbalance.value->entries)
      if (e.flagged) report.residual_confounders.push_back(e.covariate);
  return report;
}

}  // namespace spurlens
