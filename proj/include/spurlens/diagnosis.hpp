#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spurlens/imbalance.hpp"
#include "spurlens/partition.hpp"

namespace spurlens {

inline constexpr std::string_view kSimpsonWarningText = "Simpson's Paradox";

/// Effect estimate over an ad-hoc scope; the population scope gives the
/// average treatment effect estimate. Needs at least 4 complete rows.
EffectEstimate basic_statistics(const Dataset& ds, const CausalConfig& cfg, const RowMask& scope,
                                std::size_t replicates = kDefaultReplicates, std::uint64_t seed = 0);

struct SimpsonWarning {
  bool flag = false;
  std::optional<double> overall_effect;
  std::optional<double> subgroup_effect;
  // informational: does each side's bootstrap CI exclude zero
  std::optional<bool> overall_ci_excludes_zero;
  std::optional<bool> subgroup_ci_excludes_zero;
  std::optional<std::string> suppressed_reason;
};

/// Flags a subgroup whose point estimate strictly opposes the overall sign.
SimpsonWarning simpson_check(const EffectEstimate& overall, const EffectEstimate& subgroup);

std::vector<SimpsonWarning> detect_simpsons(const EffectEstimate& overall,
                                            std::span<const EffectEstimate> subgroups);

struct SectionFailure {
  std::string error_code;
  std::string message;
};

/// A report section that either holds a value or says why it does not.
template <class T>
struct Section {
  std::optional<T> value;
  std::optional<SectionFailure> failure;
};

struct DiagnosisReport {
  ScopeTag scope;
  std::size_t n_dropped = 0;  // rows lost to missing cause/outcome
  Section<EffectEstimate> statistics;
  Section<EffectEstimate> population_statistics;
  Section<SimpsonWarning> simpson_warning;
  Section<ImbalanceReport> population_imbalance;
  Section<ImbalanceReport> subgroup_imbalance;
  std::vector<std::string> residual_confounders;
};

/// Bootstrap seed for one diagnosis scope, stable across sessions.
std::uint64_t diagnosis_seed(std::string_view dataset_id, std::optional<int> subgroup,
                             std::uint64_t seed);

/// Diagnoses one subgroup of `partition` (or the population when
/// `subgroup` is empty) against the population.
DiagnosisReport diagnose(const Dataset& ds, const CausalConfig& cfg, const Partition* partition,
                         std::optional<int> subgroup, std::size_t replicates, std::uint64_t seed,
                         double threshold = kImbalanceThreshold);

}  // namespace spurlens
