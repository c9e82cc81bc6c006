#pragma once

// Payload builders shared by the CLI and the HTTP service, so both paths
// emit the same bytes for the same inputs.

#include <cstdint>
#include <optional>

#include "spurlens/payloads.hpp"

namespace spurlens {

inline constexpr std::uint64_t kDefaultSeed = 1;

struct AnalysisOptions {
  std::size_t histogram_bins = kDefaultHistogramBins;
  std::size_t top_features = kDefaultTopFeatures;
  std::size_t cause_bins = kDefaultCauseBins;
  std::size_t replicates = kDefaultReplicates;
  std::uint64_t seed = kDefaultSeed;
  double threshold = kImbalanceThreshold;
};

Json ranking_payload(const Dataset& ds, const CausalConfig& cfg, const AnalysisOptions& opts);

/// `request` is {"manual": {"rules": [...]}} or {"auto": {...}}.
Partition run_partition(const Dataset& ds, const CausalConfig& cfg, const Json& request,
                        std::uint64_t seed);

Json viewer_payload(const Dataset& ds, const CausalConfig& cfg, const Partition& partition,
                    const AnalysisOptions& opts);

/// Population diagram only when `partition` is null.
Json storyboard_payload(const Dataset& ds, const CausalConfig& cfg, const Partition* partition,
                        const AnalysisOptions& opts);

Json diagnosis_payload(const Dataset& ds, const CausalConfig& cfg, const Partition* partition,
                       std::optional<int> subgroup, const AnalysisOptions& opts);

/// Whole-pipeline report: every section is the corresponding service payload.
Json full_report(const Dataset& ds, const CausalConfig& cfg, const Partition* partition,
                 const AnalysisOptions& opts);

std::string_view engine_version() noexcept;

}  // namespace spurlens
