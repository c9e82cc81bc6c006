#include <algorithm>
#include <cmath>
#include <exception>
#include <random>

#include "spurlens/error.hpp"
#include "spurlens/kernels.hpp"
#include "spurlens/stats.hpp"

namespace spurlens {

namespace kernels {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  };
  return mix(base ^ mix(index + 0x632be59bd9b4e019ull));
}

namespace {

void check_options(std::span<const std::size_t> rows, const BootstrapOptions& options) {
  if (options.replicates < kMinReplicates)
    throw Error(ErrorCode::invalid_argument, "bootstrap needs at least 100 replicates",
                std::to_string(options.replicates));
  if (!(options.level > 0.0 && options.level < 1.0))
    throw Error(ErrorCode::invalid_argument, "confidence level must lie in (0, 1)");
  if (rows.empty()) throw Error(ErrorCode::invalid_argument, "bootstrap over an empty sample");
}

struct ReplicateOutcome {
  double value = 0.0;
  std::size_t attempts = 0;
  bool defined = false;
};

// One replicate draws from its own stream, so the result does not depend
// on which thread runs it.
ReplicateOutcome run_replicate(const Statistic& statistic, std::span<const std::size_t> rows,
                               std::uint64_t seed, std::size_t replicate) {
  std::mt19937_64 rng(derive_seed(seed, replicate));
  std::uniform_int_distribution<std::size_t> pick(0, rows.size() - 1);
  std::vector<std::size_t> sample(rows.size());
  ReplicateOutcome out;
  while (out.attempts < kMaxAttemptsPerReplicate) {
    ++out.attempts;
    for (auto& s : sample) s = rows[pick(rng)];
    if (auto v = statistic(sample); v && std::isfinite(*v)) {
      out.value = *v;
      out.defined = true;
      break;
    }
  }
  return out;
}

BootstrapResult finalize(std::vector<ReplicateOutcome> outcomes, const BootstrapOptions& options) {
  BootstrapResult result;
  result.statistics.reserve(outcomes.size());
  bool exhausted = false;
  for (const auto& o : outcomes) {
    result.attempts += o.attempts;
    result.undefined += o.attempts - (o.defined ? 1 : 0);
    if (!o.defined) exhausted = true;
    result.statistics.push_back(o.value);
  }
  if (exhausted || static_cast<double>(result.undefined) > 0.9 * static_cast<double>(result.attempts))
    throw Error(ErrorCode::bootstrap_failure,
                "statistic undefined on too many resamples",
                std::to_string(result.undefined) + " of " + std::to_string(result.attempts));

  std::vector<double> sorted = result.statistics;
  std::sort(sorted.begin(), sorted.end());
  const double alpha = 1.0 - options.level;
  result.ci.low = quantile_sorted(sorted, alpha / 2.0);
  result.ci.high = quantile_sorted(sorted, 1.0 - alpha / 2.0);
  result.ci.level = options.level;
  result.ci.replicates = options.replicates;
  result.ci.seed = options.seed;
  return result;
}

}  // namespace

namespace serial {

BootstrapResult bootstrap(const Statistic& statistic, std::span<const std::size_t> rows,
                          const BootstrapOptions& options) {
  check_options(rows, options);
  std::vector<ReplicateOutcome> outcomes(options.replicates);
  for (std::size_t b = 0; b < options.replicates; ++b)
    outcomes[b] = run_replicate(statistic, rows, options.seed, b);
  return finalize(std::move(outcomes), options);
}

}  // namespace serial

namespace parallel {

BootstrapResult bootstrap(const Statistic& statistic, std::span<const std::size_t> rows,
                          const BootstrapOptions& options) {
  check_options(rows, options);
  std::vector<ReplicateOutcome> outcomes(options.replicates);
  std::exception_ptr failure;
  const auto replicates = static_cast<std::ptrdiff_t>(options.replicates);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t b = 0; b < replicates; ++b) {
    try {
      outcomes[static_cast<std::size_t>(b)] =
          run_replicate(statistic, rows, options.seed, static_cast<std::size_t>(b));
    } catch (...) {
#pragma omp critical(spurlens_bootstrap_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return finalize(std::move(outcomes), options);
}

}  // namespace parallel
}  // namespace kernels

double BootstrapResult::standard_error() const { return std::sqrt(sample_variance(statistics)); }

BootstrapResult bootstrap_ci(const Statistic& statistic, std::span<const std::size_t> rows,
                             const BootstrapOptions& options) {
  return kernels::parallel::bootstrap(statistic, rows, options);
}

}  // namespace spurlens
