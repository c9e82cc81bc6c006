#include "spurlens/storyboard.hpp"

#include <algorithm>
#include <cmath>

#include "spurlens/error.hpp"
#include "spurlens/stats.hpp"

namespace spurlens {

int bin_index(std::span<const double> edges, double v) {
  if (is_missing(v)) return -1;
  return static_cast<int>(std::upper_bound(edges.begin(), edges.end(), v) - edges.begin());
}

BinAssignment bin_treatment(std::span<const double> values, std::size_t bins) {
  if (bins < 2) throw Error(ErrorCode::invalid_argument, "at least two cause bins are required");
  std::vector<double> observed;
  for (double v : values)
    if (!is_missing(v)) observed.push_back(v);
  if (observed.empty()) throw Error(ErrorCode::single_bin, "cause has no observed values");
  std::sort(observed.begin(), observed.end());
  if (observed.front() == observed.back())
    throw Error(ErrorCode::single_bin, "cause is constant; nothing to bin");

  BinAssignment out;
  out.requested = bins;
  out.binary = std::all_of(observed.begin(), observed.end(), [](double v) { return v == 0.0 || v == 1.0; });
  if (out.binary) {
    out.edges = {0.5};
  } else {
    for (std::size_t i = 1; i < bins; ++i) {
      const double e = quantile_sorted(observed, static_cast<double>(i) / static_cast<double>(bins));
      // an edge at the minimum would open an empty first bin
      if (e <= observed.front()) continue;
      if (!out.edges.empty() && e <= out.edges.back()) continue;
      out.edges.push_back(e);
    }
  }
  out.n_bins = out.edges.size() + 1;
  out.bin.reserve(values.size());
  for (double v : values) out.bin.push_back(bin_index(out.edges, v));
  return out;
}

std::vector<double> population_edges(const Dataset& ds, const CausalConfig& cfg,
                                     const RowMask& population, std::size_t bins) {
  const Column& x = ds.column(cfg.cause);
  const RowMask rows = population & listwise_complete(ds, {cfg.cause, cfg.outcome});
  if (x.is_binary()) {
    if (bins < 2) throw Error(ErrorCode::invalid_argument, "at least two cause bins are required");
    return {0.5};
  }
  return bin_treatment(gather(x, rows), bins).edges;
}

StoryboardDiagram build_storyboard(const Dataset& ds, const CausalConfig& cfg, const RowMask& scope,
                                   std::span<const double> bin_edges, ScopeTag tag) {
  if (!std::is_sorted(bin_edges.begin(), bin_edges.end()))
    throw Error(ErrorCode::invalid_argument, "bin edges must be ascending");
  const Column& x = ds.column(cfg.cause);
  const Column& y = ds.column(cfg.outcome);
  const RowMask rows = scope & listwise_complete(ds, {cfg.cause, cfg.outcome});
  if (rows.empty())
    throw Error(ErrorCode::empty_diagram, "scope has no complete cause/outcome rows", tag.label());

  StoryboardDiagram d;
  d.scope = tag;
  d.bin_edges.assign(bin_edges.begin(), bin_edges.end());
  d.n_bins = bin_edges.size() + 1;
  d.size = rows.count();
  std::vector<double> sums(d.n_bins, 0.0);
  std::vector<std::size_t> counts(d.n_bins, 0);
  std::vector<double> outcomes;
  outcomes.reserve(d.size);
  for (std::size_t r : rows.indices()) {
    const auto b = static_cast<std::size_t>(bin_index(bin_edges, x.values[r]));
    ++counts[b];
    sums[b] += y.values[r];
    outcomes.push_back(y.values[r]);
  }
  const double n = static_cast<double>(d.size);
  for (std::size_t b = 0; b < d.n_bins; ++b) {
    const double frac = static_cast<double>(counts[b]) / n;
    d.cause_nodes.push_back({b, counts[b], frac});
    if (counts[b]) d.pathways.push_back({b, counts[b], frac, sums[b] / static_cast<double>(counts[b])});
  }
  d.scope_mean_outcome = mean(outcomes);
  d.scope_outcome_sd = std::sqrt(sample_variance(outcomes));
  return d;
}

std::string_view shape_name(Shape s) noexcept {
  switch (s) {
    case Shape::pass_through: return "pass_through";
    case Shape::hill: return "hill";
    case Shape::valley: return "valley";
    case Shape::mixed: return "mixed";
  }
  return "mixed";
}

namespace {

double upper_share(const StoryboardDiagram& d) {
  const std::size_t top = (d.n_bins + 1) / 2;
  double s = 0.0;
  for (const auto& node : d.cause_nodes)
    if (node.bin >= d.n_bins - top) s += node.fraction;
  return s;
}

}  // namespace

ShapeLabel classify_shape(const StoryboardDiagram& diagram, const StoryboardDiagram& population,
                          bool is_population, const ShapeThresholds& t) {
  if (diagram.bin_edges != population.bin_edges)
    throw Error(ErrorCode::invalid_argument, "diagrams must share bin edges");
  ShapeLabel out;
  auto& ev = out.evidence;
  ev.p_hi = upper_share(diagram);
  ev.p_hi_pop = upper_share(population);
  ev.rel_outcome = population.scope_outcome_sd > 0
                       ? (diagram.scope_mean_outcome - population.scope_mean_outcome) /
                             population.scope_outcome_sd
                       : 0.0;
  if (diagram.pathways.size() >= 2) {
    std::vector<double> idx, end;
    for (const auto& p : diagram.pathways) {
      idx.push_back(static_cast<double>(p.bin));
      end.push_back(p.endpoint);
    }
    ev.bin_trend_rho = pearson(midranks(idx), midranks(end));
  } else {
    out.degenerate = true;
    out.label = Shape::mixed;
    return out;
  }

  if (!is_population) {
    if (ev.p_hi >= ev.p_hi_pop + t.propensity_margin && ev.rel_outcome <= -t.outcome_margin) {
      out.label = Shape::hill;
      return out;
    }
    if (ev.p_hi <= ev.p_hi_pop - t.propensity_margin && ev.rel_outcome >= t.outcome_margin) {
      out.label = Shape::valley;
      return out;
    }
  }
  out.label = ev.bin_trend_rho && *ev.bin_trend_rho <= t.pass_through_rho ? Shape::pass_through
                                                                           : Shape::mixed;
  return out;
}

}  // namespace spurlens
