#include "spurlens/subgroup_views.hpp"

#include <algorithm>
#include <cmath>

#include "spurlens/error.hpp"
#include "spurlens/kernels.hpp"
#include "spurlens/stats.hpp"

namespace spurlens {

namespace {

struct AxisColumn {
  std::string name;
  std::string source;
  std::optional<std::string> indicator;
  std::vector<double> values;  // full dataset length
};

// Resolves feature names to numeric columns. A categorical column expands
// to its J-1 indicators; "col=level" names select one indicator.
std::vector<AxisColumn> resolve_axes(const Dataset& ds, const std::vector<std::string>& names,
                                     const RowMask& scope) {
  std::vector<AxisColumn> out;
  for (const auto& name : names) {
    if (!ds.has(name)) {
      const auto eq = name.find('=');
      if (eq != std::string::npos && ds.has(name.substr(0, eq))) {
        const Column& col = ds.column(name.substr(0, eq));
        const std::string level = name.substr(eq + 1);
        if (col.is_categorical() &&
            std::binary_search(col.type.levels.begin(), col.type.levels.end(), level)) {
          AxisColumn a{name, col.name, name, std::vector<double>(col.size())};
          for (std::size_t r = 0; r < col.size(); ++r)
            a.values[r] = col.missing(r) ? kMissing
                                         : (col.type.levels[static_cast<std::size_t>(col.values[r])] == level);
          out.push_back(std::move(a));
          continue;
        }
      }
      ds.column(name);  // throws unknown_column
    }
    const Column& col = ds.column(name);
    if (!col.is_categorical()) {
      out.push_back({name, name, std::nullopt, col.values});
      continue;
    }
    std::vector<Column> indicators;
    try {
      indicators = encode_categorical(col, scope);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::degenerate_encoding) throw;
      std::vector<double> zeros(col.size(), 0.0);
      for (std::size_t r = 0; r < col.size(); ++r)
        if (col.missing(r)) zeros[r] = kMissing;
      out.push_back({name, name, std::nullopt, std::move(zeros)});
      continue;
    }
    for (auto& ind : indicators) out.push_back({ind.name, name, ind.name, std::move(ind.values)});
  }
  return out;
}

SlopeSign sign_of(double diff) {
  if (diff > kSlopeSignTolerance) return SlopeSign::positive;
  if (diff < -kSlopeSignTolerance) return SlopeSign::negative;
  return SlopeSign::flat;
}

}  // namespace

std::string_view slope_sign_name(SlopeSign s) noexcept {
  switch (s) {
    case SlopeSign::positive: return "positive";
    case SlopeSign::negative: return "negative";
    case SlopeSign::flat: return "flat";
    case SlopeSign::undefined: return "undefined";
  }
  return "undefined";
}

CircleLineModel circle_line(const Dataset& ds, const CausalConfig& cfg, const RowMask& rows,
                            std::optional<int> id) {
  const Column& x = ds.column(cfg.cause);
  const Column& y = ds.column(cfg.outcome);
  CircleLineModel m;
  m.subgroup_id = id;
  double s1 = 0, s0 = 0;
  for (std::size_t r : rows.indices()) {
    if (x.missing(r) || y.missing(r)) continue;
    if (x.values[r] == 1.0) {
      ++m.treated.size;
      s1 += y.values[r];
    } else {
      ++m.untreated.size;
      s0 += y.values[r];
    }
  }
  m.size = m.treated.size + m.untreated.size;
  if (m.treated.size) m.treated.mean_outcome = s1 / static_cast<double>(m.treated.size);
  if (m.untreated.size) m.untreated.mean_outcome = s0 / static_cast<double>(m.untreated.size);
  m.slope_sign = m.treated.mean_outcome && m.untreated.mean_outcome
                     ? sign_of(*m.treated.mean_outcome - *m.untreated.mean_outcome)
                     : SlopeSign::undefined;
  return m;
}

EllipseModel ellipse(const Dataset& ds, const CausalConfig& cfg, const RowMask& rows,
                     std::optional<int> id) {
  const RowMask usable = rows & listwise_complete(ds, {cfg.cause, cfg.outcome});
  const auto xs = gather(ds.column(cfg.cause), usable);
  const auto ys = gather(ds.column(cfg.outcome), usable);
  EllipseModel m;
  m.subgroup_id = id;
  m.size = xs.size();
  m.mean_x = mean(xs);
  m.mean_y = mean(ys);
  const double vx = sample_variance(xs);
  m.sd_x = std::sqrt(vx);
  m.sd_y = std::sqrt(sample_variance(ys));
  if (xs.size() >= 2 && vx > 0) {
    double cov = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) cov += (xs[i] - m.mean_x) * (ys[i] - m.mean_y);
    cov /= static_cast<double>(xs.size() - 1);
    m.slope = cov / vx;
  }
  m.xy_correlation = pearson(xs, ys);
  return m;
}

CausalitySpace causality_space(const Dataset& ds, const CausalConfig& cfg, const Partition& partition) {
  const bool binary = ds.column(cfg.cause).is_binary();
  const RowMask usable = listwise_complete(ds, {cfg.cause, cfg.outcome});
  CausalitySpace space;
  space.mode = binary ? ViewerMode::circleline : ViewerMode::ellipse;
  RowMask all(ds.n_rows());
  for (const auto& sg : partition.subgroups) {
    const RowMask rows = sg.mask & usable;
    all = all | rows;
    if (rows.count() < 2) {
      space.degenerate.push_back(sg.id);
      space.notices.push_back("subgroup " + std::to_string(sg.id) + " has fewer than 2 usable rows");
      continue;
    }
    if (binary)
      space.subgroups.emplace_back(circle_line(ds, cfg, rows, sg.id));
    else
      space.subgroups.emplace_back(ellipse(ds, cfg, rows, sg.id));
  }
  if (binary)
    space.aggregate = circle_line(ds, cfg, all, std::nullopt);
  else
    space.aggregate = ellipse(ds, cfg, all, std::nullopt);
  return space;
}

std::vector<FeatureScore> discriminative_features(const Dataset& ds, const Partition& partition,
                                                  const std::vector<std::string>& features,
                                                  std::size_t k) {
  if (partition.subgroups.size() < 2)
    throw Error(ErrorCode::invalid_argument, "discriminative features need at least two subgroups");
  if (k == 0) throw Error(ErrorCode::invalid_argument, "k must be at least 1");

  const auto positions = partition.scope.indices();
  std::vector<int> group(positions.size(), -1);
  {
    std::vector<int> owner(ds.n_rows(), -1);
    for (std::size_t g = 0; g < partition.subgroups.size(); ++g)
      for (std::size_t r : partition.subgroups[g].mask.indices()) owner[r] = static_cast<int>(g);
    for (std::size_t i = 0; i < positions.size(); ++i) group[i] = owner[positions[i]];
  }
  // rows outside every subgroup would break the one-vs-rest labelling
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < positions.size(); ++i)
    if (group[i] >= 0) kept.push_back(i);

  const auto axes = resolve_axes(ds, features, partition.scope);
  std::vector<std::vector<double>> columns;
  std::vector<int> labels;
  for (std::size_t i : kept) labels.push_back(group[i]);
  for (const auto& a : axes) {
    std::vector<double> v;
    v.reserve(kept.size());
    for (std::size_t i : kept) v.push_back(a.values[positions[i]]);
    columns.push_back(std::move(v));
  }
  const auto scores = aggregated_auc(columns, labels, static_cast<int>(partition.subgroups.size()));

  std::vector<FeatureScore> out;
  for (std::size_t f = 0; f < axes.size(); ++f) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const FeatureScore& s) { return s.feature == axes[f].source; });
    if (it == out.end()) {
      out.push_back({axes[f].source, scores[f], axes[f].indicator});
    } else if (scores[f] > it->auc) {
      it->auc = scores[f];
      it->indicator = axes[f].indicator;
    }
  }
  std::sort(out.begin(), out.end(), [](const FeatureScore& a, const FeatureScore& b) {
    if (a.auc != b.auc) return a.auc > b.auc;
    return a.feature < b.feature;
  });
  if (out.size() > k) out.resize(k);
  return out;
}

RadarGlyphs radar_glyphs(const Dataset& ds, const Partition& partition,
                         const std::vector<std::string>& axes_in) {
  const auto axes = resolve_axes(ds, axes_in, partition.scope);
  if (axes.size() > kMaxGlyphAxes)
    throw Error(ErrorCode::invalid_argument,
                "at most " + std::to_string(kMaxGlyphAxes) + " glyph axes, got " +
                    std::to_string(axes.size()));
  RadarGlyphs out;
  std::vector<double> lo(axes.size()), hi(axes.size());
  for (std::size_t a = 0; a < axes.size(); ++a) {
    out.axes.push_back(axes[a].name);
    lo[a] = std::numeric_limits<double>::infinity();
    hi[a] = -std::numeric_limits<double>::infinity();
    for (std::size_t r : partition.scope.indices()) {
      const double v = axes[a].values[r];
      if (is_missing(v)) continue;
      lo[a] = std::min(lo[a], v);
      hi[a] = std::max(hi[a], v);
    }
    out.degenerate.push_back(!(hi[a] > lo[a]));
  }

  auto glyph = [&](const RowMask& rows, ScopeTag tag) {
    RadarGlyph g;
    g.scope = tag;
    g.size = rows.count();
    const auto idx = rows.indices();
    for (std::size_t a = 0; a < axes.size(); ++a) {
      double s = 0;
      std::size_t n = 0;
      if (!out.degenerate[a]) {
        for (std::size_t r : idx) {
          const double v = axes[a].values[r];
          if (is_missing(v)) continue;
          s += (v - lo[a]) / (hi[a] - lo[a]);
          ++n;
        }
      }
      g.values.push_back(n ? s / static_cast<double>(n) : 0.0);
    }
    return g;
  };

  out.rows.push_back(glyph(partition.scope, ScopeTag{}));
  for (const auto& sg : partition.subgroups) out.rows.push_back(glyph(sg.mask, ScopeTag{sg.id}));
  return out;
}

}  // namespace spurlens
