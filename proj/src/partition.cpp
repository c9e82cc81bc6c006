#include "spurlens/partition.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "spurlens/error.hpp"
#include "spurlens/stats.hpp"

namespace spurlens {

namespace {

std::string join_levels(const std::vector<std::string>& levels) {
  std::string out = "{";
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (i) out += ",";
    out += levels[i];
  }
  return out + "}";
}

bool step_selects(const PathStep& step, const Column& col, std::size_t row) {
  if (col.missing(row)) return false;
  const double v = col.values[row];
  if (col.is_categorical()) {
    const auto& level = col.type.levels[static_cast<std::size_t>(v)];
    const bool in = std::find(step.levels.begin(), step.levels.end(), level) != step.levels.end();
    return in != step.exclude;
  }
  if (step.lower && v < *step.lower) return false;
  if (step.upper && v >= *step.upper) return false;
  return true;
}

// Collapses repeated conditions on one covariate into a single step.
std::vector<PathStep> merge_path(const std::vector<PathStep>& path) {
  std::vector<PathStep> merged;
  for (const auto& step : path) {
    auto it = std::find_if(merged.begin(), merged.end(),
                           [&](const PathStep& s) { return s.covariate == step.covariate; });
    if (it == merged.end()) {
      merged.push_back(step);
      continue;
    }
    if (!step.levels.empty() || !it->levels.empty()) {
      if (!it->exclude) continue;
      if (!step.exclude) {
        *it = step;
        continue;
      }
      for (const auto& l : step.levels)
        if (std::find(it->levels.begin(), it->levels.end(), l) == it->levels.end())
          it->levels.push_back(l);
      std::sort(it->levels.begin(), it->levels.end());
      continue;
    }
    if (step.lower) it->lower = it->lower ? std::max(*it->lower, *step.lower) : *step.lower;
    if (step.upper) it->upper = it->upper ? std::min(*it->upper, *step.upper) : *step.upper;
  }
  return merged;
}

struct TreeFeature {
  std::string name;
  std::string source;
  std::optional<std::string> level;  // indicator of a categorical source
  bool binary = false;
  std::vector<double> values;
};

std::vector<std::string> resolve_features(const CausalConfig& cfg, const TreeConfig& tcfg) {
  return tcfg.features.empty() ? cfg.covariates : tcfg.features;
}

RowMask tree_scope(const Dataset& ds, const CausalConfig& cfg, const std::vector<std::string>& names) {
  RowMask scope = analysis_scope(ds, cfg);
  return scope & listwise_complete(ds, names);
}

std::vector<TreeFeature> build_features(const Dataset& ds, const CausalConfig& cfg,
                                        const std::vector<std::string>& names, const RowMask& scope) {
  std::vector<TreeFeature> out;
  for (const auto& name : names) {
    const Column& col = ds.column(name);
    if (name == cfg.cause || name == cfg.outcome)
      throw Error(ErrorCode::invalid_config, "tree feature equals the cause or outcome", name);
    if (!col.is_categorical()) {
      out.push_back({name, name, std::nullopt, col.is_binary(), col.values});
      continue;
    }
    std::vector<Column> indicators;
    try {
      indicators = encode_categorical(col, scope);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::degenerate_encoding) continue;  // constant: never splits
      throw;
    }
    for (auto& ind : indicators) {
      const std::string level = ind.name.substr(name.size() + 1);
      out.push_back({ind.name, name, level, true, std::move(ind.values)});
    }
  }
  return out;
}

std::pair<PathStep, PathStep> split_steps(const TreeFeature& f, double threshold) {
  PathStep left, right;
  left.covariate = right.covariate = f.source;
  left.binary = right.binary = f.binary && !f.level;
  if (f.level) {
    left.levels = right.levels = {*f.level};
    left.exclude = true;
  } else {
    left.upper = threshold;
    right.lower = threshold;
  }
  return {left, right};
}

double share(std::span<const double> target, std::span<const std::size_t> rows) {
  double s = 0;
  for (std::size_t r : rows) s += target[r];
  return rows.empty() ? 0.0 : s / static_cast<double>(rows.size());
}

}  // namespace

std::string describe(const PathStep& step) {
  if (!step.levels.empty()) {
    if (step.levels.size() == 1)
      return step.covariate + (step.exclude ? "≠" : "=") + step.levels.front();
    return step.covariate + (step.exclude ? "∉" : "∈") + join_levels(step.levels);
  }
  if (step.binary) {
    const bool upper_only = step.upper && !step.lower;
    const bool lower_only = step.lower && !step.upper;
    if (upper_only && *step.upper > 0.0 && *step.upper <= 1.0) return step.covariate + "=0";
    if (lower_only && *step.lower > 0.0 && *step.lower <= 1.0) return step.covariate + "=1";
  }
  if (step.lower && step.upper)
    return format_number(*step.lower) + "<=" + step.covariate + "<" + format_number(*step.upper);
  if (step.lower) return step.covariate + ">=" + format_number(*step.lower);
  if (step.upper) return step.covariate + "<" + format_number(*step.upper);
  return step.covariate;
}

std::string describe(const std::vector<PathStep>& path) {
  if (path.empty()) return "all";
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += " ∧ ";
    out += describe(path[i]);
  }
  return out;
}

const Subgroup& Partition::subgroup(int id) const {
  for (const auto& sg : subgroups)
    if (sg.id == id) return sg;
  throw Error(ErrorCode::not_found, "unknown subgroup " + std::to_string(id), std::to_string(id));
}

RowMask analysis_scope(const Dataset& ds, const CausalConfig& cfg) {
  return listwise_complete(ds, {cfg.cause, cfg.outcome});
}

Partition manual_partition(const Dataset& ds, const std::vector<PartitionRule>& rules,
                           const RowMask& scope_in) {
  if (rules.empty()) throw Error(ErrorCode::invalid_rule, "at least one rule is required");
  RowMask scope = scope_in;
  for (const auto& rule : rules) scope = scope & listwise_complete(ds, {rule.covariate});
  if (scope.empty()) throw Error(ErrorCode::partition_error, "no rows left in scope");

  // per-rule cells as (step, mask)
  std::vector<std::vector<std::pair<PathStep, RowMask>>> cells;
  for (const auto& rule : rules) {
    const Column& col = ds.column(rule.covariate);
    std::vector<PathStep> steps;
    if (col.is_categorical()) {
      if (rule.levels.empty())
        throw Error(ErrorCode::invalid_rule, "categorical rule needs a level subset", rule.covariate);
      for (const auto& l : rule.levels)
        if (!std::binary_search(col.type.levels.begin(), col.type.levels.end(), l))
          throw Error(ErrorCode::invalid_rule, "unknown level '" + l + "'", rule.covariate);
      PathStep in{rule.covariate, std::nullopt, std::nullopt, rule.levels, false, false};
      std::sort(in.levels.begin(), in.levels.end());
      PathStep out = in;
      out.exclude = true;
      steps = {in, out};
    } else {
      if (!rule.levels.empty())
        throw Error(ErrorCode::invalid_rule, "level subsets apply to categorical covariates only",
                    rule.covariate);
      std::vector<double> cuts = rule.cut_points;
      if (cuts.empty()) {
        if (!col.is_binary())
          throw Error(ErrorCode::invalid_rule, "continuous rule needs cut points", rule.covariate);
        cuts = {0.5};
      }
      const auto values = gather(col, scope);
      const double lo = *std::min_element(values.begin(), values.end());
      const double hi = *std::max_element(values.begin(), values.end());
      for (std::size_t i = 0; i < cuts.size(); ++i) {
        if (!std::isfinite(cuts[i]) || !(cuts[i] > lo && cuts[i] < hi))
          throw Error(ErrorCode::invalid_rule,
                      "cut point " + format_number(cuts[i]) + " outside the observed range (" +
                          format_number(lo) + ", " + format_number(hi) + ")",
                      rule.covariate);
        if (i && !(cuts[i] > cuts[i - 1]))
          throw Error(ErrorCode::invalid_rule, "cut points must be strictly increasing",
                      rule.covariate);
      }
      for (std::size_t i = 0; i <= cuts.size(); ++i) {
        PathStep s;
        s.covariate = rule.covariate;
        s.binary = col.is_binary();
        if (i > 0) s.lower = cuts[i - 1];
        if (i < cuts.size()) s.upper = cuts[i];
        steps.push_back(s);
      }
    }
    std::vector<std::pair<PathStep, RowMask>> rule_cells;
    for (auto& s : steps) {
      RowMask m(ds.n_rows());
      for (std::size_t r : scope.indices())
        if (step_selects(s, col, r)) m.set(r);
      rule_cells.emplace_back(std::move(s), std::move(m));
    }
    cells.push_back(std::move(rule_cells));
  }

  Partition p;
  p.source = PartitionSource::manual;
  p.dataset_id = ds.id();
  p.scope = scope;
  p.rules = rules;

  std::vector<std::size_t> digit(cells.size(), 0);
  int next_id = 1;
  bool done = false;
  while (!done) {
    RowMask mask = scope;
    std::vector<PathStep> path;
    for (std::size_t k = 0; k < cells.size(); ++k) {
      mask = mask & cells[k][digit[k]].second;
      path.push_back(cells[k][digit[k]].first);
    }
    if (mask.empty()) {
      p.notices.push_back("empty cell dropped: " + describe(path));
    } else {
      p.subgroups.push_back({next_id++, describe(path), std::move(mask), std::move(path)});
    }
    // odometer over rule cells, last rule fastest
    std::size_t k = cells.size();
    while (true) {
      if (k == 0) {
        done = true;
        break;
      }
      --k;
      if (++digit[k] < cells[k].size()) break;
      digit[k] = 0;
    }
  }
  if (p.subgroups.empty()) throw Error(ErrorCode::partition_error, "every cell is empty");
  return p;
}

std::optional<SplitCandidate> best_root_split(const Dataset& ds, const CausalConfig& cfg,
                                              const TreeConfig& tcfg,
                                              std::vector<std::string>* feature_names) {
  const auto names = resolve_features(cfg, tcfg);
  const RowMask scope = tree_scope(ds, cfg, names);
  const auto features = build_features(ds, cfg, names, scope);
  std::vector<FeatureView> views;
  for (const auto& f : features) views.push_back({f.values});
  if (feature_names) {
    feature_names->clear();
    for (const auto& f : features) feature_names->push_back(f.name);
  }
  const Column& x = ds.column(cfg.cause);
  const auto rows = scope.indices();
  return kernels::serial::best_split(views, x.values, rows,
                                     x.is_binary() ? SplitCriterion::gini : SplitCriterion::variance,
                                     tcfg.min_leaf_size);
}

Partition propensity_tree(const Dataset& ds, const CausalConfig& cfg, const TreeConfig& tcfg,
                          std::uint64_t seed) {
  validate_config(ds, cfg);
  if (tcfg.target_leaves < 2) throw Error(ErrorCode::invalid_argument, "target_leaves must be >= 2");
  if (tcfg.min_leaf_size < 2) throw Error(ErrorCode::invalid_argument, "min_leaf_size must be >= 2");
  const auto names = resolve_features(cfg, tcfg);
  if (names.empty()) throw Error(ErrorCode::invalid_argument, "no features to split on");
  for (const auto& n : names) ds.column(n);

  const RowMask scope = tree_scope(ds, cfg, names);
  if (tcfg.target_leaves * tcfg.min_leaf_size > scope.count())
    throw Error(ErrorCode::invalid_argument,
                "target_leaves * min_leaf_size exceeds the " + std::to_string(scope.count()) +
                    " usable rows");

  const auto features = build_features(ds, cfg, names, scope);
  std::vector<FeatureView> views;
  for (const auto& f : features) views.push_back({f.values});
  const Column& x = ds.column(cfg.cause);
  const std::span<const double> target = x.values;
  const auto criterion = x.is_binary() ? SplitCriterion::gini : SplitCriterion::variance;

  struct GrowNode {
    std::vector<std::size_t> rows;
    std::vector<PathStep> path;
    std::optional<SplitCandidate> best;
    int left = -1;
    int right = -1;
  };
  std::vector<GrowNode> nodes;
  auto add_node = [&](std::vector<std::size_t> rows, std::vector<PathStep> path) {
    GrowNode node{std::move(rows), std::move(path), std::nullopt, -1, -1};
    node.best = kernels::parallel::best_split(views, target, node.rows, criterion, tcfg.min_leaf_size);
    nodes.push_back(std::move(node));
  };
  add_node(scope.indices(), {});
  if (!nodes.front().best)
    throw Error(ErrorCode::single_leaf, "no admissible split of the root: the cause does not vary "
                                        "with any feature under the leaf-size limit");

  Partition p;
  std::vector<std::size_t> leaves{0};
  while (leaves.size() < tcfg.target_leaves) {
    // frontier order = creation order, so equal candidates favour older leaves
    std::optional<std::size_t> pick;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      const auto& cand = nodes[leaves[i]].best;
      if (!cand) continue;
      if (!pick) {
        pick = i;
        continue;
      }
      const auto& cur = *nodes[leaves[*pick]].best;
      if (cand->two_arm != cur.two_arm ? cand->two_arm
                                       : cand->gain > cur.gain + 1e-9 * std::max(1.0, std::abs(cur.gain)))
        pick = i;
    }
    if (!pick) {
      p.notices.push_back("stopped at " + std::to_string(leaves.size()) +
                          " leaves: no admissible split remains");
      break;
    }
    const std::size_t idx = leaves[*pick];
    const SplitCandidate split = *nodes[idx].best;
    const auto& f = features[split.feature];
    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : nodes[idx].rows)
      (f.values[r] < split.threshold ? left_rows : right_rows).push_back(r);
    auto [lstep, rstep] = split_steps(f, split.threshold);
    auto lpath = nodes[idx].path;
    auto rpath = nodes[idx].path;
    lpath.push_back(lstep);
    rpath.push_back(rstep);
    add_node(std::move(left_rows), std::move(lpath));
    nodes[idx].left = static_cast<int>(nodes.size() - 1);
    add_node(std::move(right_rows), std::move(rpath));
    nodes[idx].right = static_cast<int>(nodes.size() - 1);
    p.splits.push_back({f.name, split.threshold, split.gain, split.two_arm, split.n_left, split.n_right});
    leaves.erase(leaves.begin() + static_cast<std::ptrdiff_t>(*pick));
    leaves.push_back(static_cast<std::size_t>(nodes[idx].left));
    leaves.push_back(static_cast<std::size_t>(nodes[idx].right));
  }

  int next_id = 1;
  auto build = [&](auto&& self, std::size_t i) -> TreeNode {
    const GrowNode& g = nodes[i];
    TreeNode t;
    t.n = g.rows.size();
    t.target_mean = share(target, g.rows);
    if (g.left < 0) {
      t.subgroup_id = next_id++;
      auto path = merge_path(g.path);
      p.subgroups.push_back(
          {t.subgroup_id, describe(path), RowMask::from_indices(ds.n_rows(), g.rows), std::move(path)});
      return t;
    }
    const auto& split = *g.best;
    t.feature = features[split.feature].name;
    t.threshold = split.threshold;
    t.gain = split.gain;
    t.children.push_back(self(self, static_cast<std::size_t>(g.left)));
    t.children.push_back(self(self, static_cast<std::size_t>(g.right)));
    return t;
  };
  p.tree = build(build, 0);
  p.source = PartitionSource::automatic;
  p.dataset_id = ds.id();
  p.scope = scope;
  p.tree_config = tcfg;
  p.tree_config->features = names;
  p.seed = seed;
  return p;
}

std::string_view estimator_name(Estimator e) noexcept {
  switch (e) {
    case Estimator::mean_difference: return "mean_difference";
    case Estimator::linear_slope: return "linear_slope";
    case Estimator::logistic_slope: return "logistic_slope";
  }
  return "mean_difference";
}

EffectEstimate leaf_effect(const Dataset& ds, const CausalConfig& cfg, const RowMask& mask,
                           std::size_t replicates, std::uint64_t seed) {
  const Column& x = ds.column(cfg.cause);
  const Column& y = ds.column(cfg.outcome);
  const RowMask rows_mask = mask & analysis_scope(ds, cfg);
  const auto rows = rows_mask.indices();
  if (rows.empty())
    throw Error(ErrorCode::insufficient_sample, "no complete cause/outcome rows in scope");

  EffectEstimate est;
  est.n = rows.size();
  const BootstrapOptions boot{replicates, 0.95, seed};

  if (x.is_binary()) {
    est.estimator = Estimator::mean_difference;
    for (std::size_t r : rows) (x.values[r] == 1.0 ? est.n_treated : est.n_untreated)++;
    est.positivity_ok = est.n_treated >= 1 && est.n_untreated >= 1;
    if (!est.positivity_ok) {
      est.undefined_reason = "overlap violated";
      return est;
    }
    const std::span<const double> xv = x.values;
    const std::span<const double> yv = y.values;
    auto mean_difference = [xv, yv](std::span<const std::size_t> sample) -> std::optional<double> {
      double s1 = 0, s0 = 0, n1 = 0, n0 = 0;
      for (std::size_t r : sample) {
        if (xv[r] == 1.0) {
          s1 += yv[r];
          n1 += 1;
        } else {
          s0 += yv[r];
          n0 += 1;
        }
      }
      if (n1 == 0 || n0 == 0) return std::nullopt;
      return s1 / n1 - s0 / n0;
    };
    est.effect = *mean_difference(rows);
    const auto result = bootstrap_ci(mean_difference, rows, boot);
    est.ci = result.ci;
    est.bootstrap_se = result.standard_error();
    if (*est.bootstrap_se > 0)
      est.p_value = two_sided_normal_p(*est.effect / *est.bootstrap_se);
    else
      est.p_value = *est.effect == 0.0 ? 1.0 : 0.0;

    if (y.is_binary()) {
      try {
        std::vector<Predictor> pred{{cfg.cause, gather(x, rows_mask)}};
        const auto fit = fit_logistic(pred, gather(y, rows_mask));
        est.log_odds_ratio = fit.slope();
        if (fit.warning) est.warnings.push_back(*fit.warning);
      } catch (const Error& e) {
        est.warnings.push_back(std::string("log odds ratio unavailable: ") + e.what());
      }
    }
    return est;
  }

  const bool logistic = y.is_binary();
  est.estimator = logistic ? Estimator::logistic_slope : Estimator::linear_slope;
  const auto xs = gather(x, rows_mask);
  if (sample_variance(xs) <= 0.0) {
    est.positivity_ok = false;
    est.undefined_reason = "no variation in cause";
    return est;
  }
  std::vector<Predictor> pred{{cfg.cause, xs}};
  const auto fit = logistic ? fit_logistic(pred, gather(y, rows_mask)) : fit_ols(pred, gather(y, rows_mask));
  est.effect = fit.slope();
  est.p_value = fit.p_values.at(1);
  if (fit.warning) est.warnings.push_back(*fit.warning);

  const std::span<const double> xv = x.values;
  const std::span<const double> yv = y.values;
  const std::string cause = cfg.cause;
  auto slope = [xv, yv, logistic, cause](std::span<const std::size_t> sample) -> std::optional<double> {
    std::vector<Predictor> p{{cause, {}}};
    std::vector<double> ys;
    p[0].values.reserve(sample.size());
    ys.reserve(sample.size());
    for (std::size_t r : sample) {
      p[0].values.push_back(xv[r]);
      ys.push_back(yv[r]);
    }
    try {
      const auto f = logistic ? fit_logistic(p, ys) : fit_ols(p, ys);
      if (logistic && f.warning) return std::nullopt;
      return f.slope();
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  const auto result = bootstrap_ci(slope, rows, boot);
  est.ci = result.ci;
  est.bootstrap_se = result.standard_error();
  return est;
}

}  // namespace spurlens
