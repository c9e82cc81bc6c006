#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "spurlens/error.hpp"
#include "spurlens/kernels.hpp"
#include "spurlens/stats.hpp"
#include "support.hpp"

using namespace spurlens;

namespace {

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> r(n);
  std::iota(r.begin(), r.end(), std::size_t{0});
  return r;
}

Statistic mean_of(const std::vector<double>& x) {
  return [&x](std::span<const std::size_t> idx) -> std::optional<double> {
    double s = 0.0;
    for (auto i : idx) s += x[i];
    return s / static_cast<double>(idx.size());
  };
}

// Exhaustive split oracle: every feature, every midpoint threshold, the
// n-scaled Gini or SSE decrease computed from scratch.
struct OracleSplit {
  std::size_t feature = 0;
  double threshold = 0.0;
  double gain = -1.0;
  bool two_arm = false;
  bool found = false;
};

double impurity(const std::vector<double>& t, SplitCriterion c) {
  if (t.empty()) return 0.0;
  const double n = static_cast<double>(t.size());
  const double m = testing::direct_mean(t);
  if (c == SplitCriterion::gini) return 2.0 * n * m * (1.0 - m);
  double s = 0.0;
  for (double v : t) s += (v - m) * (v - m);
  return s;
}

OracleSplit oracle_split(const std::vector<std::vector<double>>& f, const std::vector<double>& target,
                         SplitCriterion c, std::size_t min_leaf) {
  OracleSplit best;
  const double parent = impurity(target, c);
  for (std::size_t j = 0; j < f.size(); ++j) {
    std::vector<double> u = f[j];
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    for (std::size_t k = 0; k + 1 < u.size(); ++k) {
      const double thr = 0.5 * (u[k] + u[k + 1]);
      std::vector<double> l, r;
      for (std::size_t i = 0; i < target.size(); ++i) (f[j][i] < thr ? l : r).push_back(target[i]);
      if (l.size() < min_leaf || r.size() < min_leaf) continue;
      const double gain = parent - impurity(l, c) - impurity(r, c);
      auto mixed = [](const std::vector<double>& v) {
        return std::find(v.begin(), v.end(), 0.0) != v.end() && std::find(v.begin(), v.end(), 1.0) != v.end();
      };
      const bool two_arm = c == SplitCriterion::variance || (mixed(l) && mixed(r));
      const bool better = !best.found || (two_arm != best.two_arm ? two_arm : gain > best.gain + 1e-9 * std::max(1.0, gain));
      if (better) best = {j, thr, gain, two_arm, true};
    }
  }
  return best;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("bootstrap of constant data is degenerate at the constant") {
  const std::vector<double> x{5, 5, 5};
  const auto r = bootstrap_ci(mean_of(x), all_rows(3), {200, 0.95, 4});
  CHECK(r.ci.low == 5.0);
  CHECK(r.ci.high == 5.0);
}

TEST_CASE("bootstrap records B statistics and percentile endpoints are order statistics") {
  std::mt19937_64 rng(2);
  const auto x = testing::normal_draws(50, rng);
  const auto r = bootstrap_ci(mean_of(x), all_rows(x.size()), {300, 0.9, 11});
  REQUIRE(r.statistics.size() == 300);
  CHECK(r.ci.replicates == 300);
  std::vector<double> sorted = r.statistics;
  std::sort(sorted.begin(), sorted.end());
  // each endpoint interpolates the two order statistics that bracket it
  for (auto [p, end] : {std::pair{0.05, r.ci.low}, std::pair{0.95, r.ci.high}}) {
    const double h = (sorted.size() - 1) * p;
    const auto k = static_cast<std::size_t>(std::floor(h));
    CHECK(sorted[k] <= end);
    CHECK(end <= sorted[k + 1]);
    CHECK(end == doctest::Approx(sorted[k] + (h - k) * (sorted[k + 1] - sorted[k])).epsilon(1e-14));
  }
  CHECK(r.ci.low <= r.ci.high);
}

TEST_CASE("bootstrap is deterministic and serial equals parallel") {
  std::mt19937_64 rng(4);
  const auto x = testing::normal_draws(80, rng);
  const BootstrapOptions opts{500, 0.95, 99};
  const auto a = kernels::serial::bootstrap(mean_of(x), all_rows(x.size()), opts);
  const auto b = kernels::parallel::bootstrap(mean_of(x), all_rows(x.size()), opts);
  const auto c = kernels::parallel::bootstrap(mean_of(x), all_rows(x.size()), opts);
  CHECK(a.statistics == b.statistics);
  CHECK(b.statistics == c.statistics);
  CHECK(a.ci.low == b.ci.low);
  CHECK(a.ci.high == b.ci.high);
  const auto d = kernels::parallel::bootstrap(mean_of(x), all_rows(x.size()), {500, 0.95, 100});
  CHECK(d.statistics != a.statistics);
}

TEST_CASE("bootstrap fails when resamples are mostly undefined") {
  const Statistic never = [](std::span<const std::size_t>) -> std::optional<double> { return std::nullopt; };
  try {
    bootstrap_ci(never, all_rows(10), {100, 0.95, 1});
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::bootstrap_failure);
  }
}

TEST_CASE("bootstrap retries undefined resamples within the attempt cap") {
  // statistic undefined whenever row 0 is absent
  const Statistic needs_zero = [](std::span<const std::size_t> idx) -> std::optional<double> {
    if (std::find(idx.begin(), idx.end(), std::size_t{0}) == idx.end()) return std::nullopt;
    return 1.0;
  };
  const auto r = bootstrap_ci(needs_zero, all_rows(4), {200, 0.95, 3});
  CHECK(r.statistics.size() == 200);
  CHECK(r.attempts >= 200);
  CHECK(r.attempts <= 200 * kMaxAttemptsPerReplicate);
  CHECK(r.attempts == 200 + r.undefined);
}

TEST_CASE("best_split matches the exhaustive oracle, serial and parallel") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> small(0, 4);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 60;
    std::vector<std::vector<double>> f(3, std::vector<double>(n));
    std::vector<double> tb(n), tc(n);
    for (std::size_t i = 0; i < n; ++i) {
      f[0][i] = small(rng);
      f[1][i] = std::normal_distribution<double>()(rng);
      f[2][i] = small(rng) % 2;
      tb[i] = (f[0][i] + small(rng)) > 4 ? 1.0 : 0.0;
      tc[i] = f[1][i] + std::normal_distribution<double>()(rng);
    }
    std::vector<FeatureView> views;
    for (const auto& c : f) views.push_back({c});
    for (auto crit : {SplitCriterion::gini, SplitCriterion::variance}) {
      const auto& t = crit == SplitCriterion::gini ? tb : tc;
      const auto oracle = oracle_split(f, t, crit, 5);
      const auto s = kernels::serial::best_split(views, t, all_rows(n), crit, 5);
      const auto p = kernels::parallel::best_split(views, t, all_rows(n), crit, 5);
      REQUIRE(s.has_value());
      REQUIRE(p.has_value());
      CHECK(s->feature == p->feature);
      CHECK(s->threshold == p->threshold);
      CHECK(s->gain == p->gain);
      CHECK(s->gain == doctest::Approx(oracle.gain).epsilon(1e-9));
      CHECK(s->feature == oracle.feature);
      CHECK(s->threshold == doctest::Approx(oracle.threshold));
    }
  }
}

TEST_CASE("best_split tie prefers the lower feature index") {
  const std::vector<double> a{0, 0, 1, 1}, b{0, 0, 1, 1}, t{0, 0, 1, 1};
  std::vector<FeatureView> views{{b}, {a}};
  const auto s = kernels::serial::best_split(views, t, all_rows(4), SplitCriterion::gini, 1);
  REQUIRE(s.has_value());
  CHECK(s->feature == 0);
  CHECK(s->threshold == 0.5);
}

TEST_CASE("best_split finds nothing on a pure node") {
  const std::vector<double> a{0, 1, 2, 3}, t{1, 1, 1, 1};
  std::vector<FeatureView> views{{a}};
  CHECK_FALSE(kernels::serial::best_split(views, t, all_rows(4), SplitCriterion::gini, 1).has_value());
}

TEST_CASE("aggregated_auc matches pairwise oracle, serial and parallel") {
  const std::vector<std::vector<double>> f{{1, 2, 3, 4}, {7, 7, 7, 7}};
  const std::vector<int> g{0, 0, 1, 1};
  const auto s = kernels::serial::aggregated_auc(f, g, 2);
  CHECK(s[0] == 1.0);
  CHECK(s[1] == 0.5);

  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> grp(0, 3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<double>> feats{testing::normal_draws(40, rng), testing::normal_draws(40, rng)};
    std::vector<int> groups(40);
    for (auto& x : groups) x = grp(rng);
    const auto a = kernels::serial::aggregated_auc(feats, groups, 4);
    const auto b = kernels::parallel::aggregated_auc(feats, groups, 4);
    CHECK(a == b);
    for (std::size_t j = 0; j < feats.size(); ++j) {
      double sum = 0.0;
      int used = 0;
      for (int k = 0; k < 4; ++k) {
        std::vector<double> labels(40);
        std::size_t pos = 0;
        for (std::size_t i = 0; i < 40; ++i) pos += (labels[i] = groups[i] == k);
        if (pos == 0 || pos == 40) continue;
        double wins = 0, pairs = 0;
        for (std::size_t i = 0; i < 40; ++i)
          for (std::size_t m = 0; m < 40; ++m)
            if (labels[i] == 1 && labels[m] == 0) {
              pairs += 1;
              wins += feats[j][i] > feats[j][m] ? 1 : feats[j][i] == feats[j][m] ? 0.5 : 0;
            }
        sum += std::max(wins / pairs, 1.0 - wins / pairs);
        ++used;
      }
      CHECK(a[j] == doctest::Approx(sum / used).epsilon(1e-12));
      CHECK(a[j] >= 0.5);
      CHECK(a[j] <= 1.0);
    }
  }
}

TEST_CASE("derive_seed separates indices") {
  CHECK(kernels::derive_seed(1, 0) != kernels::derive_seed(1, 1));
  CHECK(kernels::derive_seed(1, 5) == kernels::derive_seed(1, 5));
}

}
