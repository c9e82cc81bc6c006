#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "spurlens/confounding.hpp"
#include "spurlens/error.hpp"
#include "support.hpp"

using namespace spurlens;
using testing::binary;
using testing::make;
using testing::numeric;

namespace {

// Newton-Raphson logistic fit on a dense design with an intercept column,
// solved by Gaussian elimination with partial pivoting.
std::vector<double> newton_logistic(const std::vector<std::vector<double>>& cols, const std::vector<double>& y) {
  const std::size_t p = cols.size() + 1, n = y.size();
  std::vector<double> beta(p, 0.0);
  auto row = [&](std::size_t i, std::size_t j) { return j == 0 ? 1.0 : cols[j - 1][i]; };
  for (int iter = 0; iter < 100; ++iter) {
    std::vector<std::vector<double>> h(p, std::vector<double>(p + 1, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      double eta = 0.0;
      for (std::size_t j = 0; j < p; ++j) eta += beta[j] * row(i, j);
      const double mu = 1.0 / (1.0 + std::exp(-eta));
      const double w = mu * (1.0 - mu);
      for (std::size_t a = 0; a < p; ++a) {
        h[a][p] += row(i, a) * (y[i] - mu);
        for (std::size_t b = 0; b < p; ++b) h[a][b] += w * row(i, a) * row(i, b);
      }
    }
    for (std::size_t c = 0; c < p; ++c) {
      std::size_t piv = c;
      for (std::size_t r = c + 1; r < p; ++r)
        if (std::abs(h[r][c]) > std::abs(h[piv][c])) piv = r;
      std::swap(h[c], h[piv]);
      for (std::size_t r = 0; r < p; ++r) {
        if (r == c) continue;
        const double f = h[r][c] / h[c][c];
        for (std::size_t k = c; k <= p; ++k) h[r][k] -= f * h[c][k];
      }
    }
    double step = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double d = h[j][p] / h[j][j];
      beta[j] += d;
      step = std::max(step, std::abs(d));
    }
    if (step < 1e-12) break;
  }
  return beta;
}

CFScore find(const std::vector<CFScore>& v, const std::string& name) {
  for (const auto& s : v)
    if (s.covariate == name) return s;
  FAIL("missing covariate " << name);
  return {};
}

}  // namespace

TEST_SUITE("confounding") {

TEST_CASE("orthogonal covariate leaves a continuous outcome slope unchanged") {
  // z is centred and orthogonal to both the intercept and x in-sample
  const Dataset ds = make({numeric("x", {1, 2, 3, 4}), numeric("y", {2, 1, 5, 3}), numeric("z", {1, -1, -1, 1})});
  const auto cfg = make_config(ds, "x", "y");
  const auto s = cf_score(ds, cfg, "z");
  REQUIRE(s.score.has_value());
  CHECK(*s.score < 1e-8);
  CHECK(s.adjusted_beta1 == doctest::Approx(s.unadjusted_beta1).epsilon(1e-12));
  CHECK(s.model_kind == ModelKind::linear);
}

TEST_CASE("reversal strata drive a large odds-ratio change") {
  const Dataset ds = testing::reversal_dataset();
  const auto cfg = make_config(ds, "treated", "recovered");
  const auto s = cf_score(ds, cfg, "stratum");
  REQUIRE(s.score.has_value());

  const double b1 = std::log((36.0 / 64.0) / (74.0 / 26.0));
  const auto beta = newton_logistic({ds.column("treated").values, ds.column("stratum").values},
                                    ds.column("recovered").values);
  const double oracle = std::abs(std::exp(beta[1]) - std::exp(b1)) / std::exp(b1);
  CHECK(s.unadjusted_beta1 == doctest::Approx(b1).epsilon(1e-9));
  CHECK(s.adjusted_beta1 == doctest::Approx(beta[1]).epsilon(1e-8));
  CHECK(*s.score == doctest::Approx(oracle).epsilon(1e-8));
  CHECK(*s.score > 1.0);
}

TEST_CASE("zero unadjusted slope gives an undefined score") {
  const Dataset ds = make({numeric("x", {1, 2, 3, 4, 5}), numeric("y", {1, 2, 0, 2, 1}), numeric("z", {0, 1, 3, 1, 2})});
  const auto s = cf_score(ds, make_config(ds, "x", "y"), "z");
  CHECK(std::abs(s.unadjusted_beta1) < 1e-12);
  CHECK_FALSE(s.score.has_value());
}

TEST_CASE("covariate must be a candidate") {
  const Dataset ds = make({numeric("x", {1, 2, 3, 4}), numeric("y", {1, 3, 2, 4}), numeric("z", {0, 1, 0, 1})});
  const auto cfg = make_config(ds, "x", "y");
  CHECK_THROWS_AS(cf_score(ds, cfg, "x"), Error);
  CHECK_THROWS_AS(cf_score(ds, cfg, "y"), Error);
}

TEST_CASE("affine copy of the cause is a collinearity failure, never a score") {
  std::mt19937_64 rng(1);
  auto x = testing::normal_draws(30, rng);
  auto y = testing::normal_draws(30, rng);
  std::vector<double> z(x.size()), w = testing::normal_draws(30, rng);
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = 3.0 * x[i] - 2.0;
  const Dataset ds = make({numeric("x", x), numeric("y", y), numeric("z", z), numeric("w", w)});
  const auto cfg = make_config(ds, "x", "y");
  try {
    cf_score(ds, cfg, "z");
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::scoring_error);
    CHECK(e.detail() == "collinearity");
  }
  const auto ranking = rank_confounders(ds, cfg);
  REQUIRE(ranking.size() == 2);
  CHECK(ranking[0].covariate == "w");
  CHECK(ranking[1].covariate == "z");
  CHECK_FALSE(ranking[1].score.has_value());
  CHECK(ranking[1].failure_code == std::optional<std::string>("collinearity"));
}

TEST_CASE("ranking is a total order and invariant to affine rescaling") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 80;
    auto z1 = testing::normal_draws(n, rng), z2 = testing::normal_draws(n, rng), z3 = testing::normal_draws(n, rng);
    auto e = testing::normal_draws(n, rng);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = 0.8 * z1[i] + 0.3 * z2[i] + e[i];
      y[i] = x[i] + 1.5 * z1[i] - 0.4 * z3[i] + testing::normal_draws(1, rng)[0];
    }
    const Dataset ds = make({numeric("x", x), numeric("y", y), numeric("z1", z1), numeric("z2", z2), numeric("z3", z3)});
    const auto ranking = rank_confounders(ds, make_config(ds, "x", "y"));
    REQUIRE(ranking.size() == 3);
    for (std::size_t k = 1; k < ranking.size(); ++k) CHECK(*ranking[k - 1].score >= *ranking[k].score);

    std::vector<double> r1(n), r2(n), r3(n);
    for (std::size_t i = 0; i < n; ++i) {
      r1[i] = 10.0 * z1[i] + 4.0;
      r2[i] = -0.5 * z2[i];
      r3[i] = 2.0 * z3[i] - 7.0;
    }
    const Dataset scaled = make({numeric("x", x), numeric("y", y), numeric("z1", r1), numeric("z2", r2), numeric("z3", r3)});
    const auto again = rank_confounders(scaled, make_config(scaled, "x", "y"));
    for (std::size_t k = 0; k < ranking.size(); ++k) {
      CHECK(again[k].covariate == ranking[k].covariate);
      CHECK(*again[k].score == doctest::Approx(*ranking[k].score).epsilon(1e-9));
    }
  }
}

TEST_CASE("single candidate ranks as a singleton") {
  const Dataset ds = make({numeric("x", {1, 2, 3, 4, 5}), numeric("y", {1, 3, 2, 5, 4}), numeric("z", {1, 0, 1, 1, 0})});
  const auto r = rank_confounders(ds, make_config(ds, "x", "y"));
  REQUIRE(r.size() == 1);
  CHECK(r[0].covariate == "z");
}

TEST_CASE("Lalonde ranking with a binarized outcome is total") {
  const Dataset raw = load_table_file(testing::data_path("lalonde_psid.csv"));
  std::vector<Column> cols = raw.columns();
  Column pos = testing::binary("earned", {});
  for (double v : raw.column("re78").values) pos.values.push_back(v > 0 ? 1.0 : 0.0);
  cols.push_back(pos);
  const Dataset ds(cols, raw.id());
  auto cfg = make_config(ds, "treat", "earned");
  cfg.covariates.erase(std::remove(cfg.covariates.begin(), cfg.covariates.end(), "re78"), cfg.covariates.end());
  const auto r = rank_confounders(ds, cfg);
  CHECK(r.size() == cfg.covariates.size());
  std::vector<std::string> names;
  for (const auto& s : r) {
    names.push_back(s.covariate);
    CHECK_FALSE(s.failure.has_value());
    CHECK(s.model_kind == ModelKind::logistic);
  }
  std::sort(names.begin(), names.end());
  auto expected = cfg.covariates;
  std::sort(expected.begin(), expected.end());
  CHECK(names == expected);
}

TEST_CASE("split histograms") {
  SUBCASE("binary cause with identical arms") {
    const Dataset ds = make({binary("x", {1, 1, 0, 0}), numeric("y", {0, 0, 0, 0}), numeric("z", {1, 2, 1, 2})});
    const auto h = treatment_split_histograms(ds, make_config(ds, "x", "y"), "z", 2);
    REQUIRE(h.treated.size() == h.untreated.size());
    for (std::size_t b = 0; b < h.treated.size(); ++b) {
      CHECK(h.treated[b].count == h.untreated[b].count);
      CHECK(h.treated[b].low == h.untreated[b].low);
    }
    CHECK_FALSE(h.split_rule.has_value());
  }
  SUBCASE("continuous cause splits at the median") {
    const Dataset ds = make({numeric("X", {1, 2, 3, 4}), numeric("y", {0, 1, 0, 1}), numeric("z", {5, 6, 7, 8})});
    const auto h = treatment_split_histograms(ds, make_config(ds, "X", "y"), "z", 4);
    CHECK(h.split_rule == std::optional<std::string>("X > 2.5"));
    CHECK(h.n_treated == 2);
    CHECK(h.n_untreated == 2);
    std::size_t upper = 0;
    for (const auto& b : h.treated)
      if (b.low >= 6.5) upper += b.count;
    CHECK(upper == 2);
  }
  SUBCASE("all rows treated") {
    const Dataset ds = make({binary("x", {1, 1, 1}), numeric("y", {0, 1, 2}), numeric("z", {5, 6, 7})});
    try {
      treatment_split_histograms(ds, make_config(ds, "x", "y"), "z");
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::degenerate_split);
    }
  }
}

}
