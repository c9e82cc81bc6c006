#pragma once

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "spurlens/dataset.hpp"

namespace testing {

inline std::string data_path(const std::string& name) { return std::string(TEST_DATA_DIR) + "/" + name; }

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline spurlens::Column numeric(std::string name, std::vector<double> values, bool binary = false) {
  spurlens::Column c;
  c.name = std::move(name);
  c.type.kind = binary ? spurlens::ColumnKind::binary : spurlens::ColumnKind::continuous;
  c.values = std::move(values);
  return c;
}

inline spurlens::Column binary(std::string name, std::vector<double> values) {
  return numeric(std::move(name), std::move(values), true);
}

inline spurlens::Column categorical(std::string name, std::vector<std::string> levels,
                                    std::vector<double> codes) {
  spurlens::Column c;
  c.name = std::move(name);
  c.type.kind = spurlens::ColumnKind::categorical;
  c.type.levels = std::move(levels);
  c.values = std::move(codes);
  return c;
}

inline spurlens::Dataset make(std::vector<spurlens::Column> cols, std::string id = "ds-test") {
  return spurlens::Dataset(std::move(cols), std::move(id));
}

/// Two strata whose treated-minus-untreated recovery rates are +0.10 each
/// while the pooled difference is -0.38.
inline spurlens::Dataset reversal_dataset() {
  std::vector<double> x, y, z;
  auto add = [&](double stratum, double treat, int n, int success) {
    for (int i = 0; i < n; ++i) {
      x.push_back(treat);
      y.push_back(i < success ? 1.0 : 0.0);
      z.push_back(stratum);
    }
  };
  add(0, 1, 10, 9);
  add(0, 0, 90, 72);
  add(1, 1, 90, 27);
  add(1, 0, 10, 2);
  return make({binary("treated", x), binary("recovered", y), binary("stratum", z)}, "ds-reversal");
}

inline std::vector<double> normal_draws(std::size_t n, std::mt19937_64& rng, double mu = 0.0,
                                        double sd = 1.0) {
  std::normal_distribution<double> d(mu, sd);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

inline double direct_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double direct_var(const std::vector<double>& v) {
  const double m = direct_mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

/// Standardized mean difference by direct arithmetic.
inline double smd_oracle(const std::vector<double>& t, const std::vector<double>& u) {
  return (direct_mean(t) - direct_mean(u)) / std::sqrt(0.5 * (direct_var(t) + direct_var(u)));
}

/// Planted propensity design: P(X=1) = 0.9 when Z1 = 1 and 0.1 otherwise;
/// Z2 and Z3 are noise.
inline spurlens::Dataset planted_tree(std::uint64_t seed, std::size_t n = 2000) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5), hi(0.9), lo(0.1);
  std::normal_distribution<double> noise;
  std::vector<double> z1(n), z2(n), z3(n), x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    z1[i] = coin(rng);
    z2[i] = noise(rng);
    z3[i] = coin(rng);
    x[i] = (z1[i] == 1.0 ? hi(rng) : lo(rng)) ? 1.0 : 0.0;
    y[i] = x[i] + 0.5 * z1[i] + noise(rng);
  }
  return make({binary("X", x), numeric("Y", y), binary("Z1", z1), numeric("Z2", z2), binary("Z3", z3)},
              "ds-planted-" + std::to_string(seed));
}

}  // namespace testing
