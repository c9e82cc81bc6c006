// Batch front-end: runs the whole pipeline on one table and writes a JSON
// report. Exit codes: 0 ok, 2 invalid input, 3 degenerate analysis.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "spurlens/kernels.hpp"
#include "spurlens/pipeline.hpp"

using namespace spurlens;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitDegenerate = 3;

int exit_code(const Error& e) {
  return e.kind() == ErrorKind::degenerate ? kExitDegenerate : kExitValidation;
}

std::string fmt(const Json& v, int precision = 4) {
  if (!v.is_number()) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v.get<double>());
  return buf;
}

void print_summary(const Json& report, std::ostream& out) {
  const Json& cfg = report["config"];
  out << "cause: " << cfg["cause"].get<std::string>() << "  outcome: " << cfg["outcome"].get<std::string>()
      << "  seed: " << report["seed"] << "\n\n";

  out << "confounding scores\n";
  char line[256];
  for (const auto& e : report["confounders"]["entries"]) {
    std::snprintf(line, sizeof line, "  %-24s %10s  %s\n", e["covariate"].get<std::string>().c_str(),
                  fmt(e["cf_score"]).c_str(),
                  e["failure"].is_null() ? "" : e["failure"]["error_code"].get<std::string>().c_str());
    out << line;
  }

  if (!report["partition"].is_null()) {
    out << "\nsubgroups\n";
    for (const auto& sg : report["partition"]["subgroups"]) {
      std::snprintf(line, sizeof line, "  %3d  n=%-6zu %s\n", sg["id"].get<int>(), sg["size"].get<std::size_t>(),
                    sg["label"].get<std::string>().c_str());
      out << line;
    }
  }

  out << "\ndiagnosis\n";
  for (const auto& d : report["diagnoses"]) {
    const std::string scope = d["scope"].is_string() ? "population"
                                                      : "subgroup " + d["scope"]["subgroup"].dump();
    const Json& stats = d["statistics"];
    std::string ci = "n/a";
    if (stats.contains("ci") && stats["ci"].is_object())
      ci = "[" + fmt(stats["ci"]["low"]) + ", " + fmt(stats["ci"]["high"]) + "]";
    std::snprintf(line, sizeof line, "  %-14s effect %10s  ci %-22s", scope.c_str(),
                  fmt(stats.value("effect", Json())).c_str(), ci.c_str());
    out << line;
    const Json& w = d["simpson_warning"];
    if (w.value("flag", false)) out << "  " << kSimpsonWarningText;
    if (!d["residual_confounders"].empty()) {
      out << "  residual:";
      for (const auto& r : d["residual_confounders"]) out << ' ' << r.get<std::string>();
    }
    const Json& imb = d["imbalance"]["subgroup"];
    if (imb.value("warning", false)) out << "  imbalance " << fmt(imb["mean_abs_score"], 3);
    out << '\n';
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spurious-association diagnosis for observational data"};
  std::string data, cause, outcome, confounders, partition_file, features, out_path;
  std::size_t auto_k = 0, min_size = 10, bins = kDefaultCauseBins, boot = kDefaultReplicates;
  std::uint64_t seed = kDefaultSeed;
  bool quiet = false;

  app.add_option("--data", data, "delimited table with a header row")->required();
  app.add_option("--cause", cause, "cause (treatment) column")->required();
  app.add_option("--outcome", outcome, "outcome column")->required();
  app.add_option("--confounders", confounders, "comma-separated confounder selection");
  auto* partition_opt = app.add_option("--partition", partition_file, "manual rules JSON file");
  auto* auto_opt = app.add_option("--auto-k", auto_k, "grow a propensity tree with this many leaves");
  app.add_option("--min-size", min_size, "minimum leaf size for --auto-k");
  app.add_option("--features", features, "comma-separated tree features (default: all covariates)");
  app.add_option("--bins", bins, "storyboard cause bins");
  app.add_option("--boot", boot, "bootstrap replicates")->check(CLI::Range(kMinReplicates, std::size_t{1} << 24));
  app.add_option("--seed", seed, "random seed");
  app.add_option("--out", out_path, "report path (default: standard output)");
  app.add_flag("--quiet", quiet, "suppress the summary table");
  partition_opt->excludes(auto_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  try {
    std::ifstream probe(data);
    if (!probe) throw Error(ErrorCode::invalid_argument, "cannot read data file", data);
    const Dataset ds = load_table_file(data);
    const CausalConfig cfg = make_config(ds, cause, outcome, {}, split_list(confounders));

    AnalysisOptions opts;
    opts.cause_bins = bins;
    opts.replicates = boot;
    opts.seed = seed;

    std::optional<Partition> partition;
    if (!partition_file.empty()) {
      std::ifstream in(partition_file);
      if (!in) throw Error(ErrorCode::invalid_argument, "cannot read rules file", partition_file);
      Json rules;
      try {
        rules = Json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::parse_error, "rules file is not valid JSON", e.what());
      }
      partition = run_partition(ds, cfg, Json{{"manual", rules}}, seed);
    } else if (*auto_opt) {
      Json request{{"target_leaves", auto_k}, {"min_leaf_size", min_size}};
      if (!features.empty()) request["features"] = split_list(features);
      partition = run_partition(ds, cfg, Json{{"auto", request}}, seed);
    }

    const Json report = full_report(ds, cfg, partition ? &*partition : nullptr, opts);
    const std::string text = report.dump(2) + "\n";
    if (out_path.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(out_path, std::ios::binary);
      if (!out) throw Error(ErrorCode::invalid_argument, "cannot write report", out_path);
      out << text;
      if (!quiet) print_summary(report, std::cout);
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << error_json(e).dump() << '\n';
    return exit_code(e);
  }
}
