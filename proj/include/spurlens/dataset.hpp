#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "spurlens/row_mask.hpp"

namespace spurlens {

enum class ColumnKind { binary, continuous, categorical };

std::string_view kind_name(ColumnKind kind) noexcept;

struct ColumnType {
  ColumnKind kind = ColumnKind::continuous;
  std::vector<std::string> levels;  // categorical only; sorted, unique

  bool operator==(const ColumnType&) const = default;
};

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) noexcept { return std::isnan(v); }

/// A typed column. Cells are doubles with NaN as the missing marker;
/// categorical cells hold the index of their level.
struct Column {
  std::string name;
  ColumnType type;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  bool missing(std::size_t row) const noexcept { return is_missing(values[row]); }
  bool is_categorical() const noexcept { return type.kind == ColumnKind::categorical; }
  bool is_binary() const noexcept { return type.kind == ColumnKind::binary; }
};

class Dataset {
 public:
  Dataset(std::vector<Column> columns, std::string id);

  const std::string& id() const noexcept { return id_; }
  std::size_t n_rows() const noexcept { return n_rows_; }
  std::size_t n_cols() const noexcept { return columns_.size(); }
  const std::vector<Column>& columns() const noexcept { return columns_; }

  bool has(std::string_view name) const;
  /// Throws unknown_column.
  const Column& column(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;

  RowMask all_rows() const { return RowMask(n_rows_, true); }

 private:
  std::vector<Column> columns_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t n_rows_ = 0;
  std::string id_;
};

struct LoadOptions {
  char delimiter = ',';
  bool header = true;
  std::size_t max_rows = 0;  // 0 = unlimited
};

/// Parses RFC-4180 delimited text. Empty cells and "NA" are missing.
Dataset load_table(std::string_view text, const LoadOptions& options = {});
Dataset load_table_file(const std::string& path, const LoadOptions& options = {});

/// Raw cells in, type out. Missing cells are ignored.
ColumnType infer_column_type(std::span<const std::string> cells);

/// J-1 indicator columns named "<col>=<level>" over the declared levels; the first is the
/// reference. Missing stays missing.
std::vector<Column> encode_categorical(const Column& col);

/// Indicator encoding restricted to levels that occur inside `scope`.
std::vector<Column> encode_categorical(const Column& col, const RowMask& scope);

RowMask listwise_complete(const Dataset& ds, std::span<const std::string> cols);
RowMask listwise_complete(const Dataset& ds, std::initializer_list<std::string_view> cols);

struct HistogramBin {
  std::string label;
  double low = 0.0;
  double high = 0.0;
  std::size_t count = 0;
};

struct ColumnSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::vector<HistogramBin> histogram;
};

inline constexpr std::size_t kDefaultHistogramBins = 10;

ColumnSummary summarize(const Column& col, const RowMask& mask,
                        std::size_t bins = kDefaultHistogramBins);

/// Histogram of the selected non-missing cells over a caller-supplied grid.
/// Continuous grids are `bins` equal-width bins over [lo, hi]; bins are
/// right-open except the last.
std::vector<HistogramBin> histogram(const Column& col, const RowMask& mask, double lo, double hi,
                                    std::size_t bins);

/// The analysis frame: cause X, outcome Y, candidate covariates and the
/// analyst's confounder selection.
struct CausalConfig {
  std::string cause;
  std::string outcome;
  std::vector<std::string> covariates;
  std::vector<std::string> confounders;

  /// Confounders if any are selected, otherwise all covariates.
  const std::vector<std::string>& active_confounders() const noexcept {
    return confounders.empty() ? covariates : confounders;
  }
};

/// Fills empty covariates with every other column, then checks invariants.
/// Throws invalid_config / unknown_column.
CausalConfig make_config(const Dataset& ds, std::string cause, std::string outcome,
                         std::vector<std::string> covariates = {},
                         std::vector<std::string> confounders = {});
void validate_config(const Dataset& ds, const CausalConfig& cfg);

/// Which rows an analysis describes: the whole analysis population or one
/// subgroup of a partition.
struct ScopeTag {
  std::optional<int> subgroup;

  bool is_population() const noexcept { return !subgroup.has_value(); }
  std::string label() const {
    return subgroup ? "subgroup:" + std::to_string(*subgroup) : "population";
  }
  bool operator==(const ScopeTag&) const = default;
};

/// Gathers the selected cells of a column, skipping missing ones.
std::vector<double> gather(const Column& col, const RowMask& mask);

/// Shortest round-trip decimal rendering used in labels and rules.
std::string format_number(double v);

}  // namespace spurlens
