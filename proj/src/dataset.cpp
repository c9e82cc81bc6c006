#include "spurlens/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>

#include "spurlens/error.hpp"

namespace spurlens {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool is_missing_cell(std::string_view cell) {
  cell = trim(cell);
  return cell.empty() || cell == "NA";
}

std::optional<double> parse_number(std::string_view cell) {
  cell = trim(cell);
  if (cell.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v))
    return std::nullopt;
  return v;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Splits RFC-4180 text into records. Quoted fields may contain the
// delimiter, doubled quotes and line breaks.
std::vector<std::vector<std::string>> split_records(std::string_view text, char delim) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;

  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
    const bool blank = record.size() == 1 && record.front().empty();
    if (!blank) records.push_back(std::move(record));
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == delim) {
      record.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (c == '\r') {
      if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_record();
    } else if (c == '\n') {
      end_record();
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (quoted) throw Error(ErrorCode::parse_error, "unterminated quoted field",
                          "record " + std::to_string(records.size() + 1));
  if (field_started || !record.empty()) end_record();
  return records;
}

Column build_column(std::string name, const std::vector<std::string>& cells) {
  Column col;
  col.name = std::move(name);
  try {
    col.type = infer_column_type(cells);
  } catch (const Error& e) {
    throw Error(e.code(), std::string(e.what()), "column '" + col.name + "'");
  }
  col.values.reserve(cells.size());
  if (col.type.kind == ColumnKind::categorical) {
    for (const auto& cell : cells) {
      if (is_missing_cell(cell)) {
        col.values.push_back(kMissing);
        continue;
      }
      const std::string key(trim(cell));
      auto it = std::lower_bound(col.type.levels.begin(), col.type.levels.end(), key);
      col.values.push_back(static_cast<double>(it - col.type.levels.begin()));
    }
  } else {
    for (const auto& cell : cells)
      col.values.push_back(is_missing_cell(cell) ? kMissing : *parse_number(cell));
  }
  return col;
}

}  // namespace

std::string_view kind_name(ColumnKind kind) noexcept {
  switch (kind) {
    case ColumnKind::binary: return "binary";
    case ColumnKind::continuous: return "continuous";
    case ColumnKind::categorical: return "categorical";
  }
  return "continuous";
}

Dataset::Dataset(std::vector<Column> columns, std::string id)
    : columns_(std::move(columns)), id_(std::move(id)) {
  n_rows_ = columns_.empty() ? 0 : columns_.front().size();
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].size() != n_rows_)
      throw Error(ErrorCode::schema_error, "column lengths differ", columns_[i].name);
    if (!index_.emplace(columns_[i].name, i).second)
      throw Error(ErrorCode::schema_error, "duplicate column name", columns_[i].name);
  }
}

bool Dataset::has(std::string_view name) const { return index_.contains(std::string(name)); }

std::size_t Dataset::index_of(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end())
    throw Error(ErrorCode::unknown_column, "unknown column '" + std::string(name) + "'",
                std::string(name));
  return it->second;
}

const Column& Dataset::column(std::string_view name) const { return columns_[index_of(name)]; }

ColumnType infer_column_type(std::span<const std::string> cells) {
  bool any = false;
  bool numeric = true;
  bool zero_one = true;
  for (const auto& cell : cells) {
    if (is_missing_cell(cell)) continue;
    any = true;
    auto v = parse_number(cell);
    if (!v) {
      numeric = false;
      break;
    }
    if (*v != 0.0 && *v != 1.0) zero_one = false;
  }
  if (!any) throw Error(ErrorCode::inference_error, "column has no non-missing values");

  ColumnType type;
  if (numeric) {
    type.kind = zero_one ? ColumnKind::binary : ColumnKind::continuous;
    return type;
  }
  type.kind = ColumnKind::categorical;
  std::set<std::string> levels;
  for (const auto& cell : cells)
    if (!is_missing_cell(cell)) levels.emplace(trim(cell));
  type.levels.assign(levels.begin(), levels.end());
  return type;
}

Dataset load_table(std::string_view text, const LoadOptions& options) {
  auto records = split_records(text, options.delimiter);
  if (records.empty()) throw Error(ErrorCode::empty_dataset, "no header row");

  std::vector<std::string> header;
  std::size_t first_data = 0;
  if (options.header) {
    for (auto& name : records.front()) header.emplace_back(trim(name));
    first_data = 1;
  } else {
    for (std::size_t c = 0; c < records.front().size(); ++c)
      header.push_back("V" + std::to_string(c + 1));
  }
  {
    std::set<std::string> seen;
    for (const auto& name : header) {
      if (name.empty()) throw Error(ErrorCode::schema_error, "empty column name in header");
      if (!seen.insert(name).second)
        throw Error(ErrorCode::schema_error, "duplicate header '" + name + "'", name);
    }
  }

  const std::size_t n_data = records.size() - first_data;
  if (n_data == 0) throw Error(ErrorCode::empty_dataset, "table has a header but no data rows");
  if (options.max_rows && n_data > options.max_rows)
    throw Error(ErrorCode::payload_too_large, "table exceeds the row cap",
                std::to_string(n_data) + " > " + std::to_string(options.max_rows));

  std::vector<std::vector<std::string>> cells(header.size());
  for (auto& c : cells) c.reserve(n_data);
  for (std::size_t r = first_data; r < records.size(); ++r) {
    auto& rec = records[r];
    if (rec.size() != header.size()) {
      const std::size_t row = r - first_data + 1;
      throw Error(ErrorCode::parse_error,
                  "row " + std::to_string(row) + " has " + std::to_string(rec.size()) +
                      " fields, expected " + std::to_string(header.size()),
                  "row " + std::to_string(row));
    }
    for (std::size_t c = 0; c < rec.size(); ++c) cells[c].push_back(std::move(rec[c]));
  }

  std::vector<Column> columns;
  columns.reserve(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) columns.push_back(build_column(header[c], cells[c]));

  std::ostringstream id;
  id << "ds-" << std::hex << fnv1a(text);
  return Dataset(std::move(columns), id.str());
}

Dataset load_table_file(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::invalid_argument, "cannot open '" + path + "'", path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_table(buf.str(), options);
}

namespace {

std::vector<Column> indicators(const Column& col, const std::vector<std::size_t>& levels) {
  if (levels.size() < 2)
    throw Error(ErrorCode::degenerate_encoding,
                "'" + col.name + "' has fewer than two levels to encode", col.name);
  std::vector<Column> out;
  for (std::size_t k = 1; k < levels.size(); ++k) {
    Column ind;
    ind.name = col.name + "=" + col.type.levels[levels[k]];
    ind.type.kind = ColumnKind::binary;
    ind.values.resize(col.size());
    for (std::size_t r = 0; r < col.size(); ++r)
      ind.values[r] = col.missing(r) ? kMissing
                                     : (static_cast<std::size_t>(col.values[r]) == levels[k] ? 1.0 : 0.0);
    out.push_back(std::move(ind));
  }
  return out;
}

void require_categorical(const Column& col) {
  if (!col.is_categorical())
    throw Error(ErrorCode::invalid_argument, "'" + col.name + "' is not categorical", col.name);
}

}  // namespace

std::vector<Column> encode_categorical(const Column& col, const RowMask& scope) {
  require_categorical(col);
  std::vector<bool> present(col.type.levels.size(), false);
  for (std::size_t r : scope.indices())
    if (!col.missing(r)) present[static_cast<std::size_t>(col.values[r])] = true;
  std::vector<std::size_t> levels;
  for (std::size_t l = 0; l < present.size(); ++l)
    if (present[l]) levels.push_back(l);
  return indicators(col, levels);
}

std::vector<Column> encode_categorical(const Column& col) {
  require_categorical(col);
  std::vector<std::size_t> levels(col.type.levels.size());
  for (std::size_t l = 0; l < levels.size(); ++l) levels[l] = l;
  return indicators(col, levels);
}

RowMask listwise_complete(const Dataset& ds, std::span<const std::string> cols) {
  RowMask mask = ds.all_rows();
  for (const auto& name : cols) {
    const Column& col = ds.column(name);
    for (std::size_t r = 0; r < ds.n_rows(); ++r)
      if (col.missing(r)) mask.set(r, false);
  }
  return mask;
}

RowMask listwise_complete(const Dataset& ds, std::initializer_list<std::string_view> cols) {
  std::vector<std::string> names(cols.begin(), cols.end());
  return listwise_complete(ds, names);
}

std::vector<double> gather(const Column& col, const RowMask& mask) {
  std::vector<double> out;
  out.reserve(mask.count());
  for (std::size_t r : mask.indices())
    if (!col.missing(r)) out.push_back(col.values[r]);
  return out;
}

std::vector<HistogramBin> histogram(const Column& col, const RowMask& mask, double lo, double hi,
                                    std::size_t bins) {
  std::vector<HistogramBin> out;
  if (col.is_categorical()) {
    for (const auto& level : col.type.levels) out.push_back({level, 0, 0, 0});
    for (std::size_t l = 0; l < out.size(); ++l) out[l].low = out[l].high = static_cast<double>(l);
    for (std::size_t r : mask.indices())
      if (!col.missing(r)) ++out[static_cast<std::size_t>(col.values[r])].count;
    return out;
  }
  if (col.is_binary()) {
    out = {{"0", 0, 0, 0}, {"1", 1, 1, 0}};
    for (std::size_t r : mask.indices())
      if (!col.missing(r)) ++out[col.values[r] == 1.0 ? 1 : 0].count;
    return out;
  }
  if (bins == 0) throw Error(ErrorCode::invalid_argument, "histogram needs at least one bin");
  if (hi <= lo) bins = 1;
  const double width = bins == 1 ? hi - lo : (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    const double a = lo + width * static_cast<double>(b);
    const double z = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
    const bool last = b + 1 == bins;
    out.push_back({"[" + format_number(a) + "," + format_number(z) + (last ? "]" : ")"), a, z, 0});
  }
  for (std::size_t r : mask.indices()) {
    if (col.missing(r)) continue;
    const double v = col.values[r];
    if (v < lo || v > hi) continue;
    std::size_t b = 0;
    if (bins > 1) {
      b = static_cast<std::size_t>((v - lo) / width);
      if (b >= bins) b = bins - 1;
      // guard against rounding at interior edges
      while (b > 0 && v < out[b].low) --b;
      while (b + 1 < bins && v >= out[b + 1].low) ++b;
    }
    ++out[b].count;
  }
  return out;
}

ColumnSummary summarize(const Column& col, const RowMask& mask, std::size_t bins) {
  const auto values = gather(col, mask);
  if (values.empty())
    throw Error(ErrorCode::empty_summary, "no non-missing values selected in '" + col.name + "'",
                col.name);
  ColumnSummary s;
  s.n = values.size();
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.sd = s.n > 1 ? std::sqrt(ss / static_cast<double>(s.n - 1)) : 0.0;
  s.histogram = histogram(col, mask, s.min, s.max, bins);
  return s;
}

CausalConfig make_config(const Dataset& ds, std::string cause, std::string outcome,
                         std::vector<std::string> covariates, std::vector<std::string> confounders) {
  CausalConfig cfg{std::move(cause), std::move(outcome), std::move(covariates),
                   std::move(confounders)};
  if (cfg.covariates.empty())
    for (const auto& col : ds.columns())
      if (col.name != cfg.cause && col.name != cfg.outcome) cfg.covariates.push_back(col.name);
  validate_config(ds, cfg);
  return cfg;
}

void validate_config(const Dataset& ds, const CausalConfig& cfg) {
  if (cfg.cause.empty() || cfg.outcome.empty())
    throw Error(ErrorCode::invalid_config, "cause and outcome are required");
  if (cfg.cause == cfg.outcome)
    throw Error(ErrorCode::invalid_config, "cause equals outcome", cfg.cause);
  const Column& x = ds.column(cfg.cause);
  const Column& y = ds.column(cfg.outcome);
  if (x.is_categorical())
    throw Error(ErrorCode::invalid_config, "cause must be binary or continuous", cfg.cause);
  if (y.is_categorical())
    throw Error(ErrorCode::invalid_config, "outcome must be binary or continuous", cfg.outcome);
  std::set<std::string> cov;
  for (const auto& name : cfg.covariates) {
    ds.column(name);
    if (name == cfg.cause || name == cfg.outcome)
      throw Error(ErrorCode::invalid_config, "cause/outcome listed as covariate", name);
    if (!cov.insert(name).second)
      throw Error(ErrorCode::invalid_config, "duplicate covariate", name);
  }
  for (const auto& name : cfg.confounders)
    if (!cov.contains(name))
      throw Error(ErrorCode::invalid_config, "confounder is not a candidate covariate", name);
}

std::string format_number(double v) {
  if (is_missing(v)) return "NA";
  if (v == 0.0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace spurlens
