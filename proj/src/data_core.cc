// Copyright 2026 The petbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "petbench/data_core.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "petbench/error.h"

namespace petbench {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kRaggedRow: return "RaggedRow";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kMissingTarget: return "MissingTarget";
    case ErrorCode::kUnknownColumn: return "UnknownColumn";
    case ErrorCode::kInvalidSchema: return "InvalidSchema";
    case ErrorCode::kInvalidWidths: return "InvalidWidths";
    case ErrorCode::kMissingHierarchy: return "MissingHierarchy";
    case ErrorCode::kBudgetExceeded: return "BudgetExceeded";
    case ErrorCode::kInvalidK: return "InvalidK";
    case ErrorCode::kDegenerateTable: return "DegenerateTable";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonBinaryLabels: return "NonBinaryLabels";
    case ErrorCode::kUnsupportedPlatform: return "UnsupportedPlatform";
    case ErrorCode::kPermissionDenied: return "PermissionDenied";
    case ErrorCode::kSessionOverlap: return "SessionOverlap";
    case ErrorCode::kPrecondition: return "Precondition";
    case ErrorCode::kEmptySample: return "EmptySample";
    case ErrorCode::kTiesInExact: return "TiesInExact";
    case ErrorCode::kDigestMismatch: return "DigestMismatch";
    case ErrorCode::kNetworkError: return "NetworkError";
    case ErrorCode::kMissingBenchmark: return "MissingBenchmark";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kEmptyLog: return "EmptyLog";
    case ErrorCode::kConfig: return "Config";
  }
  return "Unknown";
}

std::string_view RoleName(AttributeRole role) {
  switch (role) {
    case AttributeRole::kInsensitive: return "insensitive";
    case AttributeRole::kSensitive: return "sensitive";
    case AttributeRole::kIdentifying: return "identifying";
    case AttributeRole::kQuasiIdentifying: return "quasi_identifying";
  }
  return "insensitive";
}

AttributeRole ParseRole(std::string_view text) {
  if (text == "insensitive") return AttributeRole::kInsensitive;
  if (text == "sensitive") return AttributeRole::kSensitive;
  if (text == "identifying") return AttributeRole::kIdentifying;
  if (text == "quasi_identifying" || text == "quasi-identifying") {
    return AttributeRole::kQuasiIdentifying;
  }
  throw Error(ErrorCode::kInvalidSchema, "unknown role '" + std::string(text) + "'");
}

std::string_view KindName(ColumnKind kind) {
  return kind == ColumnKind::kNumeric ? "numeric" : "categorical";
}

ColumnKind ParseKind(std::string_view text) {
  if (text == "numeric") return ColumnKind::kNumeric;
  if (text == "categorical") return ColumnKind::kCategorical;
  throw Error(ErrorCode::kInvalidSchema, "unknown kind '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// AttributeSchema

AttributeSchema::AttributeSchema(std::vector<ColumnSpec> columns) : columns_(std::move(columns)) {}

void AttributeSchema::Validate() const {
  std::set<std::string> seen;
  std::size_t targets = 0;
  for (const auto& c : columns_) {
    if (!seen.insert(c.name).second) {
      throw Error(ErrorCode::kInvalidSchema, "duplicate column '" + c.name + "'");
    }
    if (c.target) {
      ++targets;
      if (c.role != AttributeRole::kInsensitive) {
        throw Error(ErrorCode::kInvalidSchema, "target '" + c.name + "' must be insensitive");
      }
      if (c.kind == ColumnKind::kNumeric && !c.pass_threshold) {
        throw Error(ErrorCode::kInvalidSchema, "numeric target needs pass_threshold");
      }
      if (c.kind == ColumnKind::kCategorical && !c.positive_label) {
        throw Error(ErrorCode::kInvalidSchema, "categorical target needs positive");
      }
    }
  }
  if (targets == 0) throw Error(ErrorCode::kMissingTarget, "no column flagged as target");
  if (targets > 1) throw Error(ErrorCode::kInvalidSchema, "more than one target column");
}

const ColumnSpec* AttributeSchema::Find(std::string_view name) const {
  for (const auto& c : columns_) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

const ColumnSpec& AttributeSchema::Target() const {
  for (const auto& c : columns_) {
    if (c.target) return c;
  }
  throw Error(ErrorCode::kMissingTarget, "no column flagged as target");
}

std::vector<std::string> AttributeSchema::NamesWithRole(AttributeRole role) const {
  std::vector<std::string> out;
  for (const auto& c : columns_) {
    if (c.role == role) out.push_back(c.name);
  }
  return out;
}

AttributeSchema AttributeSchema::Without(std::span<const std::string> names) const {
  std::vector<ColumnSpec> kept;
  for (const auto& c : columns_) {
    if (std::find(names.begin(), names.end(), c.name) == names.end()) kept.push_back(c);
  }
  return AttributeSchema(std::move(kept));
}

AttributeSchema AttributeSchema::WithKind(std::string_view name, ColumnKind kind) const {
  auto copy = columns_;
  for (auto& c : copy) {
    if (c.name == name) c.kind = kind;
  }
  return AttributeSchema(std::move(copy));
}

AttributeSchema AttributeSchema::FromJson(const nlohmann::json& j) {
  if (!j.is_array()) throw Error(ErrorCode::kInvalidSchema, "schema must be a JSON array");
  std::vector<ColumnSpec> cols;
  for (const auto& item : j) {
    ColumnSpec c;
    c.name = item.at("name").get<std::string>();
    c.kind = ParseKind(item.at("kind").get<std::string>());
    c.role = ParseRole(item.at("role").get<std::string>());
    c.target = item.value("target", false);
    if (item.contains("pass_threshold")) c.pass_threshold = item["pass_threshold"].get<double>();
    if (item.contains("positive")) c.positive_label = item["positive"].get<std::string>();
    cols.push_back(std::move(c));
  }
  AttributeSchema schema(std::move(cols));
  schema.Validate();
  return schema;
}

nlohmann::json AttributeSchema::ToJson() const {
  auto out = nlohmann::json::array();
  for (const auto& c : columns_) {
    nlohmann::json item = {{"name", c.name},
                           {"kind", std::string(KindName(c.kind))},
                           {"role", std::string(RoleName(c.role))}};
    if (c.target) item["target"] = true;
    if (c.pass_threshold) item["pass_threshold"] = *c.pass_threshold;
    if (c.positive_label) item["positive"] = *c.positive_label;
    out.push_back(std::move(item));
  }
  return out;
}

AttributeSchema LoadSchemaFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open schema " + path.string());
  try {
    return AttributeSchema::FromJson(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidSchema, path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Column

std::string FormatNumber(double value) {
  if (value == std::floor(value) && std::fabs(value) < 1e15) {
    return std::to_string(static_cast<long long>(value));
  }
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

Column Column::Numeric(std::string name, std::vector<double> values, std::vector<bool> missing) {
  Column c;
  c.name_ = std::move(name);
  c.kind_ = ColumnKind::kNumeric;
  c.numbers_ = std::move(values);
  if (std::find(missing.begin(), missing.end(), true) != missing.end()) {
    c.missing_ = std::move(missing);
  }
  return c;
}

Column Column::Categorical(std::string name, std::span<const std::string> values) {
  Column c;
  c.name_ = std::move(name);
  c.kind_ = ColumnKind::kCategorical;
  auto dict = std::make_shared<std::vector<std::string>>();
  std::unordered_map<std::string, std::int32_t> index;
  c.codes_.reserve(values.size());
  bool any_missing = false;
  for (const auto& v : values) {
    auto [it, inserted] = index.try_emplace(v, static_cast<std::int32_t>(dict->size()));
    if (inserted) dict->push_back(v);
    c.codes_.push_back(it->second);
    any_missing = any_missing || v == kMissingMarker;
  }
  if (any_missing) {
    c.missing_.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) c.missing_[i] = values[i] == kMissingMarker;
  }
  c.dictionary_ = std::move(dict);
  return c;
}

std::size_t Column::size() const {
  return kind_ == ColumnKind::kNumeric ? numbers_.size() : codes_.size();
}

bool Column::has_missing() const { return !missing_.empty(); }

std::string Column::Text(std::size_t row) const {
  if (missing(row)) return std::string(kMissingMarker);
  return kind_ == ColumnKind::kNumeric ? FormatNumber(numbers_[row]) : label(row);
}

Column Column::Select(std::span<const std::size_t> rows) const {
  Column c;
  c.name_ = name_;
  c.kind_ = kind_;
  c.dictionary_ = dictionary_;
  if (kind_ == ColumnKind::kNumeric) {
    c.numbers_.reserve(rows.size());
    for (auto r : rows) c.numbers_.push_back(numbers_[r]);
  } else {
    c.codes_.reserve(rows.size());
    for (auto r : rows) c.codes_.push_back(codes_[r]);
  }
  if (!missing_.empty()) {
    bool any = false;
    std::vector<bool> m(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      m[i] = missing_[rows[i]];
      any = any || m[i];
    }
    if (any) c.missing_ = std::move(m);
  }
  return c;
}

Column Column::Renamed(std::string name) const {
  Column c = *this;
  c.name_ = std::move(name);
  return c;
}

bool operator==(const Column& a, const Column& b) {
  if (a.name_ != b.name_ || a.kind_ != b.kind_ || a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.missing(i) != b.missing(i)) return false;
    if (a.kind_ == ColumnKind::kNumeric) {
      if (a.numbers_[i] != b.numbers_[i]) return false;
    } else if (a.label(i) != b.label(i)) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// DataTable

DataTable::DataTable(std::vector<Column> columns) : columns_(std::move(columns)) {
  rows_ = columns_.empty() ? 0 : columns_.front().size();
  for (const auto& c : columns_) {
    if (c.size() != rows_) {
      throw Error(ErrorCode::kRaggedRow, "column '" + c.name() + "' has " +
                                             std::to_string(c.size()) + " rows, expected " +
                                             std::to_string(rows_));
    }
    if (c.kind() == ColumnKind::kNumeric) {
      for (std::size_t i = 0; i < rows_; ++i) {
        if (!c.missing(i) && !std::isfinite(c.number(i))) {
          throw Error(ErrorCode::kParseError, "non-finite value in '" + c.name() + "'");
        }
      }
    }
  }
}

const Column& DataTable::column(std::string_view name) const {
  auto idx = IndexOf(name);
  if (!idx) throw Error(ErrorCode::kUnknownColumn, "no column '" + std::string(name) + "'");
  return columns_[*idx];
}

std::optional<std::size_t> DataTable::IndexOf(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name() == name) return i;
  }
  return std::nullopt;
}

DataTable DataTable::SelectRows(std::span<const std::size_t> rows) const {
  std::vector<Column> cols;
  cols.reserve(columns_.size());
  for (const auto& c : columns_) cols.push_back(c.Select(rows));
  DataTable t;
  t.columns_ = std::move(cols);
  t.rows_ = rows.size();
  return t;
}

DataTable DataTable::SelectColumns(std::span<const std::string> names) const {
  std::vector<Column> cols;
  for (const auto& n : names) cols.push_back(column(n));
  DataTable t;
  t.columns_ = std::move(cols);
  t.rows_ = rows_;
  return t;
}

DataTable DataTable::WithoutColumns(std::span<const std::string> names) const {
  std::vector<Column> cols;
  for (const auto& c : columns_) {
    if (std::find(names.begin(), names.end(), c.name()) == names.end()) cols.push_back(c);
  }
  DataTable t;
  t.columns_ = std::move(cols);
  t.rows_ = t.columns_.empty() ? 0 : rows_;
  return t;
}

DataTable DataTable::WithColumn(Column column) const {
  DataTable t = *this;
  if (column.size() != rows_ && !columns_.empty()) {
    throw Error(ErrorCode::kRaggedRow, "replacement column has wrong length");
  }
  if (auto idx = IndexOf(column.name())) {
    t.columns_[*idx] = std::move(column);
  } else {
    t.rows_ = column.size();
    t.columns_.push_back(std::move(column));
  }
  return t;
}

std::vector<std::size_t> DataTable::RowsWithoutMissing(std::span<const std::string> names) const {
  std::vector<const Column*> check;
  if (names.empty()) {
    for (const auto& c : columns_) check.push_back(&c);
  } else {
    for (const auto& n : names) check.push_back(&column(n));
  }
  std::vector<std::size_t> keep;
  keep.reserve(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    bool ok = std::none_of(check.begin(), check.end(), [r](const Column* c) { return c->missing(r); });
    if (ok) keep.push_back(r);
  }
  return keep;
}

std::string DataTable::RowText(std::size_t row, char separator) const {
  std::string out;
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (c) out.push_back(separator);
    out += columns_[c].Text(row);
  }
  return out;
}

namespace {

std::string QuoteIfNeeded(const std::string& s, char sep) {
  if (s.find(sep) == std::string::npos && s.find('"') == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

}  // namespace

void DataTable::WriteCsv(const std::filesystem::path& path, bool header) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  if (header) {
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      if (c) out << ',';
      out << QuoteIfNeeded(columns_[c].name(), ',');
    }
    out << '\n';
  }
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      if (c) out << ',';
      out << QuoteIfNeeded(columns_[c].Text(r), ',');
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

bool operator==(const DataTable& a, const DataTable& b) {
  return a.rows_ == b.rows_ && a.columns_ == b.columns_;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string_view Trim(std::string_view s) {
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string> SplitFields(std::string_view line, char sep) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"' && Trim(cur).empty()) {
      cur.clear();
      quoted = true;
      was_quoted = true;
    } else if (ch == sep) {
      fields.push_back(was_quoted ? cur : std::string(Trim(cur)));
      cur.clear();
      was_quoted = false;
    } else if (!(was_quoted && (ch == ' ' || ch == '\t' || ch == '\r'))) {
      cur.push_back(ch);
    }
  }
  fields.push_back(was_quoted ? cur : std::string(Trim(cur)));
  return fields;
}

std::optional<double> ParseDouble(std::string_view s) {
  double v = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

}  // namespace

DataTable ParseCsv(std::string_view text, const CsvOptions& options) {
  const char sep = options.dialect == CsvDialect::kComma ? ',' : ';';
  std::vector<std::string> names;
  std::vector<std::vector<std::string>> cells;  // column-major
  std::vector<std::size_t> line_numbers;
  std::size_t width = 0;
  bool have_width = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (Trim(line).empty()) {
      if (end == text.size()) break;
      continue;
    }
    auto fields = SplitFields(line, sep);
    if (!have_width) {
      width = fields.size();
      have_width = true;
      cells.resize(width);
      if (options.header) {
        names = std::move(fields);
        continue;
      }
    }
    if (fields.size() != width) {
      throw Error(ErrorCode::kRaggedRow, "line " + std::to_string(line_no) + ": expected " +
                                             std::to_string(width) + " fields, got " +
                                             std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < width; ++c) cells[c].push_back(std::move(fields[c]));
    line_numbers.push_back(line_no);
    if (end == text.size()) break;
  }

  if (names.empty()) {
    const auto* schema = options.schema;
    if (schema && schema->columns().size() == width) {
      for (const auto& c : schema->columns()) names.push_back(c.name);
    } else if (schema && have_width) {
      throw Error(ErrorCode::kSchemaMismatch,
                  "headerless file has " + std::to_string(width) + " columns, schema has " +
                      std::to_string(schema->columns().size()));
    } else {
      for (std::size_t c = 0; c < width; ++c) names.push_back("c" + std::to_string(c));
    }
  }
  if (!have_width && options.schema) {
    // Empty file: keep the schema's shape.
    std::vector<Column> cols;
    for (const auto& spec : options.schema->columns()) {
      if (spec.kind == ColumnKind::kNumeric) {
        cols.push_back(Column::Numeric(spec.name, {}));
      } else {
        cols.push_back(Column::Categorical(spec.name, {}));
      }
    }
    return DataTable(std::move(cols));
  }

  std::vector<Column> cols;
  for (std::size_t c = 0; c < width; ++c) {
    const ColumnSpec* spec = options.schema ? options.schema->Find(names[c]) : nullptr;
    bool numeric;
    if (spec) {
      numeric = spec->kind == ColumnKind::kNumeric;
    } else {
      numeric = !cells[c].empty() && std::all_of(cells[c].begin(), cells[c].end(), [](const auto& s) {
        return s == kMissingMarker || ParseDouble(s).has_value();
      });
    }
    if (!numeric) {
      cols.push_back(Column::Categorical(names[c], cells[c]));
      continue;
    }
    std::vector<double> values(cells[c].size());
    std::vector<bool> missing(cells[c].size());
    for (std::size_t r = 0; r < cells[c].size(); ++r) {
      if (cells[c][r] == kMissingMarker) {
        missing[r] = true;
        continue;
      }
      auto v = ParseDouble(cells[c][r]);
      if (!v) {
        throw Error(ErrorCode::kParseError, "line " + std::to_string(line_numbers[r]) +
                                                ", column " + std::to_string(c + 1) + " ('" +
                                                names[c] + "'): not a number: '" + cells[c][r] +
                                                "'");
      }
      values[r] = *v;
    }
    cols.push_back(Column::Numeric(names[c], std::move(values), std::move(missing)));
  }
  return DataTable(std::move(cols));
}

DataTable LoadCsv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseCsv(ss.str(), options);
}

// ---------------------------------------------------------------------------
// Targets and encoding

Labels BinarizeTarget(const DataTable& table, const AttributeSchema& schema) {
  const ColumnSpec& spec = schema.Target();
  const Column& col = table.column(spec.name);
  Labels labels(table.rows());
  if (col.kind() != spec.kind) {
    throw Error(ErrorCode::kSchemaMismatch, "target '" + spec.name + "' kind differs from schema");
  }
  for (std::size_t r = 0; r < table.rows(); ++r) {
    if (col.missing(r)) continue;
    if (spec.kind == ColumnKind::kNumeric) {
      labels[r] = col.number(r) >= *spec.pass_threshold ? 1 : 0;
    } else {
      labels[r] = col.label(r) == *spec.positive_label ? 1 : 0;
    }
  }
  return labels;
}

Encoder Encoder::Fit(const DataTable& table, const AttributeSchema& schema) {
  Encoder enc;
  enc.schema_ = schema;
  schema.Target();
  std::size_t offset = 0;
  for (const auto& spec : schema.columns()) {
    if (!table.IndexOf(spec.name)) {
      throw Error(ErrorCode::kUnknownColumn, "schema column '" + spec.name + "' not in table");
    }
    if (spec.target) continue;
    const Column& col = table.column(spec.name);
    Feature f;
    f.column = spec.name;
    f.kind = col.kind();
    f.offset = offset;
    if (col.kind() == ColumnKind::kNumeric) {
      bool first = true;
      for (std::size_t r = 0; r < col.size(); ++r) {
        if (col.missing(r)) continue;
        double v = col.number(r);
        if (first) {
          f.min = f.max = v;
          first = false;
        }
        f.min = std::min(f.min, v);
        f.max = std::max(f.max, v);
      }
      enc.feature_names_.push_back(spec.name);
      offset += 1;
    } else {
      std::set<std::string> cats;
      for (std::size_t r = 0; r < col.size(); ++r) {
        if (!col.missing(r)) cats.insert(col.label(r));
      }
      f.categories.assign(cats.begin(), cats.end());
      for (const auto& cat : f.categories) enc.feature_names_.push_back(spec.name + "=" + cat);
      offset += f.categories.size();
    }
    enc.features_.push_back(std::move(f));
  }
  return enc;
}

EncodedMatrix Encoder::Transform(const DataTable& table) const {
  std::vector<std::string> used;
  for (const auto& spec : schema_.columns()) {
    if (!table.IndexOf(spec.name)) {
      throw Error(ErrorCode::kUnknownColumn, "schema column '" + spec.name + "' not in table");
    }
    used.push_back(spec.name);
  }
  EncodedMatrix m;
  m.source_rows = table.RowsWithoutMissing(used);
  m.dropped_rows = table.rows() - m.source_rows.size();
  m.feature_names = feature_names_;
  m.features = RowMatrix::Zero(static_cast<Eigen::Index>(m.source_rows.size()),
                               static_cast<Eigen::Index>(feature_names_.size()));
  const Labels all_labels = BinarizeTarget(table, schema_);
  m.labels.reserve(m.source_rows.size());
  for (auto r : m.source_rows) m.labels.push_back(all_labels[r]);

  for (const auto& f : features_) {
    const Column& col = table.column(f.column);
    const auto j0 = static_cast<Eigen::Index>(f.offset);
    if (f.kind == ColumnKind::kNumeric) {
      if (col.kind() != ColumnKind::kNumeric) {
        throw Error(ErrorCode::kSchemaMismatch, "column '" + f.column + "' is no longer numeric");
      }
      const double range = f.max - f.min;
      for (std::size_t i = 0; i < m.source_rows.size(); ++i) {
        double v = col.number(m.source_rows[i]);
        m.features(static_cast<Eigen::Index>(i), j0) = range > 0.0 ? (v - f.min) / range : 0.0;
      }
      continue;
    }
    // Map the column's dictionary onto the fitted category list once.
    std::vector<std::int64_t> slot(col.kind() == ColumnKind::kCategorical ? col.categories().size() : 0, -1);
    for (std::size_t d = 0; d < slot.size(); ++d) {
      auto it = std::lower_bound(f.categories.begin(), f.categories.end(), col.categories()[d]);
      if (it != f.categories.end() && *it == col.categories()[d]) slot[d] = it - f.categories.begin();
    }
    for (std::size_t i = 0; i < m.source_rows.size(); ++i) {
      const std::size_t r = m.source_rows[i];
      std::int64_t s = -1;
      if (col.kind() == ColumnKind::kCategorical) {
        s = slot[static_cast<std::size_t>(col.code(r))];
      } else {
        auto text = col.Text(r);
        auto it = std::lower_bound(f.categories.begin(), f.categories.end(), text);
        if (it != f.categories.end() && *it == text) s = it - f.categories.begin();
      }
      if (s >= 0) m.features(static_cast<Eigen::Index>(i), j0 + s) = 1.0;
    }
  }
  return m;
}

std::optional<std::string> Encoder::DecodeCategory(const EncodedMatrix& m, std::size_t row,
                                                   std::string_view column) const {
  for (const auto& f : features_) {
    if (f.column != column || f.kind != ColumnKind::kCategorical) continue;
    for (std::size_t k = 0; k < f.categories.size(); ++k) {
      if (m.features(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(f.offset + k)) == 1.0) {
        return f.categories[k];
      }
    }
    return std::nullopt;
  }
  throw Error(ErrorCode::kUnknownColumn, "no categorical feature '" + std::string(column) + "'");
}

EncodedMatrix Encode(const DataTable& table, const AttributeSchema& schema) {
  return Encoder::Fit(table, schema).Transform(table);
}

// ---------------------------------------------------------------------------
// Splitting

SplitIndices SplitRows(std::size_t rows, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction <= 1.0)) {
    throw Error(ErrorCode::kPrecondition, "train fraction must be in (0, 1]");
  }
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(spec.seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(rows)));
  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return out;
}

std::pair<DataTable, DataTable> Split(const DataTable& table, const SplitSpec& spec) {
  auto idx = SplitRows(table.rows(), spec);
  return {table.SelectRows(idx.train), table.SelectRows(idx.test)};
}

}  // namespace petbench
