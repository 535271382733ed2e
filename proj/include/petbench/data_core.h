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

#ifndef PETBENCH_DATA_CORE_H_
#define PETBENCH_DATA_CORE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace petbench {

// Privacy role of a column, following the usual k-anonymity taxonomy.
enum class AttributeRole { kInsensitive, kSensitive, kIdentifying, kQuasiIdentifying };

enum class ColumnKind { kNumeric, kCategorical };

std::string_view RoleName(AttributeRole role);
AttributeRole ParseRole(std::string_view text);
std::string_view KindName(ColumnKind kind);
ColumnKind ParseKind(std::string_view text);

// Marker used by the Census files for unknown values.
inline constexpr std::string_view kMissingMarker = "?";

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::kCategorical;
  AttributeRole role = AttributeRole::kInsensitive;
  bool target = false;
  // Numeric targets: label is 1 iff value >= pass_threshold.
  std::optional<double> pass_threshold;
  // Categorical targets: label is 1 iff value == positive_label.
  std::optional<std::string> positive_label;
};

class AttributeSchema {
 public:
  AttributeSchema() = default;
  explicit AttributeSchema(std::vector<ColumnSpec> columns);

  // Throws kInvalidSchema on duplicate names, a missing/duplicate target, or
  // a target whose role is not Insensitive.
  void Validate() const;

  const std::vector<ColumnSpec>& columns() const { return columns_; }
  const ColumnSpec* Find(std::string_view name) const;
  // Throws kMissingTarget.
  const ColumnSpec& Target() const;
  std::vector<std::string> NamesWithRole(AttributeRole role) const;

  AttributeSchema Without(std::span<const std::string> names) const;
  AttributeSchema WithKind(std::string_view name, ColumnKind kind) const;

  static AttributeSchema FromJson(const nlohmann::json& j);
  nlohmann::json ToJson() const;

 private:
  std::vector<ColumnSpec> columns_;
};

AttributeSchema LoadSchemaFile(const std::filesystem::path& path);

// A single typed column. Categorical values are interned per column.
class Column {
 public:
  static Column Numeric(std::string name, std::vector<double> values,
                        std::vector<bool> missing = {});
  static Column Categorical(std::string name, std::span<const std::string> values);

  const std::string& name() const { return name_; }
  ColumnKind kind() const { return kind_; }
  std::size_t size() const;

  double number(std::size_t row) const { return numbers_[row]; }
  std::int32_t code(std::size_t row) const { return codes_[row]; }
  const std::string& label(std::size_t row) const { return (*dictionary_)[codes_[row]]; }
  const std::vector<std::string>& categories() const { return *dictionary_; }
  bool missing(std::size_t row) const { return !missing_.empty() && missing_[row]; }
  bool has_missing() const;

  // Cell rendered the way it would be written back to CSV.
  std::string Text(std::size_t row) const;

  Column Select(std::span<const std::size_t> rows) const;
  Column Renamed(std::string name) const;

  friend bool operator==(const Column& a, const Column& b);

 private:
  std::string name_;
  ColumnKind kind_ = ColumnKind::kCategorical;
  std::vector<double> numbers_;
  std::vector<std::int32_t> codes_;
  std::shared_ptr<const std::vector<std::string>> dictionary_;
  std::vector<bool> missing_;
};

std::string FormatNumber(double value);

class DataTable {
 public:
  DataTable() = default;
  // Throws kRaggedRow if column lengths differ.
  explicit DataTable(std::vector<Column> columns);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return columns_.size(); }
  const std::vector<Column>& columns() const { return columns_; }
  const Column& column(std::size_t i) const { return columns_[i]; }
  // Throws kUnknownColumn.
  const Column& column(std::string_view name) const;
  std::optional<std::size_t> IndexOf(std::string_view name) const;

  DataTable SelectRows(std::span<const std::size_t> rows) const;
  DataTable SelectColumns(std::span<const std::string> names) const;
  DataTable WithoutColumns(std::span<const std::string> names) const;
  DataTable WithColumn(Column column) const;  // replaces by name
  // Rows where none of `names` (all columns if empty) holds a missing marker.
  std::vector<std::size_t> RowsWithoutMissing(std::span<const std::string> names = {}) const;

  std::string RowText(std::size_t row, char separator = ',') const;
  void WriteCsv(const std::filesystem::path& path, bool header = true) const;

  friend bool operator==(const DataTable& a, const DataTable& b);

 private:
  std::vector<Column> columns_;
  std::size_t rows_ = 0;
};

enum class CsvDialect { kComma, kSemicolon };

struct CsvOptions {
  CsvDialect dialect = CsvDialect::kComma;
  bool header = false;
  // When present, column kinds come from the schema and headerless files take
  // their column names from it positionally.
  const AttributeSchema* schema = nullptr;
};

// Throws kIoError, kRaggedRow, kParseError.
DataTable LoadCsv(const std::filesystem::path& path, const CsvOptions& options);
DataTable ParseCsv(std::string_view text, const CsvOptions& options);

using Labels = std::vector<int>;

// Applies the schema's target rule. Rows with a missing target map to 0;
// encode drops them before they reach a learner.
Labels BinarizeTarget(const DataTable& table, const AttributeSchema& schema);

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct EncodedMatrix {
  RowMatrix features;
  std::vector<std::string> feature_names;
  Labels labels;
  // Source row of every encoded row; rows with missing markers are absent.
  std::vector<std::size_t> source_rows;
  std::size_t dropped_rows = 0;
};

// Fit-once, transform-many encoder: min-max scaling for numeric columns and
// one indicator per observed category for categorical ones.
class Encoder {
 public:
  // Throws kUnknownColumn, kMissingTarget.
  static Encoder Fit(const DataTable& table, const AttributeSchema& schema);

  EncodedMatrix Transform(const DataTable& table) const;
  std::size_t width() const { return feature_names_.size(); }
  const std::vector<std::string>& feature_names() const { return feature_names_; }

  // Category held by the one-hot group of `column` in an encoded row, or
  // nullopt if the row has no indicator set.
  std::optional<std::string> DecodeCategory(const EncodedMatrix& m, std::size_t row,
                                            std::string_view column) const;

 private:
  struct Feature {
    std::string column;
    ColumnKind kind;
    double min = 0.0;
    double max = 0.0;
    std::vector<std::string> categories;  // sorted
    std::size_t offset = 0;
  };
  std::vector<Feature> features_;
  std::vector<std::string> feature_names_;
  AttributeSchema schema_;
};

EncodedMatrix Encode(const DataTable& table, const AttributeSchema& schema);

struct SplitSpec {
  double train_fraction = 2.0 / 3.0;
  std::uint64_t seed = 42;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Throws kPrecondition unless 0 < train_fraction <= 1.
SplitIndices SplitRows(std::size_t rows, const SplitSpec& spec);
std::pair<DataTable, DataTable> Split(const DataTable& table, const SplitSpec& spec);

}  // namespace petbench

#endif  // PETBENCH_DATA_CORE_H_
