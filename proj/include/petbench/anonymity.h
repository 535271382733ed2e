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

#ifndef PETBENCH_ANONYMITY_H_
#define PETBENCH_ANONYMITY_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "petbench/data_core.h"

namespace petbench {

// Label of the fully generalized value.
inline constexpr std::string_view kRootLabel = "*";

// Ordered generalization ladder for one attribute. Level 0 is the identity,
// every further level merges groups of the previous one, and the top level
// maps everything to a single root.
class Hierarchy {
 public:
  struct NumericBins {
    double anchor = 0.0;
    std::vector<double> widths;
  };
  struct SuffixMask {
    std::size_t token_length = 1;
  };
  struct Taxonomy {
    // levels[i] maps a raw value to its label at level i + 1.
    std::vector<std::map<std::string, std::string>> levels;
  };

  // Bins values into half-open intervals "[lo–hi)" of width widths[i] at
  // level i + 1. The grid is anchored at a multiple of the widest width at
  // or below `min`. Throws kInvalidWidths unless the widths are strictly
  // ascending, positive, and each divides the next.
  static Hierarchy Numeric(std::string attribute, double min, double max,
                           std::vector<double> widths);
  // Level i masks the last i characters with '*'.
  static Hierarchy Suffix(std::string attribute, std::size_t token_length);
  // Explicit maps for the intermediate levels; unknown values go to the root.
  static Hierarchy FromTaxonomy(std::string attribute,
                                std::vector<std::map<std::string, std::string>> levels);

  const std::string& attribute() const { return attribute_; }
  int top_level() const;
  // Label every value maps to at the top level.
  std::string root() const;

  // Generalized label of one cell at `level` (level 0 returns the raw text).
  std::string Generalize(const Column& column, std::size_t row, int level) const;
  std::string GeneralizeText(std::string_view raw, int level) const;
  std::string GeneralizeNumber(double value, int level) const;

  // Whole column at `level`. Level 0 returns the column unchanged; higher
  // levels return a categorical column of labels.
  Column Apply(const Column& column, int level) const;

  nlohmann::json ToJson() const;

 private:
  using Rule = std::variant<NumericBins, SuffixMask, Taxonomy>;
  Hierarchy(std::string attribute, Rule rule);

  std::string attribute_;
  Rule rule_;
};

using HierarchySet = std::map<std::string, Hierarchy, std::less<>>;

// Builds hierarchies from the JSON config
//   { "<attribute>": {"type": "numeric_bins", "widths": [...]}
//                  | {"type": "suffix_mask", "token_length": n}
//                  | {"type": "taxonomy", "levels": [{raw: label}, ...]} }
// Numeric bins take min/max from `table`.
HierarchySet HierarchiesFromJson(const nlohmann::json& config, const DataTable& table);
HierarchySet LoadHierarchies(const std::filesystem::path& path, const DataTable& table);

// Current level of every quasi-identifying attribute, kept in schema order.
class GeneralizationState {
 public:
  GeneralizationState() = default;
  explicit GeneralizationState(std::vector<std::pair<std::string, int>> levels)
      : levels_(std::move(levels)) {}
  // All quasi-identifiers of `schema` at level 0.
  static GeneralizationState Zero(const AttributeSchema& schema);

  int level(std::string_view attribute) const;
  void set(std::string_view attribute, int level);
  const std::vector<std::pair<std::string, int>>& levels() const { return levels_; }

  nlohmann::json ToJson() const;
  friend bool operator==(const GeneralizationState&, const GeneralizationState&) = default;

 private:
  std::vector<std::pair<std::string, int>> levels_;
};

struct EquivalenceClass {
  std::vector<std::string> key;  // generalized QI values, schema order
  std::vector<std::size_t> rows;
};

// Groups rows by their generalized quasi-identifier tuple. Classes are
// ordered by first member row. Throws kMissingHierarchy.
std::vector<EquivalenceClass> PartitionClasses(const DataTable& table,
                                               const GeneralizationState& state,
                                               const AttributeSchema& schema,
                                               const HierarchySet& hierarchies);

struct KCheck {
  bool ok = false;
  std::size_t min_class_size = 0;
};

// Throws kPrecondition on an empty table.
KCheck VerifyK(const DataTable& table, const GeneralizationState& state,
               const AttributeSchema& schema, const HierarchySet& hierarchies, std::size_t k);

struct AnonymizeOptions {
  std::size_t k = 3;
  double max_record_suppression = 1.0;
  // Treat k as "k other records": classes must hold at least k + 1 rows.
  bool k_plus_one = false;
};

struct AnonymizationReport {
  std::size_t requested_k = 0;
  std::size_t effective_k = 0;
  std::size_t achieved_min_class_size = 0;
  GeneralizationState state;
  std::size_t original_rows = 0;
  std::size_t original_cols = 0;
  std::size_t suppressed_records = 0;
  std::vector<std::string> removed_identifying;
  double suppressed_cell_fraction = 0.0;
  // Rows of the input table that survive, in output order.
  std::vector<std::size_t> kept_rows;

  nlohmann::json ToJson() const;
};

struct AnonymizationResult {
  DataTable table;
  AttributeSchema schema;  // identifying columns removed, generalized columns categorical
  AnonymizationReport report;
};

// Greedy full-domain generalization followed by record suppression.
// Throws kInvalidK, kMissingHierarchy, kBudgetExceeded.
AnonymizationResult Anonymize(const DataTable& table, const AttributeSchema& schema,
                              const HierarchySet& hierarchies, const AnonymizeOptions& options);

// Recodes `table` with the generalization levels of `state` and drops the
// identifying columns, without suppressing anything. Used to bring held-out
// rows into the feature space of an anonymized training set.
DataTable ApplyGeneralization(const DataTable& table, const AttributeSchema& schema,
                              const HierarchySet& hierarchies, const GeneralizationState& state);

// Suppressed cells over all cells of the original table. Suppressed cells are
// root-valued cells, every cell of a suppressed record, and every cell of a
// removed identifying column.
double SuppressionRatio(const DataTable& original, const DataTable& anonymized,
                        const AnonymizationReport& report, const HierarchySet& hierarchies);

}  // namespace petbench

#endif  // PETBENCH_ANONYMITY_H_
