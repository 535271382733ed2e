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

#include "petbench/anonymity.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "petbench/error.h"

namespace petbench {

namespace {

constexpr std::string_view kEnDash = "–";

bool IsMultiple(double big, double small) {
  const double q = big / small;
  return std::fabs(q - std::round(q)) < 1e-9;
}

}  // namespace

// ---------------------------------------------------------------------------
// Hierarchy

Hierarchy::Hierarchy(std::string attribute, Rule rule)
    : attribute_(std::move(attribute)), rule_(std::move(rule)) {}

Hierarchy Hierarchy::Numeric(std::string attribute, double min, double max,
                             std::vector<double> widths) {
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (!(widths[i] > 0.0) || !std::isfinite(widths[i])) {
      throw Error(ErrorCode::kInvalidWidths, attribute + ": widths must be positive");
    }
    if (i > 0 && !(widths[i] > widths[i - 1])) {
      throw Error(ErrorCode::kInvalidWidths, attribute + ": widths must be strictly ascending");
    }
    if (i > 0 && !IsMultiple(widths[i], widths[i - 1])) {
      throw Error(ErrorCode::kInvalidWidths,
                  attribute + ": each width must divide the next so bins nest");
    }
  }
  if (min > max) std::swap(min, max);
  NumericBins bins;
  bins.widths = std::move(widths);
  if (!bins.widths.empty()) {
    const double top = bins.widths.back();
    bins.anchor = std::floor(min / top) * top;
  }
  return Hierarchy(std::move(attribute), std::move(bins));
}

Hierarchy Hierarchy::Suffix(std::string attribute, std::size_t token_length) {
  if (token_length == 0) throw Error(ErrorCode::kPrecondition, "token length must be >= 1");
  return Hierarchy(std::move(attribute), SuffixMask{token_length});
}

Hierarchy Hierarchy::FromTaxonomy(std::string attribute,
                                  std::vector<std::map<std::string, std::string>> levels) {
  // Values merged at level i must stay merged at level i + 1.
  for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
    std::map<std::string, std::string> parent_of;
    for (const auto& [raw, label] : levels[i]) {
      auto next = levels[i + 1].find(raw);
      std::string up = next == levels[i + 1].end() ? std::string(kRootLabel) : next->second;
      auto [it, inserted] = parent_of.emplace(label, up);
      if (!inserted && it->second != up) {
        throw Error(ErrorCode::kConfig, attribute + ": taxonomy level " + std::to_string(i + 2) +
                                            " splits group '" + label + "'");
      }
    }
  }
  return Hierarchy(std::move(attribute), Taxonomy{std::move(levels)});
}

int Hierarchy::top_level() const {
  return std::visit(
      [](const auto& r) -> int {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, NumericBins>) {
          return static_cast<int>(r.widths.size()) + 1;
        } else if constexpr (std::is_same_v<T, SuffixMask>) {
          return static_cast<int>(r.token_length);
        } else {
          return static_cast<int>(r.levels.size()) + 1;
        }
      },
      rule_);
}

std::string Hierarchy::root() const {
  if (const auto* s = std::get_if<SuffixMask>(&rule_)) return std::string(s->token_length, '*');
  return std::string(kRootLabel);
}

std::string Hierarchy::GeneralizeNumber(double value, int level) const {
  if (level <= 0) return FormatNumber(value);
  if (level >= top_level()) return root();
  if (const auto* bins = std::get_if<NumericBins>(&rule_)) {
    const double w = bins->widths[static_cast<std::size_t>(level - 1)];
    const double lo = bins->anchor + std::floor((value - bins->anchor) / w) * w;
    return "[" + FormatNumber(lo) + std::string(kEnDash) + FormatNumber(lo + w) + ")";
  }
  return GeneralizeText(FormatNumber(value), level);
}

std::string Hierarchy::GeneralizeText(std::string_view raw, int level) const {
  if (level <= 0) return std::string(raw);
  if (level >= top_level()) return root();
  if (std::holds_alternative<SuffixMask>(rule_)) {
    std::string out(raw);
    const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(level), out.size());
    std::fill(out.end() - static_cast<std::ptrdiff_t>(n), out.end(), '*');
    return out;
  }
  if (const auto* t = std::get_if<Taxonomy>(&rule_)) {
    const auto& map = t->levels[static_cast<std::size_t>(level - 1)];
    auto it = map.find(std::string(raw));
    return it == map.end() ? root() : it->second;
  }
  // Numeric bins over text: only parsable numbers can be binned.
  const std::string text(raw);
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0') {
    throw Error(ErrorCode::kSchemaMismatch,
                attribute_ + ": cannot bin non-numeric value '" + text + "'");
  }
  return GeneralizeNumber(v, level);
}

std::string Hierarchy::Generalize(const Column& column, std::size_t row, int level) const {
  if (column.missing(row)) {
    return level >= top_level() ? root() : std::string(kMissingMarker);
  }
  if (column.kind() == ColumnKind::kNumeric) return GeneralizeNumber(column.number(row), level);
  return GeneralizeText(column.label(row), level);
}

Column Hierarchy::Apply(const Column& column, int level) const {
  if (level <= 0) return column;
  std::vector<std::string> labels(column.size());
  if (column.kind() == ColumnKind::kCategorical) {
    std::vector<std::string> mapped;
    mapped.reserve(column.categories().size());
    for (const auto& cat : column.categories()) mapped.push_back(GeneralizeText(cat, level));
    for (std::size_t r = 0; r < column.size(); ++r) {
      labels[r] = column.missing(r) && level < top_level()
                      ? std::string(kMissingMarker)
                      : mapped[static_cast<std::size_t>(column.code(r))];
    }
  } else {
    for (std::size_t r = 0; r < column.size(); ++r) labels[r] = Generalize(column, r, level);
  }
  return Column::Categorical(column.name(), labels);
}

nlohmann::json Hierarchy::ToJson() const {
  return std::visit(
      [](const auto& r) -> nlohmann::json {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, NumericBins>) {
          return {{"type", "numeric_bins"}, {"anchor", r.anchor}, {"widths", r.widths}};
        } else if constexpr (std::is_same_v<T, SuffixMask>) {
          return {{"type", "suffix_mask"}, {"token_length", r.token_length}};
        } else {
          return {{"type", "taxonomy"}, {"levels", r.levels}};
        }
      },
      rule_);
}

HierarchySet HierarchiesFromJson(const nlohmann::json& config, const DataTable& table) {
  HierarchySet out;
  for (const auto& [name, spec] : config.items()) {
    const std::string type = spec.at("type").get<std::string>();
    if (type == "numeric_bins") {
      const Column& col = table.column(name);
      if (col.kind() != ColumnKind::kNumeric) {
        throw Error(ErrorCode::kConfig, name + ": numeric_bins needs a numeric column");
      }
      double lo = 0.0, hi = 0.0;
      bool first = true;
      for (std::size_t r = 0; r < col.size(); ++r) {
        if (col.missing(r)) continue;
        lo = first ? col.number(r) : std::min(lo, col.number(r));
        hi = first ? col.number(r) : std::max(hi, col.number(r));
        first = false;
      }
      out.emplace(name, Hierarchy::Numeric(name, lo, hi, spec.at("widths").get<std::vector<double>>()));
    } else if (type == "suffix_mask") {
      out.emplace(name, Hierarchy::Suffix(name, spec.at("token_length").get<std::size_t>()));
    } else if (type == "taxonomy") {
      auto levels = spec.value("levels", std::vector<std::map<std::string, std::string>>{});
      out.emplace(name, Hierarchy::FromTaxonomy(name, std::move(levels)));
    } else {
      throw Error(ErrorCode::kConfig, name + ": unknown hierarchy type '" + type + "'");
    }
  }
  return out;
}

HierarchySet LoadHierarchies(const std::filesystem::path& path, const DataTable& table) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open hierarchy config " + path.string());
  try {
    return HierarchiesFromJson(nlohmann::json::parse(in), table);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// GeneralizationState

GeneralizationState GeneralizationState::Zero(const AttributeSchema& schema) {
  std::vector<std::pair<std::string, int>> levels;
  for (const auto& name : schema.NamesWithRole(AttributeRole::kQuasiIdentifying)) {
    levels.emplace_back(name, 0);
  }
  return GeneralizationState(std::move(levels));
}

int GeneralizationState::level(std::string_view attribute) const {
  for (const auto& [name, level] : levels_) {
    if (name == attribute) return level;
  }
  return 0;
}

void GeneralizationState::set(std::string_view attribute, int level) {
  for (auto& [name, l] : levels_) {
    if (name == attribute) {
      l = level;
      return;
    }
  }
  levels_.emplace_back(std::string(attribute), level);
}

nlohmann::json GeneralizationState::ToJson() const {
  auto out = nlohmann::json::object();
  for (const auto& [name, level] : levels_) out[name] = level;
  return out;
}

// ---------------------------------------------------------------------------
// Partitioning

namespace {

struct QiColumns {
  std::vector<std::string> names;
  std::vector<const Column*> columns;
  std::vector<const Hierarchy*> hierarchies;
};

QiColumns ResolveQis(const DataTable& table, const AttributeSchema& schema,
                     const HierarchySet& hierarchies) {
  QiColumns q;
  for (const auto& name : schema.NamesWithRole(AttributeRole::kQuasiIdentifying)) {
    auto h = hierarchies.find(name);
    if (h == hierarchies.end()) {
      throw Error(ErrorCode::kMissingHierarchy, "no hierarchy for quasi-identifier '" + name + "'");
    }
    q.names.push_back(name);
    q.columns.push_back(&table.column(name));
    q.hierarchies.push_back(&h->second);
  }
  return q;
}

// Dense per-row codes of one attribute at one level.
std::vector<std::int32_t> LevelCodes(const Column& column, const Hierarchy& h, int level) {
  std::vector<std::int32_t> codes(column.size());
  std::unordered_map<std::string, std::int32_t> index;
  auto intern = [&index](std::string s) {
    auto [it, inserted] = index.try_emplace(std::move(s), static_cast<std::int32_t>(index.size()));
    return it->second;
  };
  if (column.kind() == ColumnKind::kCategorical) {
    std::vector<std::int32_t> by_dict;
    by_dict.reserve(column.categories().size());
    for (const auto& cat : column.categories()) by_dict.push_back(intern(h.GeneralizeText(cat, level)));
    const std::int32_t missing_code = level >= h.top_level() ? intern(h.root()) : intern(std::string(kMissingMarker));
    for (std::size_t r = 0; r < column.size(); ++r) {
      codes[r] = column.missing(r) ? missing_code : by_dict[static_cast<std::size_t>(column.code(r))];
    }
  } else {
    for (std::size_t r = 0; r < column.size(); ++r) codes[r] = intern(h.Generalize(column, r, level));
  }
  return codes;
}

// Assigns every row a class id (ordered by first occurrence) from per-attribute codes.
std::vector<std::int32_t> ClassIds(const std::vector<const std::vector<std::int32_t>*>& codes,
                                   std::size_t rows, std::int32_t* num_classes) {
  std::vector<std::int32_t> ids(rows, 0);
  std::int32_t count = rows ? 1 : 0;
  std::unordered_map<std::uint64_t, std::int32_t> remap;
  for (const auto* attr : codes) {
    remap.clear();
    remap.reserve(static_cast<std::size_t>(count) * 2);
    for (std::size_t r = 0; r < rows; ++r) {
      const std::uint64_t key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(ids[r])) << 32) |
                                static_cast<std::uint32_t>((*attr)[r]);
      auto [it, inserted] = remap.try_emplace(key, static_cast<std::int32_t>(remap.size()));
      ids[r] = it->second;
    }
    count = static_cast<std::int32_t>(remap.size());
  }
  if (num_classes) *num_classes = count;
  return ids;
}

std::vector<std::size_t> ClassSizes(const std::vector<std::int32_t>& ids, std::int32_t num_classes) {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(num_classes), 0);
  for (auto id : ids) ++sizes[static_cast<std::size_t>(id)];
  return sizes;
}

}  // namespace

std::vector<EquivalenceClass> PartitionClasses(const DataTable& table,
                                               const GeneralizationState& state,
                                               const AttributeSchema& schema,
                                               const HierarchySet& hierarchies) {
  const QiColumns q = ResolveQis(table, schema, hierarchies);
  std::vector<std::vector<std::int32_t>> codes;
  for (std::size_t a = 0; a < q.names.size(); ++a) {
    codes.push_back(LevelCodes(*q.columns[a], *q.hierarchies[a], state.level(q.names[a])));
  }
  std::vector<const std::vector<std::int32_t>*> ptrs;
  for (const auto& c : codes) ptrs.push_back(&c);
  std::int32_t n = 0;
  const auto ids = ClassIds(ptrs, table.rows(), &n);
  std::vector<EquivalenceClass> classes(static_cast<std::size_t>(n));
  for (std::size_t r = 0; r < table.rows(); ++r) {
    auto& cls = classes[static_cast<std::size_t>(ids[r])];
    if (cls.rows.empty()) {
      for (std::size_t a = 0; a < q.names.size(); ++a) {
        cls.key.push_back(q.hierarchies[a]->Generalize(*q.columns[a], r, state.level(q.names[a])));
      }
    }
    cls.rows.push_back(r);
  }
  return classes;
}

KCheck VerifyK(const DataTable& table, const GeneralizationState& state,
               const AttributeSchema& schema, const HierarchySet& hierarchies, std::size_t k) {
  if (table.rows() == 0) throw Error(ErrorCode::kPrecondition, "verify_k needs a nonempty table");
  const auto classes = PartitionClasses(table, state, schema, hierarchies);
  std::size_t min_size = table.rows();
  for (const auto& c : classes) min_size = std::min(min_size, c.rows.size());
  return {min_size >= k, min_size};
}

DataTable ApplyGeneralization(const DataTable& table, const AttributeSchema& schema,
                              const HierarchySet& hierarchies, const GeneralizationState& state) {
  std::vector<std::string> ident;
  for (const auto& name : schema.NamesWithRole(AttributeRole::kIdentifying)) {
    if (table.IndexOf(name)) ident.push_back(name);
  }
  DataTable out = table.WithoutColumns(ident);
  for (const auto& [name, level] : state.levels()) {
    if (level <= 0 || !out.IndexOf(name)) continue;
    auto h = hierarchies.find(name);
    if (h == hierarchies.end()) {
      throw Error(ErrorCode::kMissingHierarchy, "no hierarchy for quasi-identifier '" + name + "'");
    }
    out = out.WithColumn(h->second.Apply(out.column(name), level));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Anonymize

AnonymizationResult Anonymize(const DataTable& table, const AttributeSchema& schema,
                              const HierarchySet& hierarchies, const AnonymizeOptions& options) {
  if (options.k == 0 || options.k > table.rows()) {
    throw Error(ErrorCode::kInvalidK, "k = " + std::to_string(options.k) + " with " +
                                          std::to_string(table.rows()) + " rows");
  }
  const std::size_t k = options.k_plus_one ? options.k + 1 : options.k;
  const QiColumns q = ResolveQis(table, schema, hierarchies);
  const std::size_t n = table.rows();
  const std::size_t num_qi = q.names.size();

  // codes[a][level]
  std::vector<std::vector<std::vector<std::int32_t>>> codes(num_qi);
  std::vector<int> top(num_qi);
  for (std::size_t a = 0; a < num_qi; ++a) {
    top[a] = q.hierarchies[a]->top_level();
    codes[a].resize(static_cast<std::size_t>(top[a]) + 1);
    codes[a][0] = LevelCodes(*q.columns[a], *q.hierarchies[a], 0);
  }
  auto codes_at = [&](std::size_t a, int level) -> const std::vector<std::int32_t>& {
    auto& slot = codes[a][static_cast<std::size_t>(level)];
    if (slot.empty() && n > 0) slot = LevelCodes(*q.columns[a], *q.hierarchies[a], level);
    return slot;
  };
  struct Counts {
    std::size_t violating = 0;
    std::int32_t classes = 0;
  };
  auto evaluate = [&](const std::vector<int>& levels, std::vector<bool>* mark) {
    std::vector<const std::vector<std::int32_t>*> ptrs;
    for (std::size_t a = 0; a < num_qi; ++a) ptrs.push_back(&codes_at(a, levels[a]));
    Counts c;
    const auto ids = ClassIds(ptrs, n, &c.classes);
    const auto sizes = ClassSizes(ids, c.classes);
    if (mark) mark->assign(n, false);
    for (std::size_t r = 0; r < n; ++r) {
      if (sizes[static_cast<std::size_t>(ids[r])] < k) {
        ++c.violating;
        if (mark) (*mark)[r] = true;
      }
    }
    return c;
  };

  // Cells that would be suppressed in a state: every cell of a violating
  // record plus every surviving cell of an attribute at its root.
  const auto cols = static_cast<double>(table.cols());
  auto cost = [&](const std::vector<int>& lv, std::size_t viol) {
    std::size_t at_root = 0;
    for (std::size_t a = 0; a < num_qi; ++a) at_root += lv[a] >= top[a] ? 1 : 0;
    return static_cast<double>(viol) * cols + static_cast<double>(n - viol) * static_cast<double>(at_root);
  };
  const auto budget = static_cast<double>(n) * options.max_record_suppression;

  // Greedy path: raise the attribute whose next level leaves the fewest
  // violating rows among steps that lower the cost. With no such step, take
  // the fewest violators then fewest classes. Walk until nothing violates or
  // everything is at the root, then keep the cheapest state on the path whose
  // violators fit the record budget.
  std::vector<int> levels(num_qi, 0);
  Counts current = evaluate(levels, nullptr);
  std::optional<std::vector<int>> best_levels;
  double best_cost = 0.0;
  auto consider = [&](const std::vector<int>& lv, const Counts& c) {
    if (static_cast<double>(c.violating) > budget) return;
    const double value = cost(lv, c.violating);
    if (!best_levels || value < best_cost) {
      best_levels = lv;
      best_cost = value;
    }
  };
  consider(levels, current);
  while (current.violating > 0) {
    const double here = cost(levels, current.violating);
    std::size_t best_attr = num_qi;
    std::size_t fallback_attr = num_qi;
    Counts best{n + 1, 0};
    Counts fallback{n + 1, std::numeric_limits<std::int32_t>::max()};
    for (std::size_t a = 0; a < num_qi; ++a) {
      if (levels[a] >= top[a]) continue;
      auto trial = levels;
      ++trial[a];
      const Counts c = evaluate(trial, nullptr);
      if (c.violating < best.violating && cost(trial, c.violating) < here) {
        best = c;
        best_attr = a;
      }
      if (std::pair(c.violating, c.classes) < std::pair(fallback.violating, fallback.classes)) {
        fallback = c;
        fallback_attr = a;
      }
    }
    if (best_attr == num_qi) {
      best_attr = fallback_attr;
      best = fallback;
    }
    if (best_attr == num_qi) break;
    ++levels[best_attr];
    current = best;
    consider(levels, current);
  }
  if (!best_levels) {
    throw Error(ErrorCode::kBudgetExceeded,
                std::to_string(current.violating) + " of " + std::to_string(n) +
                    " records violate k with every attribute fully generalized");
  }
  levels = *best_levels;

  std::vector<bool> suppressed;
  evaluate(levels, &suppressed);
  std::vector<std::size_t> kept;
  kept.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    if (!suppressed[r]) kept.push_back(r);
  }

  GeneralizationState state;
  for (std::size_t a = 0; a < num_qi; ++a) state.set(q.names[a], levels[a]);

  AnonymizationResult result;
  result.table = ApplyGeneralization(table.SelectRows(kept), schema, hierarchies, state);

  std::vector<std::string> ident;
  for (const auto& name : schema.NamesWithRole(AttributeRole::kIdentifying)) {
    if (table.IndexOf(name)) ident.push_back(name);
  }
  AttributeSchema out_schema = schema.Without(ident);
  for (std::size_t a = 0; a < num_qi; ++a) {
    if (levels[a] > 0) out_schema = out_schema.WithKind(q.names[a], ColumnKind::kCategorical);
  }
  result.schema = std::move(out_schema);

  auto& report = result.report;
  report.requested_k = options.k;
  report.effective_k = k;
  report.state = state;
  report.original_rows = n;
  report.original_cols = table.cols();
  report.suppressed_records = n - kept.size();
  report.removed_identifying = ident;
  report.kept_rows = std::move(kept);
  if (result.table.rows() > 0) {
    report.achieved_min_class_size =
        VerifyK(result.table, GeneralizationState::Zero(result.schema), result.schema, hierarchies, k)
            .min_class_size;
  }
  report.suppressed_cell_fraction = SuppressionRatio(table, result.table, report, hierarchies);
  return result;
}

double SuppressionRatio(const DataTable& original, const DataTable& anonymized,
                        const AnonymizationReport& report, const HierarchySet& hierarchies) {
  const double total = static_cast<double>(original.rows()) * static_cast<double>(original.cols());
  if (total == 0.0) return 0.0;
  double suppressed = static_cast<double>(report.suppressed_records) * static_cast<double>(original.cols());
  suppressed += static_cast<double>(anonymized.rows()) * static_cast<double>(report.removed_identifying.size());
  for (const auto& col : anonymized.columns()) {
    auto h = hierarchies.find(col.name());
    if (h == hierarchies.end() || col.kind() != ColumnKind::kCategorical) continue;
    const std::string root = h->second.root();
    for (std::size_t r = 0; r < col.size(); ++r) {
      if (col.label(r) == root) suppressed += 1.0;
    }
  }
  return std::min(1.0, suppressed / total);
}

nlohmann::json AnonymizationReport::ToJson() const {
  return {{"requested_k", requested_k},
          {"effective_k", effective_k},
          {"achieved_min_class_size", achieved_min_class_size},
          {"generalization", state.ToJson()},
          {"original_rows", original_rows},
          {"original_cols", original_cols},
          {"suppressed_records", suppressed_records},
          {"removed_identifying", removed_identifying},
          {"suppressed_cell_fraction", suppressed_cell_fraction}};
}

}  // namespace petbench
