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

#include "petbench/report.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <tuple>

#include <fmt/format.h>

#include "petbench/error.h"
#include "petbench/harness.h"

namespace petbench {

namespace {

struct RepTotals {
  double duration = 0.0;
  double joules = 0.0;
  double joules_adjusted = 0.0;
  std::optional<double> accuracy;
};

using CellKey = std::tuple<std::string, std::string, std::string>;  // dataset, model, treatment

struct Grouped {
  std::vector<std::string> datasets;
  std::vector<std::string> models;
  std::map<CellKey, std::map<int, RepTotals>> cells;
};

void AddUnique(std::vector<std::string>& v, const std::string& s) {
  if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
}

int ModelOrder(const std::string& m) {
  if (m == kModelKnn) return 0;
  if (m == kModelLogReg) return 1;
  if (m == kModelNn) return 2;
  return 3;
}

// Only repetitions whose evaluate phase succeeded contribute.
Grouped Group(std::span<const RunRecord> log) {
  Grouped g;
  std::map<CellKey, std::map<int, RepTotals>> partial;
  for (const auto& r : log) {
    if (!r.ok() || r.model.empty()) continue;
    if (r.phase != kPhaseTrain && r.phase != kPhaseEvaluate) continue;
    auto& t = partial[{r.dataset, r.model, r.treatment}][r.repetition];
    t.duration += r.duration_s;
    t.joules += r.joules_raw;
    t.joules_adjusted += r.joules_adjusted;
    if (r.phase == kPhaseEvaluate) t.accuracy = r.accuracy;
    AddUnique(g.datasets, r.dataset);
    AddUnique(g.models, r.model);
  }
  for (auto& [key, reps] : partial) {
    for (auto& [rep, t] : reps)
      if (t.accuracy) g.cells[key][rep] = t;
  }
  std::stable_sort(g.models.begin(), g.models.end(),
                   [](const auto& a, const auto& b) { return ModelOrder(a) < ModelOrder(b); });
  return g;
}

std::vector<std::string> TreatmentsOf(const Grouped& g, const std::string& dataset, const std::string& model) {
  std::vector<std::string> out;
  for (const auto& [key, reps] : g.cells) {
    if (std::get<0>(key) == dataset && std::get<1>(key) == model) out.push_back(std::get<2>(key));
  }
  std::sort(out.begin(), out.end(), TreatmentLess);
  return out;
}

std::string Display(const std::string& key) {
  try {
    return Treatment::Parse(key).DisplayName();
  } catch (const Error&) {
    return key;
  }
}

long Percent(double value, double base) {
  if (base == 0.0) return 0;
  return std::lround((value - base) / base * 100.0);
}

std::string Signed(long pct) { return pct > 0 ? fmt::format("+{}%", pct) : fmt::format("{}%", pct); }

std::string FormatP(double p) {
  if (p < 0.01) return "<0.01";
  if (p > 0.99) return ">0.99";
  return fmt::format("{:.2f}", p);
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::vector<DeviationRow> DeviationTable(std::span<const RunRecord> log) {
  const Grouped g = Group(log);
  std::vector<DeviationRow> out;
  for (const auto& dataset : g.datasets) {
    for (const auto& model : g.models) {
      const auto treatments = TreatmentsOf(g, dataset, model);
      if (treatments.empty()) continue;
      auto bench = g.cells.find({dataset, model, "benchmark"});
      if (bench == g.cells.end()) {
        throw Error(ErrorCode::kMissingBenchmark, "no benchmark runs for " + dataset + "/" + model);
      }
      auto means = [](const std::map<int, RepTotals>& reps) {
        double d = 0.0, j = 0.0, ja = 0.0;
        for (const auto& [rep, t] : reps) {
          d += t.duration;
          j += t.joules;
          ja += t.joules_adjusted;
        }
        const double n = static_cast<double>(reps.size());
        return std::tuple(d / n, j / n, ja / n);
      };
      const auto bench_means = means(bench->second);
      const double bd = std::get<0>(bench_means), bj = std::get<1>(bench_means);
      for (const auto& treatment : treatments) {
        const auto& reps = g.cells.at({dataset, model, treatment});
        DeviationRow row;
        row.dataset = dataset;
        row.model = model;
        row.treatment = treatment;
        row.repetitions = reps.size();
        std::tie(row.mean_duration_s, row.mean_joules, row.mean_joules_adjusted) = means(reps);
        row.duration_pct = Percent(row.mean_duration_s, bd);
        row.joules_pct = Percent(row.mean_joules, bj);
        out.push_back(std::move(row));
      }
    }
  }
  return out;
}

std::vector<TreatRow> TreatTable(std::span<const RunRecord> log) {
  std::vector<std::string> datasets;
  std::map<std::pair<std::string, std::string>, std::vector<const RunRecord*>> by;
  for (const auto& r : log) {
    if (!r.ok() || r.phase != kPhaseTreat) continue;
    AddUnique(datasets, r.dataset);
    by[{r.dataset, r.treatment}].push_back(&r);
  }
  std::vector<TreatRow> out;
  for (const auto& dataset : datasets) {
    std::vector<std::string> treatments;
    for (const auto& [key, recs] : by)
      if (key.first == dataset) treatments.push_back(key.second);
    std::sort(treatments.begin(), treatments.end(), TreatmentLess);
    for (const auto& t : treatments) {
      const auto& recs = by.at({dataset, t});
      TreatRow row;
      row.dataset = dataset;
      row.treatment = t;
      row.repetitions = recs.size();
      for (const auto* r : recs) {
        row.mean_duration_s += r->duration_s;
        row.mean_joules += r->joules_raw;
      }
      row.mean_duration_s /= static_cast<double>(recs.size());
      row.mean_joules /= static_cast<double>(recs.size());
      out.push_back(std::move(row));
    }
  }
  return out;
}

UTestBlock UTestMatrix(std::span<const RunRecord> log, const std::string& dataset, const std::string& model) {
  const Grouped g = Group(log);
  const auto treatments = TreatmentsOf(g, dataset, model);
  if (treatments.size() < 2) {
    throw Error(ErrorCode::kPrecondition, "U-test matrix needs at least 2 treatments for " + dataset + "/" + model);
  }
  std::vector<LabeledSample> groups;
  for (const auto& t : treatments) {
    LabeledSample s;
    s.label = t;
    for (const auto& [rep, tot] : g.cells.at({dataset, model, t})) s.values.push_back(tot.joules);
    if (s.values.size() < 2) {
      throw Error(ErrorCode::kPrecondition, "U-test matrix needs at least 2 repetitions of " + t);
    }
    groups.push_back(std::move(s));
  }
  const PValueMatrix m = PairwiseMatrix(groups, Alternative::kGreater);
  return {dataset, model, m.labels, m.p};
}

std::vector<AccuracyRow> AccuracyTable(std::span<const RunRecord> log) {
  const Grouped g = Group(log);
  std::vector<AccuracyRow> out;
  for (const auto& dataset : g.datasets) {
    std::vector<std::string> treatments;
    for (const auto& model : g.models)
      for (const auto& t : TreatmentsOf(g, dataset, model)) AddUnique(treatments, t);
    std::sort(treatments.begin(), treatments.end(), TreatmentLess);
    for (const auto& t : treatments) {
      for (const auto& model : g.models) {
        auto it = g.cells.find({dataset, model, t});
        if (it == g.cells.end()) continue;
        AccuracyRow row{dataset, t, model, it->second.size(), 0.0};
        for (const auto& [rep, tot] : it->second) row.mean_accuracy += *tot.accuracy;
        row.mean_accuracy /= static_cast<double>(it->second.size());
        out.push_back(std::move(row));
      }
    }
  }
  return out;
}

std::vector<SuppressionRow> SuppressionTable(std::span<const RunRecord> log) {
  std::vector<std::string> datasets;
  std::map<std::pair<std::string, std::size_t>, std::pair<double, std::size_t>> acc;
  for (const auto& r : log) {
    if (!r.ok() || r.phase != kPhaseTreat || !r.extra.contains("suppressed_cell_fraction")) continue;
    AddUnique(datasets, r.dataset);
    auto& a = acc[{r.dataset, r.extra.at("k").get<std::size_t>()}];
    a.first += r.extra.at("suppressed_cell_fraction").get<double>();
    a.second += 1;
  }
  std::vector<SuppressionRow> out;
  for (const auto& dataset : datasets) {
    for (const auto& [key, a] : acc) {
      if (key.first != dataset) continue;
      out.push_back({dataset, key.second, 100.0 * a.first / static_cast<double>(a.second)});
    }
  }
  return out;
}

ReportTables BuildReport(std::span<const RunRecord> log, double alpha) {
  ReportTables t;
  t.alpha = alpha;
  t.accuracy = AccuracyTable(log);
  if (t.accuracy.empty()) throw Error(ErrorCode::kEmptyLog, "log has no successful evaluate records");
  t.deviation = DeviationTable(log);
  t.treat = TreatTable(log);
  t.suppression = SuppressionTable(log);
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& row : t.deviation) {
    std::pair<std::string, std::string> key{row.dataset, row.model};
    if (std::find(pairs.begin(), pairs.end(), key) == pairs.end()) pairs.push_back(key);
  }
  for (const auto& [dataset, model] : pairs) {
    try {
      t.utest.push_back(UTestMatrix(log, dataset, model));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kPrecondition) throw;
    }
  }
  return t;
}

nlohmann::json ReportTables::ToJson() const {
  nlohmann::json j;
  j["alpha"] = alpha;
  auto& dev = j["deviation"] = nlohmann::json::array();
  for (const auto& r : deviation) {
    dev.push_back({{"dataset", r.dataset}, {"model", r.model}, {"treatment", r.treatment},
                   {"repetitions", r.repetitions}, {"mean_duration_s", r.mean_duration_s},
                   {"mean_joules", r.mean_joules}, {"mean_joules_adjusted", r.mean_joules_adjusted},
                   {"duration_pct", r.duration_pct}, {"joules_pct", r.joules_pct}});
  }
  auto& tr = j["treat"] = nlohmann::json::array();
  for (const auto& r : treat) {
    tr.push_back({{"dataset", r.dataset}, {"treatment", r.treatment}, {"repetitions", r.repetitions},
                  {"mean_duration_s", r.mean_duration_s}, {"mean_joules", r.mean_joules}});
  }
  auto& ut = j["utest"] = nlohmann::json::array();
  for (const auto& b : utest) {
    auto rows = nlohmann::json::array();
    for (const auto& row : b.p) {
      auto jr = nlohmann::json::array();
      for (const auto& v : row) jr.push_back(v ? nlohmann::json(*v) : nlohmann::json(nullptr));
      rows.push_back(std::move(jr));
    }
    ut.push_back({{"dataset", b.dataset}, {"model", b.model}, {"treatments", b.treatments}, {"p", rows}});
  }
  auto& ac = j["accuracy"] = nlohmann::json::array();
  for (const auto& r : accuracy) {
    ac.push_back({{"dataset", r.dataset}, {"treatment", r.treatment}, {"model", r.model},
                  {"repetitions", r.repetitions}, {"mean_accuracy", r.mean_accuracy}});
  }
  auto& su = j["suppression"] = nlohmann::json::array();
  for (const auto& r : suppression) su.push_back({{"dataset", r.dataset}, {"k", r.k}, {"percent", r.percent}});
  return j;
}

ReportTables ReportTables::FromJson(const nlohmann::json& j) {
  ReportTables t;
  try {
    t.alpha = j.at("alpha").get<double>();
    for (const auto& r : j.at("deviation")) {
      t.deviation.push_back({r.at("dataset"), r.at("model"), r.at("treatment"), r.at("repetitions"),
                             r.at("mean_duration_s"), r.at("mean_joules"), r.at("mean_joules_adjusted"),
                             r.at("duration_pct"), r.at("joules_pct")});
    }
    for (const auto& r : j.at("treat")) {
      t.treat.push_back({r.at("dataset"), r.at("treatment"), r.at("repetitions"), r.at("mean_duration_s"),
                         r.at("mean_joules")});
    }
    for (const auto& b : j.at("utest")) {
      UTestBlock block{b.at("dataset"), b.at("model"), b.at("treatments").get<std::vector<std::string>>(), {}};
      for (const auto& row : b.at("p")) {
        std::vector<std::optional<double>> r;
        for (const auto& v : row) r.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
        block.p.push_back(std::move(r));
      }
      t.utest.push_back(std::move(block));
    }
    for (const auto& r : j.at("accuracy")) {
      t.accuracy.push_back({r.at("dataset"), r.at("treatment"), r.at("model"), r.at("repetitions"),
                            r.at("mean_accuracy")});
    }
    for (const auto& r : j.at("suppression")) t.suppression.push_back({r.at("dataset"), r.at("k"), r.at("percent")});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("bad report JSON: ") + e.what());
  }
  return t;
}

ReportFormat ParseReportFormat(std::string_view name) {
  if (name == "md" || name == "markdown") return ReportFormat::kMarkdown;
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "json") return ReportFormat::kJson;
  throw Error(ErrorCode::kConfig, "unknown report format '" + std::string(name) + "' (use md, csv or json)");
}

std::string RenderMarkdown(const ReportTables& t) {
  std::string out = "# petbench report\n";
  std::vector<std::string> datasets, models;
  for (const auto& r : t.deviation) {
    AddUnique(datasets, r.dataset);
    AddUnique(models, r.model);
  }
  for (const auto& r : t.accuracy) AddUnique(datasets, r.dataset);

  out += "\n## Train + evaluate cost against Benchmark\n";
  out += "\nBenchmark rows give mean time and raw energy; other rows give the rounded deviation.\n";
  for (const auto& dataset : datasets) {
    std::vector<std::string> treatments;
    for (const auto& r : t.deviation)
      if (r.dataset == dataset) AddUnique(treatments, r.treatment);
    std::sort(treatments.begin(), treatments.end(), TreatmentLess);
    out += fmt::format("\n### {}\n\n| Method |", dataset);
    std::string rule = "|---|";
    for (const auto& m : models) {
      out += fmt::format(" {} time | {} energy |", m, m);
      rule += "---:|---:|";
    }
    out += "\n" + rule + "\n";
    for (const auto& tr : treatments) {
      out += "| " + Display(tr) + " |";
      for (const auto& m : models) {
        auto it = std::find_if(t.deviation.begin(), t.deviation.end(), [&](const DeviationRow& r) {
          return r.dataset == dataset && r.model == m && r.treatment == tr;
        });
        if (it == t.deviation.end()) {
          out += " n/a | n/a |";
        } else if (tr == "benchmark") {
          out += fmt::format(" {:.2f} s | {:.2f} J |", it->mean_duration_s, it->mean_joules);
        } else {
          out += fmt::format(" {} | {} |", Signed(it->duration_pct), Signed(it->joules_pct));
        }
      }
      out += "\n";
    }
  }

  if (!t.treat.empty()) {
    out += "\n## Treat phase cost\n\n| Dataset | Method | Runs | Time | Energy |\n|---|---|---:|---:|---:|\n";
    for (const auto& r : t.treat) {
      out += fmt::format("| {} | {} | {} | {:.2f} s | {:.2f} J |\n", r.dataset, Display(r.treatment), r.repetitions,
                         r.mean_duration_s, r.mean_joules);
    }
  }

  if (!t.utest.empty()) {
    out += fmt::format(
        "\n## Mann-Whitney U on energy\n\nEntry: p-value that the row method uses more energy than the column "
        "method. Significant below {} or above {}.\n",
        t.alpha, 1.0 - t.alpha);
    for (const auto& b : t.utest) {
      out += fmt::format("\n### {} / {}\n\n| |", b.dataset, b.model);
      std::string rule = "|---|";
      for (const auto& c : b.treatments) {
        out += " " + Display(c) + " |";
        rule += "---:|";
      }
      out += "\n" + rule + "\n";
      for (std::size_t i = 0; i < b.treatments.size(); ++i) {
        out += "| " + Display(b.treatments[i]) + " |";
        for (std::size_t j = 0; j < b.treatments.size(); ++j) out += " " + (b.p[i][j] ? FormatP(*b.p[i][j]) : "-") + " |";
        out += "\n";
      }
    }
  }

  out += "\n## Accuracy\n\nMean accuracy over repetitions on the held-out split of the original data.\n";
  for (const auto& dataset : datasets) {
    std::vector<std::string> treatments, acc_models;
    for (const auto& r : t.accuracy) {
      if (r.dataset != dataset) continue;
      AddUnique(treatments, r.treatment);
      AddUnique(acc_models, r.model);
    }
    std::stable_sort(acc_models.begin(), acc_models.end(),
                     [](const auto& a, const auto& b) { return ModelOrder(a) < ModelOrder(b); });
    out += fmt::format("\n### {}\n\n| Method |", dataset);
    std::string rule = "|---|";
    for (const auto& m : acc_models) {
      out += " " + m + " |";
      rule += "---:|";
    }
    out += "\n" + rule + "\n";
    for (const auto& tr : treatments) {
      out += "| " + Display(tr) + " |";
      for (const auto& m : acc_models) {
        auto it = std::find_if(t.accuracy.begin(), t.accuracy.end(), [&](const AccuracyRow& r) {
          return r.dataset == dataset && r.model == m && r.treatment == tr;
        });
        out += it == t.accuracy.end() ? std::string(" n/a |") : fmt::format(" {:.3f} |", it->mean_accuracy);
      }
      out += "\n";
    }
  }

  if (!t.suppression.empty()) {
    std::vector<std::string> sup_datasets;
    std::vector<std::size_t> ks;
    for (const auto& r : t.suppression) {
      AddUnique(sup_datasets, r.dataset);
      if (std::find(ks.begin(), ks.end(), r.k) == ks.end()) ks.push_back(r.k);
    }
    std::sort(ks.begin(), ks.end());
    out += "\n## Suppressed cells\n\nSuppressed cells over all cells of the training split.\n\n| k |";
    std::string rule = "|---:|";
    for (const auto& d : sup_datasets) {
      out += " " + d + " |";
      rule += "---:|";
    }
    out += "\n" + rule + "\n";
    for (auto k : ks) {
      out += fmt::format("| {} |", k);
      for (const auto& d : sup_datasets) {
        auto it = std::find_if(t.suppression.begin(), t.suppression.end(),
                               [&](const SuppressionRow& r) { return r.dataset == d && r.k == k; });
        out += it == t.suppression.end() ? std::string(" n/a |") : fmt::format(" {:.1f}% |", it->percent);
      }
      out += "\n";
    }
  }
  return out;
}

std::string RenderJson(const ReportTables& t) { return t.ToJson().dump(2) + "\n"; }

std::map<std::string, std::string> RenderCsv(const ReportTables& t) {
  std::map<std::string, std::string> files;
  std::string dev =
      "dataset,model,treatment,repetitions,mean_duration_s,mean_joules,mean_joules_adjusted,duration_pct,joules_pct\n";
  for (const auto& r : t.deviation) {
    dev += fmt::format("{},{},{},{},{},{},{},{},{}\n", CsvField(r.dataset), CsvField(r.model), CsvField(r.treatment),
                       r.repetitions, r.mean_duration_s, r.mean_joules, r.mean_joules_adjusted, r.duration_pct,
                       r.joules_pct);
  }
  files["deviation.csv"] = dev;
  std::string tr = "dataset,treatment,repetitions,mean_duration_s,mean_joules\n";
  for (const auto& r : t.treat) {
    tr += fmt::format("{},{},{},{},{}\n", CsvField(r.dataset), CsvField(r.treatment), r.repetitions,
                      r.mean_duration_s, r.mean_joules);
  }
  files["treat.csv"] = tr;
  std::string ut = "dataset,model,row,column,p_greater\n";
  for (const auto& b : t.utest) {
    for (std::size_t i = 0; i < b.treatments.size(); ++i) {
      for (std::size_t j = 0; j < b.treatments.size(); ++j) {
        if (!b.p[i][j]) continue;
        ut += fmt::format("{},{},{},{},{}\n", CsvField(b.dataset), CsvField(b.model), CsvField(b.treatments[i]),
                          CsvField(b.treatments[j]), *b.p[i][j]);
      }
    }
  }
  files["utest.csv"] = ut;
  std::string ac = "dataset,treatment,model,repetitions,mean_accuracy\n";
  for (const auto& r : t.accuracy) {
    ac += fmt::format("{},{},{},{},{}\n", CsvField(r.dataset), CsvField(r.treatment), CsvField(r.model),
                      r.repetitions, r.mean_accuracy);
  }
  files["accuracy.csv"] = ac;
  std::string su = "dataset,k,percent\n";
  for (const auto& r : t.suppression) su += fmt::format("{},{},{}\n", CsvField(r.dataset), r.k, r.percent);
  files["suppression.csv"] = su;
  return files;
}

std::vector<std::filesystem::path> WriteReport(const ReportTables& t, ReportFormat format,
                                               const std::filesystem::path& dir) {
  std::map<std::string, std::string> files;
  switch (format) {
    case ReportFormat::kMarkdown: files["report.md"] = RenderMarkdown(t); break;
    case ReportFormat::kJson: files["report.json"] = RenderJson(t); break;
    case ReportFormat::kCsv: files = RenderCsv(t); break;
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::vector<std::filesystem::path> out;
  for (const auto& [name, body] : files) {
    const auto path = dir / name;
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << body;
    if (!f) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
    out.push_back(path);
  }
  return out;
}

}  // namespace petbench
