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

#include "petbench/harness.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "petbench/datasets.h"
#include "petbench/energy.h"
#include "petbench/error.h"
#include "petbench/synthesis.h"

namespace petbench {

namespace fs = std::filesystem;

Treatment Treatment::Parse(std::string_view key) {
  Treatment t;
  if (key == "benchmark") return t;
  if (key == "synthetic") {
    t.kind = Kind::kSynthetic;
    return t;
  }
  constexpr std::string_view kPrefix = "kanon:";
  if (key.substr(0, kPrefix.size()) == kPrefix) {
    const auto digits = key.substr(kPrefix.size());
    std::size_t k = 0;
    const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec == std::errc() && end == digits.data() + digits.size() && k >= 1) {
      t.kind = Kind::kKAnon;
      t.k = k;
      return t;
    }
  }
  throw Error(ErrorCode::kConfig,
              "unknown treatment '" + std::string(key) + "' (use benchmark, kanon:<k> or synthetic)");
}

std::string Treatment::Key() const {
  switch (kind) {
    case Kind::kBenchmark: return "benchmark";
    case Kind::kKAnon: return "kanon:" + std::to_string(k);
    case Kind::kSynthetic: return "synthetic";
  }
  return "";
}

std::string Treatment::DisplayName() const {
  switch (kind) {
    case Kind::kBenchmark: return "Benchmark";
    case Kind::kKAnon: return "k=" + std::to_string(k);
    case Kind::kSynthetic: return "Synthetic";
  }
  return "";
}

bool TreatmentLess(const std::string& a, const std::string& b) {
  auto order = [](const std::string& key) {
    try {
      const Treatment t = Treatment::Parse(key);
      return std::tuple(static_cast<int>(t.kind), t.k, std::string());
    } catch (const Error&) {
      return std::tuple(3, std::size_t{0}, key);
    }
  };
  return order(a) < order(b);
}

std::uint64_t DeriveSeed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t s = mix(master);
  for (auto p : path) s = mix(s ^ mix(p + 1));
  return s;
}

namespace {

nlohmann::json TrainConfigJson(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"epochs", c.epochs}, {"batch_size", c.batch_size},
          {"seed", c.seed}, {"l2", c.l2}};
}

TrainConfig TrainConfigFrom(const nlohmann::json& j, TrainConfig c) {
  for (const auto& [k, v] : j.items()) {
    if (k == "learning_rate") c.learning_rate = v.get<double>();
    else if (k == "epochs") c.epochs = v.get<int>();
    else if (k == "batch_size") c.batch_size = v.get<std::size_t>();
    else if (k == "seed") c.seed = v.get<std::uint64_t>();
    else if (k == "l2") c.l2 = v.get<double>();
    else if (k != "hidden_width") throw Error(ErrorCode::kConfig, "unknown training key '" + k + "'");
  }
  return c;
}

std::map<std::string, std::string> PathMapJson(const std::map<std::string, fs::path>& m) {
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : m) out[k] = v.string();
  return out;
}

}  // namespace

void ExperimentConfig::Validate() const {
  if (datasets.empty()) throw Error(ErrorCode::kConfig, "datasets must not be empty");
  for (const auto& d : datasets) FindDataset(d);
  if (repetitions < 1) throw Error(ErrorCode::kConfig, "repetitions must be >= 1");
  if (treatments.empty()) throw Error(ErrorCode::kConfig, "treatments must not be empty");
  std::set<std::string> seen;
  bool has_benchmark = false;
  for (const auto& t : treatments) {
    const Treatment parsed = Treatment::Parse(t);
    if (parsed.kind == Treatment::Kind::kBenchmark) has_benchmark = true;
    if (!seen.insert(parsed.Key()).second) throw Error(ErrorCode::kConfig, "duplicate treatment " + t);
    privacy.Rank(parsed.Key());
  }
  if (!has_benchmark) throw Error(ErrorCode::kConfig, "treatments must include benchmark");
  if (models.empty()) throw Error(ErrorCode::kConfig, "models must not be empty");
  for (const auto& m : models) {
    if (m != kModelKnn && m != kModelLogReg && m != kModelNn) {
      throw Error(ErrorCode::kConfig, "unknown model '" + m + "' (use knn, logreg or nn)");
    }
  }
  if (meter != "sysfs" && meter != "simulated") throw Error(ErrorCode::kConfig, "meter must be sysfs or simulated");
  if (clock != "steady" && clock != "virtual") throw Error(ErrorCode::kConfig, "clock must be steady or virtual");
  if (clock == "virtual" && meter != "simulated") {
    throw Error(ErrorCode::kConfig, "the virtual clock only drives the simulated meter");
  }
  if (!(simulated_watts >= 0.0)) throw Error(ErrorCode::kConfig, "simulated_watts must be >= 0");
  if (!(idle_seconds >= 1.0)) throw Error(ErrorCode::kConfig, "idle_seconds must be >= 1");
  if (!(split.train_fraction > 0.0 && split.train_fraction < 1.0)) {
    throw Error(ErrorCode::kConfig, "split.train_fraction must be in (0, 1)");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::kConfig, "alpha must be in (0, 1)");
  if (neighbours < 1) throw Error(ErrorCode::kConfig, "knn neighbours must be >= 1");
  if (hidden_width < 1) throw Error(ErrorCode::kConfig, "nn hidden_width must be >= 1");
  try {
    logreg.Validate();
    nn.Validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, e.what());
  }
}

nlohmann::json ExperimentConfig::ToJson() const {
  auto nn_json = TrainConfigJson(nn);
  nn_json["hidden_width"] = hidden_width;
  return {{"datasets", datasets},
          {"treatments", treatments},
          {"models", models},
          {"repetitions", repetitions},
          {"master_seed", master_seed},
          {"meter", meter},
          {"clock", clock},
          {"simulated_watts", simulated_watts},
          {"idle_seconds", idle_seconds},
          {"split", {{"train_fraction", split.train_fraction}, {"seed", split.seed}}},
          {"max_rows", max_rows ? nlohmann::json(*max_rows) : nlohmann::json(nullptr)},
          {"data_dir", data_dir.string()},
          {"schemas", PathMapJson(schemas)},
          {"hierarchies", PathMapJson(hierarchies)},
          {"output_dir", output_dir.string()},
          {"alpha", alpha},
          {"anonymize", {{"max_record_suppression", max_record_suppression}, {"k_plus_one", k_plus_one}}},
          {"knn", {{"neighbours", neighbours}}},
          {"logreg", TrainConfigJson(logreg)},
          {"nn", nn_json},
          {"privacy_scale", privacy.ToJson()}};
}

ExperimentConfig ExperimentConfig::FromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kConfig, "experiment config must be a JSON object");
  ExperimentConfig c;
  try {
    for (const auto& [k, v] : j.items()) {
      if (k == "dataset") c.datasets = {v.get<std::string>()};
      else if (k == "datasets") c.datasets = v.get<std::vector<std::string>>();
      else if (k == "treatments") c.treatments = v.get<std::vector<std::string>>();
      else if (k == "models") c.models = v.get<std::vector<std::string>>();
      else if (k == "repetitions") c.repetitions = v.get<int>();
      else if (k == "master_seed") c.master_seed = v.get<std::uint64_t>();
      else if (k == "meter") c.meter = v.get<std::string>();
      else if (k == "clock") c.clock = v.get<std::string>();
      else if (k == "simulated_watts") c.simulated_watts = v.get<double>();
      else if (k == "idle_seconds") c.idle_seconds = v.get<double>();
      else if (k == "split") {
        c.split.train_fraction = v.value("train_fraction", c.split.train_fraction);
        c.split.seed = v.value("seed", c.split.seed);
      } else if (k == "max_rows") {
        if (!v.is_null()) c.max_rows = v.get<std::size_t>();
      } else if (k == "data_dir") c.data_dir = v.get<std::string>();
      else if (k == "schemas") {
        for (const auto& [d, p] : v.items()) c.schemas[d] = p.get<std::string>();
      } else if (k == "hierarchies") {
        for (const auto& [d, p] : v.items()) c.hierarchies[d] = p.get<std::string>();
      } else if (k == "output_dir") c.output_dir = v.get<std::string>();
      else if (k == "alpha") c.alpha = v.get<double>();
      else if (k == "anonymize") {
        c.max_record_suppression = v.value("max_record_suppression", c.max_record_suppression);
        c.k_plus_one = v.value("k_plus_one", c.k_plus_one);
      } else if (k == "knn") c.neighbours = v.value("neighbours", c.neighbours);
      else if (k == "logreg") c.logreg = TrainConfigFrom(v, c.logreg);
      else if (k == "nn") {
        c.nn = TrainConfigFrom(v, c.nn);
        c.hidden_width = v.value("hidden_width", c.hidden_width);
      } else if (k == "privacy_scale") c.privacy = PrivacyScale::FromJson(v);
      else throw Error(ErrorCode::kConfig, "unknown config key '" + k + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("bad config value: ") + e.what());
  }
  c.Validate();
  return c;
}

ExperimentConfig ExperimentConfig::Load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, path.string() + ": " + e.what());
  }
  ExperimentConfig c = FromJson(j);
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  auto resolve = [&](fs::path& p) {
    if (!p.empty() && p.is_relative()) p = (base / p).lexically_normal();
  };
  resolve(c.data_dir);
  resolve(c.output_dir);
  for (auto& [d, p] : c.schemas) resolve(p);
  for (auto& [d, p] : c.hierarchies) resolve(p);
  return c;
}

std::string ExperimentConfig::Hash() const {
  auto j = ToJson();
  j.erase("output_dir");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

namespace {

// Operation counts behind the virtual clock; one op per nanosecond.
constexpr double kVirtualOpsPerSecond = 1e9;

struct Cell {
  DataTable train;
  AttributeSchema schema;
  DataTable test;
};

struct Trained {
  Encoder encoder;
  std::optional<KnnModel> knn;
  std::optional<LogRegModel> logreg;
  std::optional<NnModel> nn;
  std::size_t rows = 0;
  std::size_t width = 0;
};

class Runner {
 public:
  Runner(const ExperimentConfig& cfg, const RunOptions& options)
      : cfg_(cfg), options_(options), hash_(cfg.Hash()), writer_(PrepareLog(cfg, options, hash_)) {
    if (cfg.meter == "simulated") {
      SimulatedBackend sim;
      sim.watts = cfg.simulated_watts;
      if (cfg.clock == "virtual") {
        virtual_clock_ = std::make_shared<VirtualClock>();
        sim.clock = virtual_clock_;
      }
      meter_.emplace(Meter::Open(sim));
    } else {
      meter_.emplace(Meter::Open(PowercapBackend{DefaultPowercapRoot()}));
    }
    baseline_ = meter_->MeasureIdle(cfg.idle_seconds);
  }

  RunLog Run() {
    for (std::size_t di = 0; di < cfg_.datasets.size(); ++di) {
      for (int rep = 0; rep < cfg_.repetitions; ++rep) {
        for (std::size_t ti = 0; ti < cfg_.treatments.size(); ++ti) RunTreatment(di, ti, rep);
      }
    }
    return std::move(log_);
  }

 private:
  static fs::path PrepareLog(const ExperimentConfig& cfg, const RunOptions& options, const std::string& hash) {
    const fs::path path = cfg.LogPath();
    if (fs::exists(path)) {
      const RunLog existing = ReadRunLog(path);
      const bool clash = std::any_of(existing.begin(), existing.end(),
                                     [&](const RunRecord& r) { return r.config_hash == hash; });
      if (clash && !options.overwrite) {
        throw Error(ErrorCode::kPrecondition,
                    path.string() + " already holds runs of config " + hash + " (pass --overwrite to replace it)");
      }
      if (clash) fs::remove(path);
    }
    return path;
  }

  void Charge(double ops) {
    if (virtual_clock_) virtual_clock_->Advance(ops / kVirtualOpsPerSecond);
  }

  RunRecord Base(std::size_t di, std::size_t ti, const std::string& model, int rep, std::string_view phase) const {
    RunRecord r;
    r.dataset = cfg_.datasets[di];
    r.treatment = Treatment::Parse(cfg_.treatments[ti]).Key();
    r.model = model;
    r.repetition = rep;
    r.phase = std::string(phase);
    r.config_hash = hash_;
    return r;
  }

  void Emit(RunRecord r) {
    writer_.Append(r);
    if (options_.on_record) options_.on_record(r);
    log_.push_back(std::move(r));
  }

  // Runs `work` under the meter and fills the energy fields of `r`. Returns
  // false and marks `r` as failed when `work` throws.
  bool Metered(RunRecord& r, const std::function<void()>& work) {
    try {
      const EnergySample raw = meter_->Measure(r.phase, work);
      const EnergySample adjusted = Adjust(raw, baseline_);
      r.duration_s = raw.duration_s;
      r.joules_raw = raw.joules;
      r.joules_adjusted = adjusted.EffectiveJoules();
      r.t_start = raw.start_s;
      r.t_end = raw.start_s + raw.duration_s;
      return true;
    } catch (const std::exception& e) {
      r.status = "error";
      r.error = e.what();
      return false;
    }
  }

  void Skip(std::size_t di, std::size_t ti, int rep, std::string_view from_phase, const std::string& why) {
    const bool after_prepare = from_phase == kPhasePrepare;
    if (after_prepare) {
      RunRecord r = Base(di, ti, "", rep, kPhaseTreat);
      r.status = "skipped";
      r.error = why;
      Emit(std::move(r));
    }
    for (const auto& m : cfg_.models) {
      for (auto phase : {kPhaseTrain, kPhaseEvaluate}) {
        RunRecord r = Base(di, ti, m, rep, phase);
        r.status = "skipped";
        r.error = why;
        Emit(std::move(r));
      }
    }
  }

  void RunTreatment(std::size_t di, std::size_t ti, int rep) {
    const std::string& dataset = cfg_.datasets[di];
    const DatasetInfo& info = FindDataset(dataset);
    const Treatment treatment = Treatment::Parse(cfg_.treatments[ti]);

    PreparedData prep;
    RunRecord pr = Base(di, ti, "", rep, kPhasePrepare);
    const bool prepared = Metered(pr, [&] {
      PrepareOptions po;
      po.data_dir = cfg_.data_dir;
      if (auto it = cfg_.schemas.find(dataset); it != cfg_.schemas.end()) po.schema_path = it->second;
      po.split = cfg_.split;
      po.max_rows = cfg_.max_rows;
      prep = PrepareDataset(dataset, po);
      Charge(200.0 * static_cast<double>(prep.raw_rows * prep.schema.columns().size()));
    });
    if (prepared) {
      pr.extra = {{"idle_watts", baseline_.watts},
                  {"train_rows", prep.train.rows()},
                  {"test_rows", prep.test.rows()}};
    }
    Emit(pr);
    if (!prepared) {
      Skip(di, ti, rep, kPhasePrepare, "prepare failed");
      return;
    }

    Cell cell;
    RunRecord tr = Base(di, ti, "", rep, kPhaseTreat);
    std::optional<AnonymizationReport> anon_report;
    const std::uint64_t treat_seed = DeriveSeed(cfg_.master_seed, {di, ti, static_cast<std::uint64_t>(rep), 1});
    const bool treated = Metered(tr, [&] {
      const double rows = static_cast<double>(prep.train.rows());
      const double cols = static_cast<double>(prep.train.cols());
      switch (treatment.kind) {
        case Treatment::Kind::kBenchmark:
          cell = {prep.train, prep.schema, prep.test};
          Charge(rows * cols);
          break;
        case Treatment::Kind::kKAnon: {
          const fs::path hpath = cfg_.hierarchies.contains(dataset) ? cfg_.hierarchies.at(dataset)
                                                                     : DefaultHierarchyPath(info);
          const HierarchySet h = LoadHierarchies(hpath, prep.train);
          AnonymizeOptions ao;
          ao.k = treatment.k;
          ao.max_record_suppression = cfg_.max_record_suppression;
          ao.k_plus_one = cfg_.k_plus_one;
          AnonymizationResult res = Anonymize(prep.train, prep.schema, h, ao);
          DataTable test = ApplyGeneralization(prep.test, prep.schema, h, res.report.state);
          anon_report = res.report;
          cell = {std::move(res.table), std::move(res.schema), std::move(test)};
          const double qis = static_cast<double>(prep.schema.NamesWithRole(AttributeRole::kQuasiIdentifying).size());
          Charge(400.0 * rows * qis);
          break;
        }
        case Treatment::Kind::kSynthetic: {
          const CopulaModel model = FitCopula(prep.train);
          cell = {SampleCopula(model, prep.train.rows(), treat_seed), prep.schema, prep.test};
          Charge(20.0 * rows * cols * cols + 50.0 * rows * cols);
          break;
        }
      }
    });
    if (treated) {
      tr.extra["rows_out"] = cell.train.rows();
      if (anon_report) {
        tr.extra["k"] = anon_report->requested_k;
        tr.extra["suppressed_cell_fraction"] = anon_report->suppressed_cell_fraction;
        tr.extra["suppressed_records"] = anon_report->suppressed_records;
        tr.extra["achieved_min_class_size"] = anon_report->achieved_min_class_size;
        tr.extra["levels"] = anon_report->state.ToJson();
      }
      if (treatment.kind == Treatment::Kind::kSynthetic) {
        tr.extra["seed"] = treat_seed;
        tr.extra["exact_match_rate"] = CompareUtility(prep.train, cell.train).exact_match_rate;
      }
    }
    Emit(tr);
    if (!treated) {
      Skip(di, ti, rep, kPhaseTreat, "treat failed");
      return;
    }

    for (std::size_t mi = 0; mi < cfg_.models.size(); ++mi) RunModel(di, ti, mi, rep, cell);
  }

  void RunModel(std::size_t di, std::size_t ti, std::size_t mi, int rep, const Cell& cell) {
    const std::string& model = cfg_.models[mi];
    const double h = static_cast<double>(cfg_.hidden_width);
    std::optional<Trained> trained;
    RunRecord tr = Base(di, ti, model, rep, kPhaseTrain);
    const bool ok = Metered(tr, [&] {
      Trained t{Encoder::Fit(cell.train, cell.schema), {}, {}, {}, 0, 0};
      const EncodedMatrix m = t.encoder.Transform(cell.train);
      t.rows = static_cast<std::size_t>(m.features.rows());
      t.width = static_cast<std::size_t>(m.features.cols());
      const double n = static_cast<double>(t.rows), d = static_cast<double>(t.width);
      Charge(2.0 * n * d);
      if (model == kModelKnn) {
        t.knn = KnnModel::Fit(m.features, m.labels, cfg_.neighbours);
        Charge(n * d);
      } else if (model == kModelLogReg) {
        t.logreg = TrainLogReg(m.features, m.labels, cfg_.logreg);
        Charge(4.0 * cfg_.logreg.epochs * n * d);
      } else {
        TrainConfig nc = cfg_.nn;
        nc.seed = DeriveSeed(cfg_.master_seed, {di, ti, mi, static_cast<std::uint64_t>(rep), 2});
        t.nn = TrainNn(m.features, m.labels, nc, cfg_.hidden_width);
        Charge(nc.epochs * n * (6.0 * d * h + 6.0 * h));
      }
      trained = std::move(t);
    });
    if (ok) tr.extra = {{"rows", trained->rows}, {"features", trained->width}};
    Emit(tr);
    if (!ok) {
      RunRecord ev = Base(di, ti, model, rep, kPhaseEvaluate);
      ev.status = "skipped";
      ev.error = "train failed";
      Emit(std::move(ev));
      return;
    }

    RunRecord ev = Base(di, ti, model, rep, kPhaseEvaluate);
    EvalResult result;
    const bool evaluated = Metered(ev, [&] {
      const EncodedMatrix m = trained->encoder.Transform(cell.test);
      const double n = static_cast<double>(m.features.rows()), d = static_cast<double>(m.features.cols());
      Charge(2.0 * n * d);
      Labels pred;
      if (trained->knn) {
        pred = trained->knn->Predict(m.features);
        Charge(3.0 * n * static_cast<double>(trained->rows) * d);
      } else if (trained->logreg) {
        pred = trained->logreg->Predict(m.features);
        Charge(2.0 * n * d);
      } else {
        pred = trained->nn->Predict(m.features);
        Charge(2.0 * n * d * h);
      }
      result = Accuracy(pred, m.labels);
    });
    if (evaluated) {
      ev.accuracy = result.accuracy;
      ev.extra = {{"correct", result.correct}, {"total", result.total}};
    }
    Emit(std::move(ev));
  }

  const ExperimentConfig& cfg_;
  const RunOptions& options_;
  std::string hash_;
  RunLogWriter writer_;
  std::shared_ptr<VirtualClock> virtual_clock_;
  std::optional<Meter> meter_;
  IdleBaseline baseline_;
  RunLog log_;
};

}  // namespace

RunLog RunExperiment(const ExperimentConfig& cfg, const RunOptions& options) {
  cfg.Validate();
  Runner runner(cfg, options);
  return runner.Run();
}

}  // namespace petbench
