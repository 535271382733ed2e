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

#ifndef PETBENCH_ENERGY_H_
#define PETBENCH_ENERGY_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace petbench {

// Time source for a meter. Simulated meters accept an injected clock so runs
// can be replayed bit for bit.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double Now() = 0;  // seconds
  virtual void SleepFor(double seconds) = 0;
};

class SteadyClock final : public Clock {
 public:
  SteadyClock();
  double Now() override;
  void SleepFor(double seconds) override;

 private:
  std::int64_t origin_ns_;
};

// Only moves when told to.
class VirtualClock final : public Clock {
 public:
  double Now() override { return now_; }
  void SleepFor(double seconds) override { Advance(seconds); }
  void Advance(double seconds) { now_ += seconds > 0.0 ? seconds : 0.0; }

 private:
  double now_ = 0.0;
};

struct CounterReading {
  std::uint64_t energy_uj = 0;
  std::uint64_t max_energy_uj = 0;
  double timestamp = 0.0;
};

// (end - start) mod max_energy. Assumes at most one wrap between readings.
std::uint64_t ConsumedMicrojoules(std::uint64_t start, std::uint64_t end, std::uint64_t max_energy,
                                  bool* wrapped = nullptr);

struct DomainEnergy {
  std::string name;  // "package", "package-1", "dram", ...
  double joules = 0.0;

  friend bool operator==(const DomainEnergy&, const DomainEnergy&) = default;
};

struct EnergySample {
  std::string phase;
  std::string backend;
  double joules = 0.0;  // raw, equals the sum over domains
  double duration_s = 0.0;
  double start_s = 0.0;
  std::vector<DomainEnergy> domains;
  bool wrap_corrected = false;
  // Filled in by Adjust().
  std::optional<double> adjusted_joules;
  bool clamped = false;

  double EffectiveJoules() const { return adjusted_joules.value_or(joules); }
  nlohmann::json ToJson() const;
};

struct IdleBaseline {
  double watts = 0.0;
  double duration_s = 0.0;
  std::string backend;

  nlohmann::json ToJson() const;
};

struct PowercapBackend {
  std::filesystem::path root;
};

struct SimulatedBackend {
  double watts = 7.512;
  std::shared_ptr<Clock> clock;  // a SteadyClock when null
  std::uint64_t max_energy_uj = 262143328850ULL;
  std::uint64_t initial_energy_uj = 0;
};

using MeterBackend = std::variant<PowercapBackend, SimulatedBackend>;

// PET_RAPL_ROOT if set, otherwise /sys/class/powercap.
std::filesystem::path DefaultPowercapRoot();

class Meter {
 public:
  // Throws kUnsupportedPlatform when the powercap tree has no intel-rapl
  // zones and kPermissionDenied when a counter cannot be read.
  static Meter Open(const MeterBackend& backend);

  Meter(Meter&&) noexcept;
  Meter& operator=(Meter&&) noexcept;
  ~Meter();

  const std::vector<std::string>& domains() const;
  const std::string& backend_name() const;
  Clock& clock();

  std::vector<CounterReading> Read();

  // Reads every domain before and after `work`. Throws kSessionOverlap when
  // called from inside another measurement on the same meter.
  EnergySample Measure(const std::string& phase, const std::function<void()>& work);

  // Energy drawn while idle for `seconds` (>= 1), expressed in watts.
  IdleBaseline MeasureIdle(double seconds);

 private:
  struct Impl;
  explicit Meter(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

// Subtracts baseline watts x duration, clamping at zero. The raw value stays
// in `joules`. Throws kPrecondition when backends differ.
EnergySample Adjust(const EnergySample& sample, const IdleBaseline& baseline);

}  // namespace petbench

#endif  // PETBENCH_ENERGY_H_
