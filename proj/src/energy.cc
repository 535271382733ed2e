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

#include "petbench/energy.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "petbench/error.h"

namespace petbench {

namespace fs = std::filesystem;

SteadyClock::SteadyClock()
    : origin_ns_(std::chrono::duration_cast<std::chrono::nanoseconds>(
                     std::chrono::steady_clock::now().time_since_epoch())
                     .count()) {}

double SteadyClock::Now() {
  const auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                      std::chrono::steady_clock::now().time_since_epoch())
                      .count();
  return static_cast<double>(ns - origin_ns_) * 1e-9;
}

void SteadyClock::SleepFor(double seconds) {
  if (seconds > 0.0) std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

std::uint64_t ConsumedMicrojoules(std::uint64_t start, std::uint64_t end, std::uint64_t max_energy,
                                  bool* wrapped) {
  if (wrapped) *wrapped = end < start;
  if (end >= start) return end - start;
  return max_energy - start + end;
}

fs::path DefaultPowercapRoot() {
  if (const char* env = std::getenv("PET_RAPL_ROOT"); env && *env) return env;
  return "/sys/class/powercap";
}

namespace {

std::uint64_t ReadCounterFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kPermissionDenied,
                "cannot read " + path.string() +
                    " (grant read access, e.g. chmod a+r, or use --meter simulated)");
  }
  std::uint64_t value = 0;
  in >> value;
  if (!in) throw Error(ErrorCode::kParseError, "malformed counter in " + path.string());
  return value;
}

std::string ReadName(const fs::path& dir) {
  std::ifstream in(dir / "name");
  std::string name;
  if (in) std::getline(in, name);
  while (!name.empty() && (name.back() == '\n' || name.back() == '\r' || name.back() == ' ')) name.pop_back();
  return name;
}

bool IsZoneName(const std::string& name, int colons) {
  if (name.rfind("intel-rapl:", 0) != 0) return false;
  return std::count(name.begin(), name.end(), ':') == colons;
}

std::vector<fs::path> SortedZones(const fs::path& dir, int colons) {
  std::vector<fs::path> out;
  std::error_code ec;
  for (fs::directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) {
    const auto name = it->path().filename().string();
    if (IsZoneName(name, colons)) out.push_back(it->path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

struct Meter::Impl {
  struct Domain {
    std::string name;
    fs::path energy_file;
    std::uint64_t max_energy_uj = 0;
  };

  std::string backend;
  std::vector<Domain> domains;
  std::vector<std::string> domain_names;
  std::shared_ptr<Clock> clock;
  std::optional<SimulatedBackend> simulated;
  bool active = false;

  std::vector<CounterReading> Read() {
    const double now = clock->Now();
    std::vector<CounterReading> out;
    if (simulated) {
      const auto total = static_cast<std::uint64_t>(std::llround(simulated->watts * now * 1e6)) +
                         simulated->initial_energy_uj;
      out.push_back({total % simulated->max_energy_uj, simulated->max_energy_uj, now});
      return out;
    }
    for (const auto& d : domains) out.push_back({ReadCounterFile(d.energy_file), d.max_energy_uj, now});
    return out;
  }
};

Meter::Meter(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
Meter::Meter(Meter&&) noexcept = default;
Meter& Meter::operator=(Meter&&) noexcept = default;
Meter::~Meter() = default;

Meter Meter::Open(const MeterBackend& backend) {
  auto impl = std::make_unique<Impl>();
  if (const auto* sim = std::get_if<SimulatedBackend>(&backend)) {
    if (sim->watts < 0.0) throw Error(ErrorCode::kPrecondition, "simulated watts must be >= 0");
    if (sim->max_energy_uj == 0) throw Error(ErrorCode::kPrecondition, "max energy must be > 0");
    impl->backend = "simulated";
    impl->simulated = *sim;
    impl->clock = sim->clock ? sim->clock : std::make_shared<SteadyClock>();
    impl->domain_names = {"package"};
    return Meter(std::move(impl));
  }

  const auto& root = std::get<PowercapBackend>(backend).root;
  impl->backend = "sysfs";
  impl->clock = std::make_shared<SteadyClock>();
  const auto packages = SortedZones(root, 1);
  if (packages.empty()) {
    throw Error(ErrorCode::kUnsupportedPlatform,
                "no intel-rapl zones under " + root.string() +
                    " (use --meter simulated, or point PET_RAPL_ROOT at a powercap tree)");
  }
  auto add = [&](const fs::path& dir, std::string name) {
    Impl::Domain d;
    d.name = std::move(name);
    d.energy_file = dir / "energy_uj";
    d.max_energy_uj = ReadCounterFile(dir / "max_energy_range_uj");
    ReadCounterFile(d.energy_file);
    impl->domain_names.push_back(d.name);
    impl->domains.push_back(std::move(d));
  };
  for (const auto& pkg : packages) {
    std::string name = ReadName(pkg);
    add(pkg, name.empty() ? pkg.filename().string() : name);
    for (const auto& sub : SortedZones(pkg, 2)) {
      const std::string sub_name = ReadName(sub);
      // core/uncore are already inside the package counter.
      if (sub_name == "dram") add(sub, sub_name);
    }
  }
  return Meter(std::move(impl));
}

const std::vector<std::string>& Meter::domains() const { return impl_->domain_names; }
const std::string& Meter::backend_name() const { return impl_->backend; }
Clock& Meter::clock() { return *impl_->clock; }
std::vector<CounterReading> Meter::Read() { return impl_->Read(); }

EnergySample Meter::Measure(const std::string& phase, const std::function<void()>& work) {
  if (impl_->active) {
    throw Error(ErrorCode::kSessionOverlap, "meter already measuring; '" + phase + "' would nest");
  }
  impl_->active = true;
  struct Release {
    bool& flag;
    ~Release() { flag = false; }
  } release{impl_->active};

  const auto start = impl_->Read();
  work();
  const auto end = impl_->Read();

  EnergySample s;
  s.phase = phase;
  s.backend = impl_->backend;
  s.start_s = start.front().timestamp;
  s.duration_s = std::max(0.0, end.front().timestamp - start.front().timestamp);
  std::uint64_t total_uj = 0;
  for (std::size_t i = 0; i < start.size(); ++i) {
    bool wrapped = false;
    const auto uj = ConsumedMicrojoules(start[i].energy_uj, end[i].energy_uj, start[i].max_energy_uj, &wrapped);
    s.wrap_corrected = s.wrap_corrected || wrapped;
    s.domains.push_back({impl_->domain_names[i], static_cast<double>(uj) / 1e6});
    total_uj += uj;
  }
  s.joules = static_cast<double>(total_uj) / 1e6;
  return s;
}

IdleBaseline Meter::MeasureIdle(double seconds) {
  if (!(seconds >= 1.0)) throw Error(ErrorCode::kPrecondition, "idle window must be >= 1 s");
  const EnergySample s = Measure("idle", [&] { impl_->clock->SleepFor(seconds); });
  IdleBaseline b;
  b.backend = s.backend;
  b.duration_s = s.duration_s;
  const double uj = static_cast<double>(std::llround(s.joules * 1e6));
  b.watts = s.duration_s > 0.0 ? uj / (s.duration_s * 1e6) : 0.0;
  return b;
}

EnergySample Adjust(const EnergySample& sample, const IdleBaseline& baseline) {
  if (sample.backend != baseline.backend) {
    throw Error(ErrorCode::kPrecondition, "baseline from '" + baseline.backend +
                                              "' cannot adjust a '" + sample.backend + "' sample");
  }
  EnergySample out = sample;
  const double idle = baseline.watts * sample.duration_s;
  const double adjusted = sample.joules - idle;
  out.clamped = adjusted < 0.0;
  out.adjusted_joules = std::max(0.0, adjusted);
  return out;
}

nlohmann::json EnergySample::ToJson() const {
  nlohmann::json doms = nlohmann::json::object();
  for (const auto& d : domains) doms[d.name] = d.joules;
  nlohmann::json j = {{"phase", phase},       {"backend", backend},   {"joules", joules},
                      {"duration_s", duration_s}, {"domains", doms}, {"wrap_corrected", wrap_corrected}};
  if (adjusted_joules) {
    j["adjusted_joules"] = *adjusted_joules;
    j["clamped"] = clamped;
  }
  return j;
}

nlohmann::json IdleBaseline::ToJson() const {
  return {{"watts", watts}, {"duration_s", duration_s}, {"backend", backend}};
}

}  // namespace petbench
