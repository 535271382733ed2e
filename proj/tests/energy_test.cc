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

#include <cstdlib>

#include <gtest/gtest.h>

#include "test_support.h"

namespace petbench {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;
using testing::WriteFile;

TEST(Wraparound, ExhaustiveSmallModulusGrid) {
  for (std::uint64_t max = 1; max <= 40; ++max) {
    for (std::uint64_t start = 0; start < max; ++start) {
      for (std::uint64_t end = 0; end < max; ++end) {
        bool wrapped = false;
        const auto got = ConsumedMicrojoules(start, end, max, &wrapped);
        ASSERT_EQ(got, (end + max - start) % max) << start << " " << end << " " << max;
        ASSERT_EQ(wrapped, end < start);
      }
    }
  }
  // Realistic counter range.
  const std::uint64_t max = 262143328850ULL;
  EXPECT_EQ(ConsumedMicrojoules(max - 10, 5, max), 15u);
}

SimulatedBackend Sim(std::shared_ptr<VirtualClock> clock, double watts = 7.512,
                     std::uint64_t max = 262143328850ULL, std::uint64_t initial = 0) {
  SimulatedBackend b;
  b.watts = watts;
  b.clock = std::move(clock);
  b.max_energy_uj = max;
  b.initial_energy_uj = initial;
  return b;
}

TEST(Simulated, EnergyIsWattsTimesSeconds) {
  auto clock = std::make_shared<VirtualClock>();
  auto meter = Meter::Open(Sim(clock, 10.0));
  EXPECT_EQ(meter.backend_name(), "simulated");
  const auto s = meter.Measure("train", [&] { clock->Advance(2.5); });
  EXPECT_DOUBLE_EQ(s.joules, 25.0);
  EXPECT_DOUBLE_EQ(s.duration_s, 2.5);
  EXPECT_EQ(s.phase, "train");
  ASSERT_EQ(s.domains.size(), 1u);
  EXPECT_EQ(s.domains[0].joules, s.joules);
}

TEST(Simulated, AdditivityAcrossSplitMeasurements) {
  for (double a : {0.001, 0.37, 1.3, 12.345}) {
    for (double b : {0.002, 0.5, 2.7, 99.9}) {
      auto c1 = std::make_shared<VirtualClock>();
      auto m1 = Meter::Open(Sim(c1));
      const auto sa = m1.Measure("a", [&] { c1->Advance(a); });
      const auto sb = m1.Measure("b", [&] { c1->Advance(b); });
      auto c2 = std::make_shared<VirtualClock>();
      auto m2 = Meter::Open(Sim(c2));
      const auto sab = m2.Measure("ab", [&] { c2->Advance(a + b); });
      EXPECT_NEAR(sa.joules + sb.joules, sab.joules, 1e-9) << a << " " << b;
    }
  }
}

TEST(Simulated, WrapIsCorrected) {
  auto clock = std::make_shared<VirtualClock>();
  // 1 W, counter range 5 J, starting 1 J below the wrap.
  auto meter = Meter::Open(Sim(clock, 1.0, 5'000'000, 4'000'000));
  const auto s = meter.Measure("w", [&] { clock->Advance(3.0); });
  EXPECT_TRUE(s.wrap_corrected);
  EXPECT_DOUBLE_EQ(s.joules, 3.0);
}

TEST(Session, NestedMeasureIsRejected) {
  auto clock = std::make_shared<VirtualClock>();
  auto meter = Meter::Open(Sim(clock));
  bool inner_threw = false;
  meter.Measure("outer", [&] {
    inner_threw = testing::ThrowsCode([&] { meter.Measure("inner", [] {}); }, ErrorCode::kSessionOverlap);
  });
  EXPECT_TRUE(inner_threw);
  // The guard is released after an exception inside the work.
  EXPECT_THROW(meter.Measure("boom", [] { throw std::runtime_error("x"); }), std::runtime_error);
  EXPECT_NO_THROW(meter.Measure("after", [] {}));
}

TEST(Idle, BaselineAndAdjustment) {
  auto clock = std::make_shared<VirtualClock>();
  auto meter = Meter::Open(Sim(clock));
  const auto idle = meter.MeasureIdle(1.0);
  EXPECT_DOUBLE_EQ(idle.watts, 7.512);
  EXPECT_DOUBLE_EQ(idle.duration_s, 1.0);
  EXPECT_PB_ERROR(meter.MeasureIdle(0.5), kPrecondition);

  EnergySample s;
  s.backend = "simulated";
  s.joules = 100.0;
  s.duration_s = 2.0;
  const auto adj = Adjust(s, {7.512, 1.0, "simulated"});
  EXPECT_EQ(*adj.adjusted_joules, 84.976);
  EXPECT_EQ(adj.joules, 100.0);
  EXPECT_FALSE(adj.clamped);
  EXPECT_EQ(adj.EffectiveJoules(), 84.976);

  EXPECT_EQ(*Adjust(s, {0.0, 1.0, "simulated"}).adjusted_joules, 100.0);
  const auto clamped = Adjust(s, {80.0, 1.0, "simulated"});
  EXPECT_EQ(*clamped.adjusted_joules, 0.0);
  EXPECT_TRUE(clamped.clamped);
  EXPECT_PB_ERROR(Adjust(s, {1.0, 1.0, "sysfs"}), kPrecondition);

  const auto j = adj.ToJson();
  EXPECT_EQ(j.at("joules"), 100.0);
  EXPECT_EQ(j.at("adjusted_joules"), 84.976);
}

void Zone(const fs::path& dir, const std::string& name, std::uint64_t energy, std::uint64_t max) {
  WriteFile(dir / "name", name + "\n");
  WriteFile(dir / "energy_uj", std::to_string(energy) + "\n");
  WriteFile(dir / "max_energy_range_uj", std::to_string(max) + "\n");
}

class ScopedEnv {
 public:
  ScopedEnv(const char* name, const std::string& value) : name_(name) {
    if (const char* old = std::getenv(name)) old_ = old;
    ::setenv(name, value.c_str(), 1);
  }
  ~ScopedEnv() {
    if (old_) {
      ::setenv(name_, old_->c_str(), 1);
    } else {
      ::unsetenv(name_);
    }
  }

 private:
  const char* name_;
  std::optional<std::string> old_;
};

TEST(Sysfs, FixtureTreeDomainsAndWrap) {
  TempDir root;
  Zone(root / "intel-rapl:0", "package-0", 1000, 5000);
  Zone(root / "intel-rapl:0" / "intel-rapl:0:0", "core", 10, 5000);
  Zone(root / "intel-rapl:0" / "intel-rapl:0:1", "dram", 200, 5000);
  Zone(root / "intel-rapl:1", "package-1", 4900, 5000);
  WriteFile(root / "intel-rapl-mmio:0" / "name", "ignored\n");

  ScopedEnv env("PET_RAPL_ROOT", root.path().string());
  ASSERT_EQ(DefaultPowercapRoot(), root.path());
  auto meter = Meter::Open(PowercapBackend{DefaultPowercapRoot()});
  EXPECT_EQ(meter.backend_name(), "sysfs");
  EXPECT_EQ(meter.domains(), (std::vector<std::string>{"package-0", "dram", "package-1"}));

  const auto s = meter.Measure("train", [&] {
    WriteFile(root / "intel-rapl:0" / "energy_uj", "3000\n");
    WriteFile(root / "intel-rapl:0" / "intel-rapl:0:1" / "energy_uj", "700\n");
    WriteFile(root / "intel-rapl:1" / "energy_uj", "100\n");  // wrapped
  });
  ASSERT_EQ(s.domains.size(), 3u);
  EXPECT_DOUBLE_EQ(s.domains[0].joules, 2000e-6);
  EXPECT_DOUBLE_EQ(s.domains[1].joules, 500e-6);
  EXPECT_DOUBLE_EQ(s.domains[2].joules, 200e-6);
  EXPECT_TRUE(s.wrap_corrected);
  EXPECT_DOUBLE_EQ(s.joules, s.domains[0].joules + s.domains[1].joules + s.domains[2].joules);
}

TEST(Sysfs, MissingTreeAndUnreadableCounter) {
  TempDir empty;
  EXPECT_PB_ERROR(Meter::Open(PowercapBackend{empty.path()}), kUnsupportedPlatform);
  EXPECT_PB_ERROR(Meter::Open(PowercapBackend{empty / "does-not-exist"}), kUnsupportedPlatform);

  TempDir root;
  Zone(root / "intel-rapl:0", "package-0", 1, 10);
  fs::remove(root / "intel-rapl:0" / "energy_uj");
  // A dangling link cannot be opened even by root.
  fs::create_symlink(root / "nowhere", root / "intel-rapl:0" / "energy_uj");
  EXPECT_PB_ERROR(Meter::Open(PowercapBackend{root.path()}), kPermissionDenied);
}

}  // namespace
}  // namespace petbench
