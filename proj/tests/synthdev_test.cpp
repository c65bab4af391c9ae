#include <gtest/gtest.h>

#include <cmath>

#include "edgelat/errors.hpp"
#include "edgelat/random.hpp"
#include "edgelat/synthdev.hpp"

using namespace edgelat;
using K = OperatorKind;

namespace {

SyntheticDevice flat_device(RuntimeKind kind, double noise = 0.0) {
  SyntheticDevice d;
  d.device_id = "flat";
  d.runtime = {kind, 0.35, true};
  d.noise_cv = noise;
  d.overhead_s = 0.01;
  d.seed = 99;
  for (std::size_t v = 0; v < kNumVariants; ++v) {
    d.base_latency_s[v] = OperatorVariant::from_index(v).kind == K::kNone ? kNoneLatencyFloor : 1e-3 * (v + 1);
    for (std::size_t i = 0; i < kNumCounters; ++i) d.rate_profile[v][i] = 1e6 * (i + 1);
  }
  return d;
}

std::vector<std::uint32_t> sampled_archs(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(static_cast<std::uint32_t>(rng.below(kNumArchitectures)));
  return out;
}

}  // namespace

TEST(Profile, NoiselessEqualsBase) {
  const auto d = flat_device(RuntimeKind::kAdditive);
  for (std::size_t v = 0; v < kNumVariants; ++v) {
    const auto p = profile_operator(d, OperatorVariant::from_index(v));
    EXPECT_EQ(p.latency_s, d.base_latency_s[v]);
    for (std::size_t i = 0; i < kNumCounters; ++i) {
      EXPECT_EQ(p.counters.values[i], d.rate_profile[v][i] * d.base_latency_s[v]);
    }
  }
}

TEST(Profile, Deterministic) {
  const auto d = flat_device(RuntimeKind::kOptimized, 0.03);
  const auto v = OperatorVariant{K::kConv3x3, 32};
  EXPECT_EQ(profile_operator(d, v), profile_operator(d, v));
  EXPECT_NE(profile_operator(d, v).latency_s, d.base_latency_s[v.index()]);
}

TEST(Profile, RejectsBadRuns) {
  EXPECT_THROW(profile_operator(flat_device(RuntimeKind::kAdditive), {K::kConv1x1, 16}, 0), RangeError);
  EXPECT_THROW(profile_operator(flat_device(RuntimeKind::kAdditive), {K::kConv1x1, 48}), StructuralError);
}

TEST(Measure, AllNoneIsOverhead) {
  for (auto kind : {RuntimeKind::kAdditive, RuntimeKind::kOptimized}) {
    const auto d = flat_device(kind);
    EXPECT_EQ(measure_e2e(d, architecture_from_index(0), {}).latency_s, d.overhead_s);
  }
}

TEST(Measure, AllSkipElidedOnOptimized) {
  const auto d = flat_device(RuntimeKind::kOptimized);
  const auto a = CellArchitecture::from_edges({K::kSkipConnect, K::kSkipConnect, K::kSkipConnect, K::kSkipConnect,
                                               K::kSkipConnect, K::kSkipConnect});
  EXPECT_EQ(measure_e2e(d, a, {}).latency_s, d.overhead_s);
}

TEST(Measure, OptimizedNeverSlowerThanAdditive) {
  const auto opt = flat_device(RuntimeKind::kOptimized);
  const auto add = flat_device(RuntimeKind::kAdditive);
  for (auto i : sampled_archs(200, 5)) {
    const auto a = architecture_from_index(i);
    EXPECT_LE(measure_e2e(opt, a, {}).latency_s, measure_e2e(add, a, {}).latency_s);
  }
}

TEST(Measure, Deterministic) {
  const auto d = flat_device(RuntimeKind::kAdditive, 0.03);
  const auto a = architecture_from_index(1234);
  EXPECT_EQ(measure_e2e(d, a, {}), measure_e2e(d, a, {}));
}

TEST(Measure, NoiseHasUnitMeanAndRequestedSpread) {
  auto d = flat_device(RuntimeKind::kAdditive, 0.03);
  const auto a = architecture_from_index(4321);
  const double base = noiseless_e2e(d, a, {});
  double s = 0.0, s2 = 0.0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    d.seed = static_cast<std::uint64_t>(i);
    const double r = measure_e2e(d, a, {}).latency_s / base;
    s += r;
    s2 += r * r;
  }
  const double mean = s / n;
  const double sd = std::sqrt(s2 / n - mean * mean);
  EXPECT_NEAR(mean, 1.0, 0.003);
  EXPECT_NEAR(sd, 0.03, 0.003);
}

// Replacing a NONE edge by any operator never makes a network faster.
TEST(Pool, LatencyMonotoneUnderOperatorInsertion) {
  const auto spec = default_pool_spec();
  const auto pool = make_device_pool(spec, 7);
  for (const auto& d : pool) {
    for (auto i : sampled_archs(300, 11)) {
      const auto a = architecture_from_index(i);
      for (std::size_t e = 0; e < kNumEdges; ++e) {
        if (a.edges[e] != K::kNone) continue;
        for (auto k : {K::kConv1x1, K::kConv3x3}) {
          auto edges = a.edges;
          edges[e] = k;
          ASSERT_GE(noiseless_e2e(d, CellArchitecture::from_edges(edges), spec.macro),
                    noiseless_e2e(d, a, spec.macro))
              << d.device_id << " arch " << i << " edge " << e;
        }
      }
    }
  }
}

TEST(Pool, CalibratedToTargets) {
  const auto spec = default_pool_spec();
  const auto pool = make_device_pool(spec, 1);
  ASSERT_EQ(pool.size(), 7u);
  const auto archs = arch_indices_in(spec.calibration_range, spec.ordering);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    double m = 0.0;
    for (auto a : archs) m += measure_e2e(pool[i], architecture_from_index(a), spec.macro).latency_s;
    m /= static_cast<double>(archs.size());
    const double target = spec.devices[i].target_mean_s;
    EXPECT_GE(m, 0.75 * target) << pool[i].device_id;
    EXPECT_LE(m, 1.25 * target) << pool[i].device_id;
  }
}

TEST(Pool, Deterministic) {
  const auto spec = default_pool_spec();
  const auto a = make_device_pool(spec, 3);
  const auto b = make_device_pool(spec, 3);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].base_latency_s, b[i].base_latency_s);
    EXPECT_EQ(a[i].rate_profile, b[i].rate_profile);
    EXPECT_EQ(a[i].overhead_s, b[i].overhead_s);
    EXPECT_EQ(a[i].seed, b[i].seed);
  }
  const auto c = make_device_pool(spec, 4);
  EXPECT_NE(a[0].base_latency_s, c[0].base_latency_s);
}

TEST(Pool, DeviceIndependentOfPeers) {
  auto spec = default_pool_spec();
  const auto full = make_device_pool(spec, 3);
  spec.devices.erase(spec.devices.begin(), spec.devices.begin() + 4);
  const auto trt = make_device_pool(spec, 3);
  EXPECT_EQ(full[4].base_latency_s, trt[0].base_latency_s);
}

TEST(Pool, TargetBelowOverheadIsCalibrationError) {
  PoolSpec spec;
  DeviceSpec d;
  d.id = "bad";
  d.target_mean_s = 0.01;
  d.overhead_s = 0.02;
  spec.devices.push_back(d);
  EXPECT_THROW(make_device_pool(spec, 1), CalibrationError);
}

TEST(Pool, DuplicateIdsRejected) {
  PoolSpec spec;
  DeviceSpec d;
  d.id = "x";
  spec.devices = {d, d};
  EXPECT_THROW(make_device_pool(spec, 1), ConfigError);
}

TEST(Pool, ImportedRuntimeRejected) {
  PoolSpec spec;
  DeviceSpec d;
  d.id = "x";
  d.runtime = RuntimeKind::kImported;
  spec.devices = {d};
  EXPECT_THROW(make_device_pool(spec, 1), ConfigError);
}

TEST(Runtime, NamesRoundTrip) {
  for (auto k : {RuntimeKind::kAdditive, RuntimeKind::kOptimized, RuntimeKind::kImported}) {
    EXPECT_EQ(parse_runtime(runtime_name(k)), k);
  }
  EXPECT_FALSE(parse_runtime("gpu").has_value());
}

TEST(Pool, EventCountsIndependentOfCalibratedSpeed) {
  PoolSpec fast, slow;
  fast.devices = {default_pool_spec().devices[5]};
  slow.devices = fast.devices;
  fast.devices[0].target_mean_s = 0.03;
  slow.devices[0].target_mean_s = 0.09;
  fast.devices[0].overhead_s = slow.devices[0].overhead_s = 0.001;
  fast.devices[0].noise_cv = slow.devices[0].noise_cv = 0.0;
  const auto f = make_device_pool(fast, 4).front();
  const auto s = make_device_pool(slow, 4).front();
  for (std::size_t v = 0; v < kNumVariants; ++v) {
    if (OperatorVariant::from_index(v).kind == K::kNone) continue;
    const auto pf = profile_operator(f, OperatorVariant::from_index(v));
    const auto ps = profile_operator(s, OperatorVariant::from_index(v));
    EXPECT_GT(ps.latency_s, pf.latency_s);
    EXPECT_DOUBLE_EQ(pf.counters.values[0] / pf.latency_s, ps.counters.values[0] / ps.latency_s);
    for (std::size_t i = 1; i < kNumCounters; ++i) {
      EXPECT_NEAR(pf.counters.values[i], ps.counters.values[i], 1e-9 * ps.counters.values[i]);
    }
  }
}
