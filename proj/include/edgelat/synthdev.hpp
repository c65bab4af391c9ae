#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edgelat/archspace.hpp"
#include "edgelat/counters.hpp"
#include "edgelat/errors.hpp"
#include "edgelat/random.hpp"

namespace edgelat {

// Device-runtime label as carried in dataset files. Synthetic devices are
// always additive or optimized; imported is reserved for external data.
enum class RuntimeKind : std::uint8_t { kAdditive, kOptimized, kImported };

inline std::string_view runtime_name(RuntimeKind k) {
  switch (k) {
    case RuntimeKind::kAdditive: return "additive";
    case RuntimeKind::kOptimized: return "optimized";
    case RuntimeKind::kImported: return "imported";
  }
  return "?";
}

inline std::optional<RuntimeKind> parse_runtime(std::string_view s) {
  if (s == "additive") return RuntimeKind::kAdditive;
  if (s == "optimized") return RuntimeKind::kOptimized;
  if (s == "imported") return RuntimeKind::kImported;
  return std::nullopt;
}

// ADDITIVE executes every layer as-is. OPTIMIZED mimics a graph-compiling
// engine: skip connections are elided and conv-heavy cells get a fused
// discount on their compute.
struct RuntimeModel {
  RuntimeKind kind = RuntimeKind::kAdditive;
  double fusion_discount = 0.35;
  bool skip_elision = true;
};

inline constexpr double kNoneLatencyFloor = 1e-7;

struct SyntheticDevice {
  std::string device_id;
  RuntimeModel runtime;
  std::array<double, kNumVariants> base_latency_s{};
  std::array<RateVector, kNumVariants> rate_profile{};
  double overhead_s = 0.0;
  double noise_cv = 0.03;
  std::uint64_t seed = 0;
};

inline void validate_device(const SyntheticDevice& d) {
  if (d.runtime.kind == RuntimeKind::kImported) {
    throw ConfigError("synthetic device " + d.device_id + " must be additive or optimized");
  }
  if (d.runtime.kind == RuntimeKind::kOptimized &&
      !(d.runtime.fusion_discount >= 0.0 && d.runtime.fusion_discount < 1.0)) {
    throw RangeError("fusion_discount must lie in [0, 1)");
  }
  if (!(d.noise_cv >= 0.0 && d.noise_cv <= 0.5)) throw RangeError("noise_cv must lie in [0, 0.5]");
  if (!(d.overhead_s >= 0.0)) throw RangeError("overhead_s must be non-negative");
  for (std::size_t v = 0; v < kNumVariants; ++v) {
    if (!(d.base_latency_s[v] > 0.0)) throw DomainError("base latency must be positive");
    for (double r : d.rate_profile[v]) {
      if (!(r > 0.0)) throw DomainError("counter rates must be positive");
    }
  }
}

inline OperatorProfile profile_operator(const SyntheticDevice& device, const OperatorVariant& variant,
                                        int n_runs = 1000) {
  if (n_runs < 1) throw RangeError("n_runs must be >= 1");
  if (!is_valid_channel_width(variant.channels) ||
      static_cast<std::size_t>(variant.kind) >= kNumOperatorKinds) {
    throw StructuralError("unknown operator variant");
  }
  const std::size_t v = variant.index();
  Rng rng(derive_seed(device.seed, v, "profile"));
  double sum = 0.0;
  for (int i = 0; i < n_runs; ++i) sum += rng.lognormal_unit_mean(device.noise_cv);
  OperatorProfile p;
  p.variant = variant;
  p.n_runs = n_runs;
  p.latency_s = device.noise_cv > 0.0 ? device.base_latency_s[v] * (sum / n_runs) : device.base_latency_s[v];
  for (std::size_t i = 0; i < kNumCounters; ++i) {
    p.counters.values[i] = device.rate_profile[v][i] * p.latency_s;
  }
  return p;
}

inline std::vector<OperatorProfile> profile_all_operators(const SyntheticDevice& device, int n_runs = 1000) {
  std::vector<OperatorProfile> out;
  out.reserve(kNumVariants);
  for (std::size_t v = 0; v < kNumVariants; ++v) {
    out.push_back(profile_operator(device, OperatorVariant::from_index(v), n_runs));
  }
  return out;
}

// Fraction of non-NONE edges that a fusing runtime can merge (convs).
inline double fusable_fraction(const CellArchitecture& arch) {
  int active = 0;
  int fusable = 0;
  for (OperatorKind k : arch.edges) {
    if (k == OperatorKind::kNone) continue;
    ++active;
    if (is_conv(k)) ++fusable;
  }
  return active == 0 ? 0.0 : static_cast<double>(fusable) / active;
}

inline double noiseless_e2e(const SyntheticDevice& device, const CellArchitecture& arch,
                            const MacroConfig& macro) {
  const OperatorCounts counts = operator_multiset(arch, macro);
  const bool optimized = device.runtime.kind == RuntimeKind::kOptimized;
  double compute = 0.0;
  for (std::size_t v = 0; v < kNumVariants; ++v) {
    if (counts[v] == 0) continue;
    const auto kind = OperatorVariant::from_index(v).kind;
    if (optimized && device.runtime.skip_elision && kind == OperatorKind::kSkipConnect) continue;
    compute += static_cast<double>(counts[v]) * device.base_latency_s[v];
  }
  if (optimized) compute *= 1.0 - device.runtime.fusion_discount * fusable_fraction(arch);
  return device.overhead_s + compute;
}

struct LatencySample {
  std::string device_id;
  std::uint32_t arch_index = 0;
  double latency_s = 0.0;

  friend bool operator==(const LatencySample&, const LatencySample&) = default;
};

inline LatencySample measure_e2e(const SyntheticDevice& device, const CellArchitecture& arch,
                                 const MacroConfig& macro) {
  Rng rng(derive_seed(device.seed, arch.index, "e2e"));
  const double noise = rng.lognormal_unit_mean(device.noise_cv);
  return {device.device_id, arch.index, noiseless_e2e(device, arch, macro) * noise};
}

// ---------------------------------------------------------------------------
// Device pools

struct DeviceSpec {
  std::string id;
  RuntimeKind runtime = RuntimeKind::kAdditive;
  double target_mean_s = 1.0;
  std::optional<double> overhead_s;  // default: seeded 2-6% of the target
  double noise_cv = 0.03;
  double fusion_discount = 0.35;
  bool skip_elision = true;
  // Log-scale spread of the device's latent traits and per-operator costs
  // around its runtime's template; larger values make it less like its peers.
  double heterogeneity = 0.1;
};

struct PoolSpec {
  std::vector<DeviceSpec> devices;
  MacroConfig macro;
  ArchRange calibration_range{0, 2699};
  ArchOrdering ordering = ArchOrdering::kBenchmark;
};

// Four CPU-interpreter devices and three graph-compiled GPU devices with mean
// latencies of 1.0/0.9/1.1/0.6 s and 0.05/0.03/0.07 s. The 0.6 s device is
// deliberately less regular than the others.
inline PoolSpec default_pool_spec() {
  PoolSpec s;
  auto add = [&](std::string id, RuntimeKind rt, double target, double het) {
    DeviceSpec d;
    d.id = std::move(id);
    d.runtime = rt;
    d.target_mean_s = target;
    d.heterogeneity = het;
    s.devices.push_back(d);
  };
  add("tx1-tflite", RuntimeKind::kAdditive, 1.0, 0.1);
  add("tx2-tflite", RuntimeKind::kAdditive, 0.9, 0.1);
  add("nano-tflite", RuntimeKind::kAdditive, 1.1, 0.1);
  add("rpi4-tflite", RuntimeKind::kAdditive, 0.6, 0.5);
  add("tx1-trt", RuntimeKind::kOptimized, 0.05, 0.1);
  add("tx2-trt", RuntimeKind::kOptimized, 0.03, 0.1);
  add("nano-trt", RuntimeKind::kOptimized, 0.07, 0.1);
  return s;
}

namespace detail {

struct OpWork {
  double flops = 0.0;
  double bytes = 0.0;
};

// Relative work of one operator instance at stage s. Spatial size halves as
// width doubles, so conv FLOPs are flat across stages while activation
// traffic halves and weight traffic quadruples.
inline OpWork op_work(OperatorKind k, std::size_t stage) {
  const double act = std::ldexp(1.0, -static_cast<int>(stage));
  const double wts = std::ldexp(1.0, 2 * static_cast<int>(stage));
  switch (k) {
    case OperatorKind::kConv3x3: return {9.0, 2.0 * act + 0.1 * wts};
    case OperatorKind::kConv1x1: return {1.0, 2.0 * act + 0.011 * wts};
    case OperatorKind::kAvgPool3x3: return {0.5 * act, 2.0 * act};
    case OperatorKind::kSkipConnect: return {0.0, 0.2 * act};
    case OperatorKind::kNone: return {0.0, 0.0};
  }
  return {};
}

inline SyntheticDevice make_unscaled_device(const DeviceSpec& spec, std::uint64_t pool_seed) {
  if (spec.runtime == RuntimeKind::kImported) {
    throw ConfigError("device " + spec.id + ": synthetic runtime must be additive or optimized");
  }
  if (!(spec.target_mean_s > 0.0)) throw CalibrationError("device " + spec.id + ": target must be positive");
  if (!(spec.heterogeneity >= 0.0)) throw RangeError("device " + spec.id + ": heterogeneity must be >= 0");

  Rng rng(derive_seed(pool_seed, spec.id, "device"));
  const bool optimized = spec.runtime == RuntimeKind::kOptimized;

  SyntheticDevice d;
  d.device_id = spec.id;
  d.runtime = {spec.runtime, spec.fusion_discount, spec.skip_elision};
  d.noise_cv = spec.noise_cv;
  d.seed = derive_seed(pool_seed, spec.id, "measure");

  // Latent traits scatter around a per-runtime template; heterogeneity is
  // the log-scale spread. GPU-style devices have much more compute per unit
  // of memory bandwidth and pay a per-kernel launch cost.
  const double het = spec.heterogeneity;
  auto around = [&](double center) { return center * std::exp(het * rng.normal()); };
  const double compute = optimized ? around(7.0) : 1.0;
  const double memory = around(1.5);
  const double launch = optimized ? around(0.2) : around(0.01);
  const double clock = around(1.5e9);
  const double util = optimized ? around(0.25) : around(0.92);
  const double fused_traffic = optimized ? 1.0 - 0.5 * spec.fusion_discount : 1.0;

  // Per-run event counts follow each variant's work: instructions and loads
  // scale with arithmetic and traffic, misses with traffic and the memory
  // system. On the optimized runtime the host only dispatches kernels, so its
  // counts are a small share plus a fixed launch cost. Rates are counts over
  // the variant's latency; cycles are the only time-based counter.
  const double host_share = optimized ? 0.05 : 1.0;
  const double miss_ratio = 0.1 / memory;
  for (std::size_t v = 0; v < kNumVariants; ++v) {
    const auto var = OperatorVariant::from_index(v);
    const std::size_t stage = v % kNumChannelWidths;
    if (var.kind == OperatorKind::kNone) {
      d.base_latency_s[v] = 0.0;
      d.rate_profile[v] = {clock * util, 1.0, 1.0, 1.0, 1.0, 1.0};
      continue;
    }
    const OpWork w = op_work(var.kind, stage);
    const double t_compute = w.flops / compute * std::exp(0.5 * het * rng.normal());
    const double t_memory = w.bytes / memory * std::exp(0.5 * het * rng.normal());
    const double total = t_compute + t_memory + launch;
    d.base_latency_s[v] = total;

    const double dispatch = optimized ? 0.02 : 0.0;
    const double instr = 1e9 * (host_share * (w.flops + 0.5 * w.bytes) + dispatch);
    const double refs = 1e8 * (host_share * w.bytes * fused_traffic + 0.1 * dispatch);
    const double misses = refs * miss_ratio;
    const double loads = 0.3 * instr;
    const double l1m = loads * 0.02 * fused_traffic;
    const double cycles_rate = clock * std::min(1.0, util * (1.0 + launch / total));
    d.rate_profile[v] = {cycles_rate, instr / total, refs / total, misses / total, loads / total, l1m / total};
    for (double& r : d.rate_profile[v]) r *= std::exp(0.02 * rng.normal());
  }

  // Keep convs at least as costly as pooling and conv1x1 within a factor 5
  // of conv3x3 at every width. With a fusion discount below 1 this makes
  // latency non-decreasing when a NONE edge is replaced by a conv.
  for (int c : kStageChannels) {
    auto at = [&](OperatorKind k) -> double& { return d.base_latency_s[OperatorVariant{k, c}.index()]; };
    at(OperatorKind::kConv3x3) = std::max(at(OperatorKind::kConv3x3), at(OperatorKind::kConv1x1));
    at(OperatorKind::kConv1x1) = std::max({at(OperatorKind::kConv1x1), at(OperatorKind::kAvgPool3x3),
                                           0.2 * at(OperatorKind::kConv3x3)});
  }

  const double overhead_frac = rng.uniform(0.02, 0.06);
  d.overhead_s = spec.overhead_s ? *spec.overhead_s : overhead_frac * spec.target_mean_s;
  return d;
}

}  // namespace detail

// Generates one device per spec entry, scaling its operator latencies so the
// noiseless mean end-to-end latency over the calibration range equals the
// target. Each device depends only on (seed, its own spec).
inline std::vector<SyntheticDevice> make_device_pool(const PoolSpec& spec, std::uint64_t seed) {
  const auto archs = arch_indices_in(spec.calibration_range, spec.ordering);
  std::vector<SyntheticDevice> pool;
  pool.reserve(spec.devices.size());
  for (const auto& ds : spec.devices) {
    for (const auto& existing : pool) {
      if (existing.device_id == ds.id) throw ConfigError("duplicate device id " + ds.id);
    }
    SyntheticDevice d = detail::make_unscaled_device(ds, seed);
    if (!(d.overhead_s >= 0.0)) throw CalibrationError("device " + ds.id + ": negative overhead");
    if (ds.target_mean_s <= d.overhead_s) {
      throw CalibrationError("device " + ds.id + ": target mean " + std::to_string(ds.target_mean_s) +
                             " s is not above the per-inference overhead " + std::to_string(d.overhead_s) + " s");
    }
    const double overhead = d.overhead_s;
    d.overhead_s = 0.0;
    double mean_compute = 0.0;
    for (auto a : archs) mean_compute += noiseless_e2e(d, architecture_from_index(a), spec.macro);
    mean_compute /= static_cast<double>(archs.size());
    if (!(mean_compute > 0.0)) {
      throw CalibrationError("device " + ds.id + ": calibration range has no compute to scale");
    }
    const double scale = (ds.target_mean_s - overhead) / mean_compute;
    for (std::size_t v = 0; v < kNumVariants; ++v) {
      if (OperatorVariant::from_index(v).kind == OperatorKind::kNone) {
        d.base_latency_s[v] = kNoneLatencyFloor;
        continue;
      }
      d.base_latency_s[v] *= scale;
      // Event counts per run are fixed by the work, so their rates shrink
      // as the same work takes longer.
      for (std::size_t i = 1; i < kNumCounters; ++i) d.rate_profile[v][i] /= scale;
    }
    d.overhead_s = overhead;
    validate_device(d);
    pool.push_back(std::move(d));
  }
  return pool;
}

}  // namespace edgelat
