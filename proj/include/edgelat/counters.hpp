#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "edgelat/archspace.hpp"
#include "edgelat/errors.hpp"

namespace edgelat {

inline constexpr std::size_t kNumCounters = 6;
inline constexpr std::size_t kDescriptorBlock = kNumCounters + 1;  // 6 counters + latency
inline constexpr std::size_t kDescriptorSize = kNumVariants * kDescriptorBlock;

inline constexpr std::array<std::string_view, kNumCounters> kCounterNames{
    "cpu-cycles",   "instructions",    "cache-references",
    "cache-misses", "L1-dcache-loads", "L1-dcache-load-misses"};

// Mean event counts per single inference run, in kCounterNames order.
struct CounterSet {
  std::array<double, kNumCounters> values{};

  double cpu_cycles() const { return values[0]; }
  double instructions() const { return values[1]; }
  double cache_references() const { return values[2]; }
  double cache_misses() const { return values[3]; }
  double l1_dcache_loads() const { return values[4]; }
  double l1_dcache_load_misses() const { return values[5]; }

  friend bool operator==(const CounterSet&, const CounterSet&) = default;
};

struct OperatorProfile {
  OperatorVariant variant;
  double latency_s = 0.0;  // mean seconds per run
  CounterSet counters;
  int n_runs = 1000;

  friend bool operator==(const OperatorProfile&, const OperatorProfile&) = default;
};

using RateVector = std::array<double, kNumCounters>;

enum class DescriptorKind : std::uint8_t { kNormalized, kRaw };

// Per-device-runtime vector S: for each of the 15 variants in index order,
// [6 counter entries, latency]. Counter entries are events/s when normalized
// and mean counts per run when raw.
struct HardwareDescriptor {
  std::string device_id;
  std::vector<double> values = std::vector<double>(kDescriptorSize, 0.0);

  double latency(std::size_t variant) const {
    return values[variant * kDescriptorBlock + kNumCounters];
  }
  std::span<const double> counters(std::size_t variant) const {
    return std::span<const double>(values).subspan(variant * kDescriptorBlock, kNumCounters);
  }

  friend bool operator==(const HardwareDescriptor&, const HardwareDescriptor&) = default;
};

inline void validate_profile(const OperatorProfile& p) {
  if (!(p.latency_s > 0.0) || !std::isfinite(p.latency_s)) {
    throw DomainError("operator profile " + p.variant.name() + " has non-positive latency");
  }
  if (p.n_runs < 1) throw DomainError("operator profile " + p.variant.name() + " has n_runs < 1");
  for (double c : p.counters.values) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
      throw DomainError("operator profile " + p.variant.name() + " has a negative counter");
    }
  }
}

// Counters divided by the operator's latency: absolute counts become rates.
inline RateVector normalize_counters(const OperatorProfile& profile) {
  if (!(profile.latency_s > 0.0)) {
    throw DomainError("cannot normalize counters of " + profile.variant.name() +
                      ": latency must be positive");
  }
  RateVector r{};
  for (std::size_t i = 0; i < kNumCounters; ++i) r[i] = profile.counters.values[i] / profile.latency_s;
  return r;
}

namespace detail {

inline std::array<const OperatorProfile*, kNumVariants> index_profiles(
    std::span<const OperatorProfile> profiles) {
  std::array<const OperatorProfile*, kNumVariants> slot{};
  for (const auto& p : profiles) {
    if (!is_valid_channel_width(p.variant.channels) ||
        static_cast<std::size_t>(p.variant.kind) >= kNumOperatorKinds) {
      throw StructuralError("profile with unknown operator variant");
    }
    const std::size_t v = p.variant.index();
    if (slot[v] != nullptr) throw StructuralError("duplicate profile for " + p.variant.name());
    slot[v] = &p;
  }
  for (std::size_t v = 0; v < kNumVariants; ++v) {
    if (slot[v] == nullptr) {
      throw StructuralError("missing profile for " + OperatorVariant::from_index(v).name());
    }
  }
  return slot;
}

inline HardwareDescriptor build(const std::string& device_id, std::span<const OperatorProfile> profiles,
                                DescriptorKind kind) {
  const auto slot = index_profiles(profiles);
  HardwareDescriptor d;
  d.device_id = device_id;
  for (std::size_t v = 0; v < kNumVariants; ++v) {
    const OperatorProfile& p = *slot[v];
    validate_profile(p);
    const RateVector entries = kind == DescriptorKind::kNormalized ? normalize_counters(p) : p.counters.values;
    std::copy(entries.begin(), entries.end(), d.values.begin() + v * kDescriptorBlock);
    d.values[v * kDescriptorBlock + kNumCounters] = p.latency_s;
  }
  return d;
}

}  // namespace detail

inline HardwareDescriptor build_descriptor(const std::string& device_id,
                                           std::span<const OperatorProfile> profiles) {
  return detail::build(device_id, profiles, DescriptorKind::kNormalized);
}

// Same layout with absolute counts; the un-normalized ablation baseline.
inline HardwareDescriptor build_raw_descriptor(const std::string& device_id,
                                               std::span<const OperatorProfile> profiles) {
  return detail::build(device_id, profiles, DescriptorKind::kRaw);
}

// The two layouts differ by a per-variant factor of latency, so either one
// determines the other.
inline HardwareDescriptor raw_from_normalized(const HardwareDescriptor& normalized) {
  HardwareDescriptor raw = normalized;
  for (std::size_t v = 0; v < kNumVariants; ++v) {
    const double lat = normalized.latency(v);
    for (std::size_t i = 0; i < kNumCounters; ++i) raw.values[v * kDescriptorBlock + i] *= lat;
  }
  return raw;
}

inline void validate_descriptor(const HardwareDescriptor& d) {
  if (d.values.size() != kDescriptorSize) {
    throw StructuralError("descriptor for " + d.device_id + " has " + std::to_string(d.values.size()) +
                          " values, expected 105");
  }
  for (std::size_t v = 0; v < kNumVariants; ++v) {
    for (double c : d.counters(v)) {
      if (!(c >= 0.0) || !std::isfinite(c)) {
        throw DomainError("descriptor for " + d.device_id + " has a negative or non-finite counter");
      }
    }
    if (!(d.latency(v) > 0.0) || !std::isfinite(d.latency(v))) {
      throw DomainError("descriptor for " + d.device_id + " has a non-positive latency");
    }
  }
}

}  // namespace edgelat
