#pragma once

#include <algorithm>
#include <array>
#include <span>
#include <string>

#include "edgelat/archspace.hpp"
#include "edgelat/counters.hpp"
#include "edgelat/dataset.hpp"
#include "edgelat/errors.hpp"

namespace edgelat {

// Layer-wise look-up table: a network's latency is the per-inference
// overhead plus the sum of its operators' individually measured latencies.
struct LatencyLUT {
  std::string device_id;
  std::array<double, kNumVariants> per_variant_latency_s{};
  double overhead_s = 0.0;

  friend bool operator==(const LatencyLUT&, const LatencyLUT&) = default;
};

inline LatencyLUT lut_build(std::span<const OperatorProfile> profiles, double overhead_s,
                            const std::string& device_id = {}) {
  if (!(overhead_s >= 0.0)) throw DomainError("LUT overhead must be non-negative");
  const auto slot = detail::index_profiles(profiles);
  LatencyLUT lut{device_id, {}, overhead_s};
  for (std::size_t v = 0; v < kNumVariants; ++v) {
    validate_profile(*slot[v]);
    lut.per_variant_latency_s[v] = slot[v]->latency_s;
  }
  return lut;
}

// Descriptors carry each variant's mean latency, so a device record is
// enough to rebuild its table.
inline LatencyLUT lut_from_descriptor(const HardwareDescriptor& d, double overhead_s) {
  validate_descriptor(d);
  if (!(overhead_s >= 0.0)) throw DomainError("LUT overhead must be non-negative");
  LatencyLUT lut{d.device_id, {}, overhead_s};
  for (std::size_t v = 0; v < kNumVariants; ++v) lut.per_variant_latency_s[v] = d.latency(v);
  return lut;
}

inline double lut_predict(const LatencyLUT& lut, const CellArchitecture& arch, const MacroConfig& macro) {
  const OperatorCounts counts = operator_multiset(arch, macro);
  double total = lut.overhead_s;
  for (std::size_t v = 0; v < kNumVariants; ++v) {
    if (counts[v] != 0) total += static_cast<double>(counts[v]) * lut.per_variant_latency_s[v];
  }
  return total;
}

// Overhead estimate from measurements: the all-NONE architecture's latency
// when measured, else the device's fastest measured architecture.
inline double lut_overhead_from_samples(const MeasurementDataset& ds, const std::string& device_id) {
  double fastest = 0.0;
  bool any = false;
  for (const auto& s : ds.samples) {
    if (s.device_id != device_id) continue;
    if (s.arch_index == 0) return s.latency_s;
    fastest = any ? std::min(fastest, s.latency_s) : s.latency_s;
    any = true;
  }
  if (!any) throw ReferentialError("no samples for device '" + device_id + "' to estimate LUT overhead");
  return fastest;
}

}  // namespace edgelat
