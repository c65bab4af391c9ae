#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "edgelat/archspace.hpp"
#include "edgelat/counters.hpp"
#include "edgelat/errors.hpp"
#include "edgelat/synthdev.hpp"

namespace edgelat {

struct DeviceRecord {
  std::string device_id;
  RuntimeKind runtime = RuntimeKind::kImported;
  MacroConfig macro;
  HardwareDescriptor descriptor;                    // normalized
  std::optional<HardwareDescriptor> raw_descriptor;  // absolute counts

  HardwareDescriptor descriptor_of(DescriptorKind kind) const {
    if (kind == DescriptorKind::kNormalized) return descriptor;
    return raw_descriptor ? *raw_descriptor : raw_from_normalized(descriptor);
  }

  friend bool operator==(const DeviceRecord&, const DeviceRecord&) = default;
};

struct MeasurementDataset {
  std::vector<DeviceRecord> devices;
  std::vector<LatencySample> samples;
  MacroConfig macro;

  const DeviceRecord* find_device(std::string_view id) const {
    for (const auto& d : devices) {
      if (d.device_id == id) return &d;
    }
    return nullptr;
  }

  const DeviceRecord& device(std::string_view id) const {
    const DeviceRecord* d = find_device(id);
    if (d == nullptr) throw ReferentialError("device '" + std::string(id) + "' not in dataset");
    return *d;
  }

  friend bool operator==(const MeasurementDataset&, const MeasurementDataset&) = default;
};

// Per-device arch_index -> latency lookup.
class LatencyTable {
 public:
  explicit LatencyTable(const MeasurementDataset& ds) {
    for (const auto& s : ds.samples) table_[s.device_id][s.arch_index] = s.latency_s;
  }

  std::optional<double> find(std::string_view device, std::uint32_t arch) const {
    auto d = table_.find(std::string(device));
    if (d == table_.end()) return std::nullopt;
    auto a = d->second.find(arch);
    if (a == d->second.end()) return std::nullopt;
    return a->second;
  }

  double at(std::string_view device, std::uint32_t arch) const {
    auto v = find(device, arch);
    if (!v) {
      throw ReferentialError("no latency sample for device '" + std::string(device) + "' arch " +
                             std::to_string(arch));
    }
    return *v;
  }

  const std::unordered_map<std::uint32_t, double>* device_samples(std::string_view device) const {
    auto d = table_.find(std::string(device));
    return d == table_.end() ? nullptr : &d->second;
  }

 private:
  std::unordered_map<std::string, std::unordered_map<std::uint32_t, double>> table_;
};

inline void validate_dataset(const MeasurementDataset& ds) {
  std::map<std::string, int> ids;
  for (const auto& d : ds.devices) {
    if (!ids.emplace(d.device_id, 0).second) throw ReferentialError("duplicate device '" + d.device_id + "'");
    validate_descriptor(d.descriptor);
    if (d.raw_descriptor) validate_descriptor(*d.raw_descriptor);
  }
  std::map<std::pair<std::string, std::uint32_t>, int> seen;
  for (const auto& s : ds.samples) {
    if (!ids.contains(s.device_id)) throw ReferentialError("sample references unknown device '" + s.device_id + "'");
    if (s.arch_index >= kNumArchitectures) throw RangeError("sample arch index out of range");
    if (!(s.latency_s > 0.0)) throw DomainError("sample latency must be positive");
    if (!seen.emplace(std::make_pair(s.device_id, s.arch_index), 0).second) {
      throw ReferentialError("duplicate sample for device '" + s.device_id + "' arch " +
                             std::to_string(s.arch_index));
    }
  }
}

// One sample per (device, architecture at each position of the range), plus
// each device's descriptors from 1000-run operator profiles.
inline MeasurementDataset generate_dataset(const std::vector<SyntheticDevice>& pool, const ArchRange& range,
                                           const MacroConfig& macro,
                                           ArchOrdering ordering = ArchOrdering::kBenchmark) {
  const auto archs = arch_indices_in(range, ordering);
  MeasurementDataset ds;
  ds.macro = macro;
  for (const auto& dev : pool) {
    validate_device(dev);
    const auto profiles = profile_all_operators(dev, 1000);
    DeviceRecord rec;
    rec.device_id = dev.device_id;
    rec.runtime = dev.runtime.kind;
    rec.macro = macro;
    rec.descriptor = build_descriptor(dev.device_id, profiles);
    rec.raw_descriptor = build_raw_descriptor(dev.device_id, profiles);
    ds.devices.push_back(std::move(rec));
  }
  ds.samples.reserve(pool.size() * archs.size());
  for (const auto& dev : pool) {
    for (auto a : archs) ds.samples.push_back(measure_e2e(dev, architecture_from_index(a), macro));
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Text format
//
//   edgelat-dataset v1
//   device <id> runtime=<additive|optimized|imported> macro.cells_per_stage=<int>
//   descriptor <105 reals>
//   raw_descriptor <105 reals>          (optional)
//   sample <device_id> <arch_index> <latency_seconds>
//
// Reals carry 17 significant digits so doubles round-trip exactly.

inline constexpr std::string_view kDatasetHeader = "edgelat-dataset v1";

inline std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline double parse_real(std::string_view tok, const std::string& path, std::size_t line,
                         std::string_view field) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size() || !std::isfinite(v)) {
    throw ParseError(path, line, std::string(field) + ": '" + std::string(tok) + "' is not a finite real");
  }
  return v;
}

inline std::int64_t parse_int(std::string_view tok, const std::string& path, std::size_t line,
                              std::string_view field) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size()) {
    throw ParseError(path, line, std::string(field) + ": '" + std::string(tok) + "' is not an integer");
  }
  return v;
}

inline std::string_view expect_key(std::string_view tok, std::string_view key, const std::string& path,
                                   std::size_t line) {
  if (tok.size() <= key.size() || tok.substr(0, key.size()) != key || tok[key.size()] != '=') {
    throw ParseError(path, line, "expected '" + std::string(key) + "=<value>', got '" + std::string(tok) + "'");
  }
  return tok.substr(key.size() + 1);
}

inline void write_vector(std::ostream& os, std::string_view tag, const std::vector<double>& v) {
  os << tag;
  for (double x : v) os << ' ' << format_real(x);
  os << '\n';
}

}  // namespace detail

inline void write_dataset(std::ostream& os, const MeasurementDataset& ds) {
  validate_dataset(ds);
  os << kDatasetHeader << '\n';
  os << "# devices=" << ds.devices.size() << " samples=" << ds.samples.size() << '\n';
  for (const auto& d : ds.devices) {
    os << "device " << d.device_id << " runtime=" << runtime_name(d.runtime)
       << " macro.cells_per_stage=" << d.macro.cells_per_stage << '\n';
    detail::write_vector(os, "descriptor", d.descriptor.values);
    if (d.raw_descriptor) detail::write_vector(os, "raw_descriptor", d.raw_descriptor->values);
  }
  for (const auto& s : ds.samples) {
    os << "sample " << s.device_id << ' ' << s.arch_index << ' ' << format_real(s.latency_s) << '\n';
  }
}

inline MeasurementDataset read_dataset(std::istream& is, const std::string& path = "<stream>") {
  MeasurementDataset ds;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  DeviceRecord* current = nullptr;
  std::map<std::string, std::size_t> device_line;
  std::map<std::pair<std::string, std::uint32_t>, std::size_t> sample_line;
  std::vector<std::size_t> sample_linenos;

  auto read_vec = [&](const std::vector<std::string_view>& toks, std::string_view field) {
    if (toks.size() != kDescriptorSize + 1) {
      throw ParseError(path, lineno, std::string(field) + ": expected 105 values, got " +
                                          std::to_string(toks.size() - 1));
    }
    std::vector<double> v(kDescriptorSize);
    for (std::size_t i = 0; i < kDescriptorSize; ++i) {
      v[i] = detail::parse_real(toks[i + 1], path, lineno, std::string(field) + "[" + std::to_string(i) + "]");
    }
    return v;
  };

  while (std::getline(is, line)) {
    ++lineno;
    const auto toks = detail::split_ws(line);
    if (toks.empty() || toks[0].front() == '#') continue;
    if (!header) {
      if (toks.size() != 2 || toks[0] != "edgelat-dataset" || toks[1] != "v1") {
        throw ParseError(path, lineno, "header: expected 'edgelat-dataset v1'");
      }
      header = true;
      continue;
    }
    const std::string_view kw = toks[0];
    if (kw == "device") {
      if (toks.size() != 4) throw ParseError(path, lineno, "device: expected 3 fields");
      const std::string id(toks[1]);
      if (device_line.contains(id)) {
        throw ParseError(path, lineno, "device: duplicate id '" + id + "' (first on line " +
                                            std::to_string(device_line[id]) + ")");
      }
      auto rt = parse_runtime(detail::expect_key(toks[2], "runtime", path, lineno));
      if (!rt) throw ParseError(path, lineno, "runtime: unknown value '" + std::string(toks[2]) + "'");
      const auto cps = detail::parse_int(detail::expect_key(toks[3], "macro.cells_per_stage", path, lineno), path,
                                         lineno, "macro.cells_per_stage");
      if (cps < 1) throw ParseError(path, lineno, "macro.cells_per_stage: must be positive");
      device_line[id] = lineno;
      DeviceRecord rec;
      rec.device_id = id;
      rec.runtime = *rt;
      rec.macro.cells_per_stage = static_cast<int>(cps);
      rec.descriptor.device_id = id;
      rec.descriptor.values.clear();
      ds.devices.push_back(std::move(rec));
      current = &ds.devices.back();
    } else if (kw == "descriptor" || kw == "raw_descriptor") {
      if (current == nullptr) throw ParseError(path, lineno, std::string(kw) + ": no preceding device line");
      auto values = read_vec(toks, kw);
      HardwareDescriptor d{current->device_id, std::move(values)};
      try {
        validate_descriptor(d);
      } catch (const Error& e) {
        throw ParseError(path, lineno, std::string(kw) + ": " + e.what());
      }
      if (kw == "descriptor") {
        if (!current->descriptor.values.empty()) throw ParseError(path, lineno, "descriptor: repeated");
        current->descriptor = std::move(d);
      } else {
        if (current->raw_descriptor) throw ParseError(path, lineno, "raw_descriptor: repeated");
        current->raw_descriptor = std::move(d);
      }
    } else if (kw == "sample") {
      if (toks.size() != 4) throw ParseError(path, lineno, "sample: expected 3 fields");
      const auto arch = detail::parse_int(toks[2], path, lineno, "arch_index");
      if (arch < 0 || arch >= static_cast<std::int64_t>(kNumArchitectures)) {
        throw ParseError(path, lineno, "arch_index: " + std::to_string(arch) + " outside [0, 15624]");
      }
      const double lat = detail::parse_real(toks[3], path, lineno, "latency_seconds");
      if (!(lat > 0.0)) throw ParseError(path, lineno, "latency_seconds: must be positive");
      LatencySample s{std::string(toks[1]), static_cast<std::uint32_t>(arch), lat};
      auto key = std::make_pair(s.device_id, s.arch_index);
      if (auto it = sample_line.find(key); it != sample_line.end()) {
        throw ReferentialError(path + ":" + std::to_string(lineno) + ": duplicate sample (" + s.device_id + ", " +
                               std::to_string(arch) + "), first on line " + std::to_string(it->second));
      }
      sample_line.emplace(key, lineno);
      sample_linenos.push_back(lineno);
      ds.samples.push_back(std::move(s));
    } else {
      throw ParseError(path, lineno, "unknown record '" + std::string(kw) + "'");
    }
  }
  if (!header) throw ParseError(path, lineno, "header: missing 'edgelat-dataset v1'");

  for (const auto& d : ds.devices) {
    if (d.descriptor.values.empty()) {
      throw ParseError(path, device_line[d.device_id], "device '" + d.device_id + "' has no descriptor line");
    }
  }
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    if (!device_line.contains(ds.samples[i].device_id)) {
      throw ReferentialError(path + ":" + std::to_string(sample_linenos[i]) + ": sample references unknown device '" +
                             ds.samples[i].device_id + "'");
    }
  }
  if (!ds.devices.empty()) {
    ds.macro = ds.devices.front().macro;
    for (const auto& d : ds.devices) {
      if (d.macro != ds.macro) {
        throw ParseError(path, device_line[d.device_id], "macro.cells_per_stage: differs between devices");
      }
    }
  }
  return ds;
}

inline void export_dataset(const MeasurementDataset& ds, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  write_dataset(os, ds);
  if (!os) throw Error("write to '" + path + "' failed");
}

inline MeasurementDataset import_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path + "'");
  return read_dataset(is, path);
}

}  // namespace edgelat
