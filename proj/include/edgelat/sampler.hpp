#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "edgelat/errors.hpp"
#include "edgelat/random.hpp"

namespace edgelat {

enum class SamplingStrategy : std::uint8_t { kTargetedUniform, kRandom };

inline std::string_view strategy_name(SamplingStrategy s) {
  return s == SamplingStrategy::kTargetedUniform ? "targeted_uniform" : "random";
}

struct AdaptationSet {
  std::string device_id;
  std::vector<std::uint32_t> arch_indices;
  SamplingStrategy strategy = SamplingStrategy::kTargetedUniform;
  std::uint64_t seed = 0;

  friend bool operator==(const AdaptationSet&, const AdaptationSet&) = default;
};

using ArchLatency = std::pair<std::uint32_t, double>;
using DeviceLatencies = std::map<std::string, std::vector<ArchLatency>>;

// Rank bins: for n bins over X ranks, bin b covers [b*(X/n), (b+1)*(X/n)) and
// the last bin runs to X.
inline std::pair<std::size_t, std::size_t> rank_bin(std::size_t b, std::size_t n, std::size_t x) {
  const std::size_t width = x / n;
  return {b * width, b + 1 == n ? x : (b + 1) * width};
}

// Ranks each training device's architectures by latency, pools rank bin b
// across devices, and draws one architecture per bin. A draw that repeats an
// earlier pick is redrawn among the bin's remaining entries; an exhausted bin
// falls back to any architecture not yet picked.
inline AdaptationSet targeted_uniform_sample(const DeviceLatencies& train_latencies, std::size_t n,
                                             std::uint64_t seed) {
  if (train_latencies.empty()) throw StructuralError("targeted uniform sampling needs at least one device");

  std::vector<std::uint32_t> universe;
  for (const auto& [arch, lat] : train_latencies.begin()->second) universe.push_back(arch);
  std::sort(universe.begin(), universe.end());
  if (std::adjacent_find(universe.begin(), universe.end()) != universe.end()) {
    throw StructuralError("duplicate architecture in latency list");
  }
  const std::size_t x = universe.size();
  for (const auto& [dev, rows] : train_latencies) {
    std::vector<std::uint32_t> ids;
    for (const auto& [arch, lat] : rows) ids.push_back(arch);
    std::sort(ids.begin(), ids.end());
    if (ids != universe) {
      throw StructuralError("device '" + dev + "' does not list the same architectures as the others");
    }
  }
  if (n < 1 || n > x) {
    throw RangeError("cannot draw " + std::to_string(n) + " adaptation samples from " + std::to_string(x) +
                     " architectures");
  }

  std::vector<std::vector<std::uint32_t>> bins(n);
  for (const auto& [dev, rows] : train_latencies) {
    auto ranked = rows;
    std::sort(ranked.begin(), ranked.end(), [](const ArchLatency& a, const ArchLatency& b) {
      return a.second != b.second ? a.second < b.second : a.first < b.first;
    });
    for (std::size_t b = 0; b < n; ++b) {
      const auto [lo, hi] = rank_bin(b, n, x);
      for (std::size_t r = lo; r < hi; ++r) bins[b].push_back(ranked[r].first);
    }
  }

  Rng rng(derive_seed(seed, 0, "targeted_uniform"));
  AdaptationSet out{"", {}, SamplingStrategy::kTargetedUniform, seed};
  std::set<std::uint32_t> picked;
  for (auto& entries : bins) {
    std::uint32_t choice = 0;
    bool found = false;
    while (!entries.empty()) {
      const std::size_t i = rng.below(entries.size());
      if (!picked.contains(entries[i])) {
        choice = entries[i];
        found = true;
        break;
      }
      const std::uint32_t dup = entries[i];
      std::erase(entries, dup);
    }
    if (!found) {
      std::vector<std::uint32_t> remaining;
      for (auto a : universe) {
        if (!picked.contains(a)) remaining.push_back(a);
      }
      choice = remaining[rng.below(remaining.size())];
    }
    picked.insert(choice);
    out.arch_indices.push_back(choice);
  }
  return out;
}

inline AdaptationSet random_sample(const std::vector<std::uint32_t>& arch_indices, std::size_t n,
                                   std::uint64_t seed) {
  if (n > arch_indices.size()) {
    throw RangeError("cannot draw " + std::to_string(n) + " of " + std::to_string(arch_indices.size()) +
                     " architectures");
  }
  std::vector<std::uint32_t> pool = arch_indices;
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  if (n > pool.size()) throw RangeError("not enough distinct architectures to draw from");
  Rng rng(derive_seed(seed, 0, "random_sample"));
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < n; ++i) {
    std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
  }
  pool.resize(n);
  return {"", std::move(pool), SamplingStrategy::kRandom, seed};
}

// Each row appears k times: the original plus k-1 verbatim clones.
template <typename Row>
std::vector<Row> augment(const std::vector<Row>& rows, int k) {
  if (k < 1) throw RangeError("augmentation factor must be >= 1");
  std::vector<Row> out;
  out.reserve(rows.size() * static_cast<std::size_t>(k));
  for (const auto& r : rows) {
    for (int c = 0; c < k; ++c) out.push_back(r);
  }
  return out;
}

}  // namespace edgelat
