#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "edgelat/errors.hpp"
#include "edgelat/random.hpp"
#include "edgelat/sampler.hpp"

using namespace edgelat;

namespace {

DeviceLatencies random_table(std::size_t devices, std::size_t x, std::uint64_t seed) {
  Rng rng(seed);
  DeviceLatencies t;
  for (std::size_t d = 0; d < devices; ++d) {
    auto& rows = t["dev" + std::to_string(d)];
    const double scale = rng.log_uniform(0.01, 1.0);
    for (std::size_t a = 0; a < x; ++a) {
      rows.emplace_back(static_cast<std::uint32_t>(a), scale * rng.log_uniform(0.1, 10.0));
    }
  }
  return t;
}

double spread(const DeviceLatencies& t, const std::vector<std::uint32_t>& picks) {
  const auto& rows = t.begin()->second;
  double lo = 1e300, hi = -1e300;
  for (auto p : picks) {
    const double v = rows[p].second;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo;
}

}  // namespace

TEST(RankBin, ThreeDevicesNineHundredArchsTenBins) {
  for (std::size_t b = 0; b < 10; ++b) {
    const auto [lo, hi] = rank_bin(b, 10, 900);
    EXPECT_EQ(3 * (hi - lo), 270u);
  }
}

TEST(RankBin, LastBinAbsorbsRemainder) {
  EXPECT_EQ(rank_bin(2, 3, 10), (std::pair<std::size_t, std::size_t>{6, 10}));
  EXPECT_EQ(rank_bin(0, 3, 10), (std::pair<std::size_t, std::size_t>{0, 3}));
}

TEST(Targeted, FourArchitecturesTwoBins) {
  const DeviceLatencies t{{"d", {{0, 1.0}, {1, 2.0}, {2, 3.0}, {3, 4.0}}}};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto s = targeted_uniform_sample(t, 2, seed);
    ASSERT_EQ(s.arch_indices.size(), 2u);
    EXPECT_LE(s.arch_indices[0], 1u);
    EXPECT_GE(s.arch_indices[1], 2u);
    const double lat0 = t.at("d")[s.arch_indices[0]].second;
    const double lat1 = t.at("d")[s.arch_indices[1]].second;
    EXPECT_GE(lat1 - lat0, 1.0);
  }
}

TEST(Targeted, EveryArchitectureWhenNEqualsX) {
  const auto t = random_table(1, 37, 4);
  const auto s = targeted_uniform_sample(t, 37, 9);
  std::set<std::uint32_t> got(s.arch_indices.begin(), s.arch_indices.end());
  EXPECT_EQ(got.size(), 37u);
}

TEST(Targeted, OnePickPerQuantileWithOneDevice) {
  const auto t = random_table(1, 900, 12);
  auto ranked = t.begin()->second;
  std::sort(ranked.begin(), ranked.end(), [](auto& a, auto& b) { return a.second < b.second; });
  std::vector<std::size_t> rank_of(900);
  for (std::size_t r = 0; r < ranked.size(); ++r) rank_of[ranked[r].first] = r;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = targeted_uniform_sample(t, 10, seed);
    std::vector<int> per_bin(10, 0);
    for (auto a : s.arch_indices) ++per_bin[rank_of[a] / 90];
    for (int c : per_bin) EXPECT_EQ(c, 1);
  }
}

TEST(Targeted, DistinctWithManyDevices) {
  const auto t = random_table(3, 900, 2);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto s = targeted_uniform_sample(t, 100, seed);
    std::set<std::uint32_t> u(s.arch_indices.begin(), s.arch_indices.end());
    EXPECT_EQ(u.size(), 100u);
  }
}

TEST(Targeted, DeterministicPerSeed) {
  const auto t = random_table(3, 900, 2);
  EXPECT_EQ(targeted_uniform_sample(t, 10, 5), targeted_uniform_sample(t, 10, 5));
  EXPECT_NE(targeted_uniform_sample(t, 10, 5).arch_indices, targeted_uniform_sample(t, 10, 6).arch_indices);
}

TEST(Targeted, Errors) {
  EXPECT_THROW(targeted_uniform_sample({}, 1, 0), StructuralError);
  const auto t = random_table(2, 10, 1);
  EXPECT_THROW(targeted_uniform_sample(t, 0, 0), RangeError);
  EXPECT_THROW(targeted_uniform_sample(t, 11, 0), RangeError);
  auto bad = t;
  bad["dev1"].pop_back();
  EXPECT_THROW(targeted_uniform_sample(bad, 2, 0), StructuralError);
}

TEST(Targeted, SpreadDominatesRandom) {
  const auto t = random_table(1, 900, 77);
  std::vector<std::uint32_t> ids(900);
  for (std::uint32_t i = 0; i < 900; ++i) ids[i] = i;
  double tu = 0.0, rnd = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    tu += spread(t, targeted_uniform_sample(t, 10, seed).arch_indices);
    rnd += spread(t, random_sample(ids, 10, seed).arch_indices);
  }
  EXPECT_GE(tu, rnd);
}

TEST(Random, WholeListWhenNEqualsLength) {
  const std::vector<std::uint32_t> ids{5, 1, 9, 3};
  auto s = random_sample(ids, 4, 1);
  std::sort(s.arch_indices.begin(), s.arch_indices.end());
  EXPECT_EQ(s.arch_indices, (std::vector<std::uint32_t>{1, 3, 5, 9}));
}

TEST(Random, DistinctInRangeAndDeterministic) {
  std::vector<std::uint32_t> ids(900);
  for (std::uint32_t i = 0; i < 900; ++i) ids[i] = i;
  const auto s = random_sample(ids, 10, 3);
  std::set<std::uint32_t> u(s.arch_indices.begin(), s.arch_indices.end());
  EXPECT_EQ(u.size(), 10u);
  for (auto a : u) EXPECT_LT(a, 900u);
  EXPECT_EQ(random_sample(ids, 10, 3), s);
  EXPECT_THROW(random_sample(ids, 901, 3), RangeError);
}

TEST(Augment, IdentityAndClones) {
  const std::vector<int> rows{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  EXPECT_EQ(augment(rows, 1), rows);
  const auto out = augment(rows, 7);
  EXPECT_EQ(out.size(), 70u);
  for (int r : rows) EXPECT_EQ(std::count(out.begin(), out.end(), r), 7);
  EXPECT_THROW(augment(rows, 0), RangeError);
}
