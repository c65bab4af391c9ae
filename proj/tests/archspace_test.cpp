#include <gtest/gtest.h>

#include <set>

#include "edgelat/archspace.hpp"
#include "edgelat/errors.hpp"

using namespace edgelat;
using K = OperatorKind;

TEST(OperatorVariant, IndexIsKindTimesThreePlusWidthOrder) {
  EXPECT_EQ((OperatorVariant{K::kNone, 16}.index()), 0u);
  EXPECT_EQ((OperatorVariant{K::kSkipConnect, 32}.index()), 4u);
  EXPECT_EQ((OperatorVariant{K::kConv3x3, 64}.index()), 11u);
  EXPECT_EQ((OperatorVariant{K::kAvgPool3x3, 64}.index()), 14u);
  for (std::size_t v = 0; v < kNumVariants; ++v) EXPECT_EQ(OperatorVariant::from_index(v).index(), v);
}

TEST(Architecture, IndexZeroIsAllNone) {
  const auto a = architecture_from_index(0);
  for (auto e : a.edges) EXPECT_EQ(e, K::kNone);
}

TEST(Architecture, LastIndexIsAllAvgPool) {
  const auto a = architecture_from_index(15624);
  for (auto e : a.edges) EXPECT_EQ(e, K::kAvgPool3x3);
}

TEST(Architecture, IndexSevenExpandsBaseFive) {
  const auto a = architecture_from_index(7);
  const std::array<K, 6> want{K::kNone, K::kNone, K::kNone, K::kNone, K::kSkipConnect, K::kConv1x1};
  EXPECT_EQ(a.edges, want);
}

TEST(Architecture, OutOfRangeThrows) {
  EXPECT_THROW(architecture_from_index(-1), RangeError);
  EXPECT_THROW(architecture_from_index(15625), RangeError);
}

TEST(Architecture, ExhaustiveRoundTrip) {
  for (std::uint32_t i = 0; i < kNumArchitectures; ++i) {
    const auto a = architecture_from_index(i);
    ASSERT_EQ(a.index, i);
    ASSERT_EQ(CellArchitecture::index_of(a.edges), i);
  }
}

TEST(Architecture, ToStringGroupsEdgesByTarget) {
  EXPECT_EQ(architecture_from_index(7).to_string(),
            "|none~0|+|none~0|none~1|+|none~0|skip_connect~1|conv_1x1~2|");
}

TEST(Encoding, AllNone) {
  const auto v = encode_architecture(architecture_from_index(0));
  for (std::size_t e = 0; e < 6; ++e) {
    for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(v[e * 5 + k], k == 0 ? 1.0 : 0.0);
  }
}

TEST(Encoding, AllAvgPool) {
  const auto v = encode_architecture(architecture_from_index(15624));
  for (std::size_t e = 0; e < 6; ++e) {
    for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(v[e * 5 + k], k == 4 ? 1.0 : 0.0);
  }
}

TEST(Encoding, IndexSevenBlocks) {
  const auto v = encode_architecture(architecture_from_index(7));
  const ArchEncoding want{1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0,
                          1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0};
  EXPECT_EQ(v, want);
}

TEST(Encoding, InjectiveAndOneHot) {
  std::set<ArchEncoding> seen;
  for (std::uint32_t i = 0; i < kNumArchitectures; ++i) {
    const auto v = encode_architecture(architecture_from_index(i));
    double ones = 0.0;
    for (double x : v) ones += x;
    ASSERT_EQ(ones, 6.0);
    ASSERT_TRUE(seen.insert(v).second) << "collision at " << i;
  }
}

TEST(Multiset, AllNoneIsZero) {
  for (int cps : {1, 5, 9}) {
    const auto c = operator_multiset(architecture_from_index(0), MacroConfig{cps});
    for (auto x : c) EXPECT_EQ(x, 0);
  }
}

TEST(Multiset, AllConv3x3FiveCellsPerStage) {
  const auto a = CellArchitecture::from_edges({K::kConv3x3, K::kConv3x3, K::kConv3x3, K::kConv3x3, K::kConv3x3,
                                               K::kConv3x3});
  const auto c = operator_multiset(a, MacroConfig{5});
  for (std::size_t v = 0; v < kNumVariants; ++v) {
    EXPECT_EQ(c[v], OperatorVariant::from_index(v).kind == K::kConv3x3 ? 30 : 0);
  }
}

TEST(Multiset, IndexSevenOneCellPerStage) {
  const auto c = operator_multiset(architecture_from_index(7), MacroConfig{1});
  for (std::size_t v = 0; v < kNumVariants; ++v) {
    const auto k = OperatorVariant::from_index(v).kind;
    EXPECT_EQ(c[v], (k == K::kSkipConnect || k == K::kConv1x1) ? 1 : 0);
  }
}

TEST(Multiset, LinearInCellsPerStage) {
  for (std::uint32_t i = 0; i < kNumArchitectures; i += 97) {
    const auto a = architecture_from_index(i);
    const auto one = operator_multiset(a, MacroConfig{1});
    const auto four = operator_multiset(a, MacroConfig{4});
    for (std::size_t v = 0; v < kNumVariants; ++v) ASSERT_EQ(four[v], 4 * one[v]);
  }
}

TEST(Multiset, RejectsNonPositiveCells) {
  EXPECT_THROW(operator_multiset(architecture_from_index(1), MacroConfig{0}), RangeError);
}

TEST(Ordering, BenchmarkIsPermutation) {
  const auto& p = benchmark_permutation();
  ASSERT_EQ(p.size(), kNumArchitectures);
  std::set<std::uint32_t> s(p.begin(), p.end());
  EXPECT_EQ(s.size(), kNumArchitectures);
  EXPECT_EQ(*s.rbegin(), 15624u);
}

TEST(Ordering, CanonicalIsIdentity) {
  for (std::int64_t i : {0, 7, 899, 15624}) EXPECT_EQ(arch_index_at(i, ArchOrdering::kCanonical), i);
}

TEST(Ordering, BenchmarkSplitsShareEveryEdgeOperator) {
  const auto train = arch_indices_in({0, 899}, ArchOrdering::kBenchmark);
  const auto test = arch_indices_in({1800, 2699}, ArchOrdering::kBenchmark);
  ASSERT_EQ(train.size(), 900u);
  ASSERT_EQ(test.size(), 900u);
  for (std::size_t e = 0; e < kNumEdges; ++e) {
    std::set<K> a, b;
    for (auto i : train) a.insert(architecture_from_index(i).edges[e]);
    for (auto i : test) b.insert(architecture_from_index(i).edges[e]);
    EXPECT_EQ(a.size(), 5u);
    EXPECT_EQ(b.size(), 5u);
  }
  std::set<std::uint32_t> tr(train.begin(), train.end());
  for (auto i : test) EXPECT_FALSE(tr.contains(i));
}

TEST(Ordering, RangeValidation) {
  EXPECT_THROW(validate_range({5, 4}), RangeError);
  EXPECT_THROW(validate_range({0, 15625}), RangeError);
  EXPECT_NO_THROW(validate_range({0, 0}));
  EXPECT_TRUE((ArchRange{0, 899}.overlaps({899, 1000})));
  EXPECT_FALSE((ArchRange{0, 899}.overlaps({1800, 2699})));
}
