#include <gtest/gtest.h>

#include <memory>

#include "hintrelic/augment.hpp"
#include "hintrelic/oracle.hpp"
#include "hintrelic/rng.hpp"
#include "fixtures.hpp"

using namespace hintrelic;
using trace::AlgorithmId;

namespace {

std::string name_of(const testing::TestParamInfo<AlgorithmId>& info) {
  return std::string(trace::to_string(info.param));
}

class AugmentPerAlgorithm : public testing::TestWithParam<AlgorithmId> {};

using fixtures::hand_pair;
using fixtures::keyed;

}  // namespace

TEST_P(AugmentPerAlgorithm, StructuralInvariants) {
  const auto id = GetParam();
  Rng rng(derive_seed(11, trace::to_string(id)));
  for (int k = 0; k < 300; ++k) {
    const int max_n = static_cast<int>(rng.uniform_int(4, 9));
    const int n = static_cast<int>(rng.uniform_int(2, max_n));
    const auto p = aug::generate_pair(id, n, rng.next_u64(), max_n);
    const int na = p.aug_instance.n;
    const auto& base = p.base->instance;
    ASSERT_GT(na, n);
    ASSERT_LE(na, max_n + 1);
    ASSERT_EQ(p.node_map.size(), static_cast<std::size_t>(n));
    ASSERT_EQ(p.contrast_mask.size(), static_cast<std::size_t>(p.base->steps()));
    EXPECT_GE(p.sampled_step, 1);
    EXPECT_LE(p.sampled_step, p.base->steps());
    for (int t = 1; t <= p.base->steps(); ++t) EXPECT_EQ(p.contrast_mask[t - 1], t <= p.sampled_step);
    EXPECT_NO_THROW(trace::validate_instance(p.aug_instance));

    // Base ids keep their place; appended ids come after every base id.
    int max_base = -1;
    for (int i = 0; i < n; ++i) max_base = std::max(max_base, p.node_map[i]);
    std::vector<bool> mapped(static_cast<std::size_t>(na), false);
    for (int i = 0; i < n; ++i) mapped[p.node_map[i]] = true;
    for (int a = 0; a < na; ++a)
      if (!mapped[a]) EXPECT_GT(a, max_base);

    // Base features restricted to the node_map image are bitwise equal.
    for (const auto& [name, v] : base.node_inputs) {
      const auto& av = p.aug_instance.node_inputs.at(name);
      for (int i = 0; i < n; ++i) EXPECT_EQ(av[p.node_map[i]], v[i]) << name;
    }
    for (const auto& [name, v] : base.edge_inputs) {
      const auto& av = p.aug_instance.edge_inputs.at(name);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) EXPECT_EQ(av[p.node_map[i] * na + p.node_map[j]], v[i * n + j]) << name;
    }
    for (const auto& [name, v] : base.graph_inputs) EXPECT_EQ(p.aug_instance.graph_inputs.at(name), v);

    if (id == AlgorithmId::binary_search) {
      const double target = base.graph_inputs.at("target")[0];
      for (int a = 0; a < na; ++a)
        if (!mapped[a]) EXPECT_NE(p.aug_instance.node_inputs.at("key")[a], target);
    }
    if (trace::family_of(id) == trace::Family::dfs_based) {
      const int entered = aug::entered_node(*p.base, p.sampled_step);
      const int entered_aug = p.node_map[entered];
      const auto& adj = p.aug_instance.edge_inputs.at("adj");
      for (int a = 0; a < na; ++a) {
        if (mapped[a]) continue;
        EXPECT_GT(a, entered_aug);
        EXPECT_TRUE(adj[entered_aug * na + a] == 1.0 || adj[a * na + entered_aug] == 1.0);
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(All, AugmentPerAlgorithm, testing::ValuesIn(trace::all_algorithms()), name_of);

TEST(Augment, SizeBoundOverManyPairs) {
  Rng rng(12);
  const auto& algs = trace::all_algorithms();
  for (int k = 0; k < 10000; ++k) {
    const auto id = algs[static_cast<std::size_t>(k) % algs.size()];
    const int n = static_cast<int>(rng.uniform_int(2, 8));
    const auto p = aug::generate_pair(id, n, rng.next_u64(), 8);
    ASSERT_LE(p.aug_instance.n, 9);
    ASSERT_GT(p.aug_instance.n, n);
  }
}

TEST(Augment, Deterministic) {
  for (auto id : trace::all_algorithms()) {
    const auto a = aug::generate_pair(id, 5, 99, 8);
    const auto b = aug::generate_pair(id, 5, 99, 8);
    EXPECT_EQ(a.aug_instance, b.aug_instance);
    EXPECT_EQ(a.node_map, b.node_map);
    EXPECT_EQ(aug::pair_to_jsonl(a, "x"), aug::pair_to_jsonl(b, "x"));
  }
}

TEST(Augment, NoRoomThrows) {
  const auto base = std::make_shared<const trace::Trajectory>(
      trace::execute(trace::sample_instance(AlgorithmId::minimum, 9, 1)));
  EXPECT_THROW(aug::augment(base, 1, 2, 8), std::invalid_argument);
}

TEST(Oracle, SameFirstStepVectors) {
  // Bubble sort on [2,1,3]: inserting 5 after the first two keys leaves the
  // first comparison unchanged, inserting it between them does not.
  const auto same = hand_pair({2, 1, 3}, {2, 1, 5, 3}, {0, 1, 3});
  const auto rs = oracle::check_equivalence(same);
  EXPECT_GE(rs.equivalent_up_to, 1);

  const auto diff = hand_pair({2, 1, 3}, {2, 5, 1, 3}, {0, 2, 3});
  const auto rd = oracle::check_equivalence(diff);
  EXPECT_EQ(rd.equivalent_up_to, 0);
  ASSERT_TRUE(rd.first_divergence);
  EXPECT_EQ(rd.first_divergence->step, 1);
}

TEST(Oracle, IdentityAugmentationMatchesFully) {
  for (auto id : trace::all_algorithms()) {
    const auto g = trace::sample_instance(id, 6, 21);
    aug::AugmentedPair p;
    p.base = std::make_shared<const trace::Trajectory>(trace::execute(g));
    p.aug_instance = g;
    p.node_map = {0, 1, 2, 3, 4, 5};
    p.sampled_step = p.base->steps();
    p.family = aug::exactness(id);
    const auto r = oracle::check_equivalence(p);
    EXPECT_TRUE(r.full_match) << trace::to_string(id);
    EXPECT_FALSE(r.first_divergence);
    EXPECT_EQ(r.equivalent_up_to, p.base->steps());
  }
}

TEST(Oracle, DetectsBrokenAugmentation) {
  // Relabelling two base nodes in the node map breaks the correspondence.
  int detected = 0;
  for (auto id : {AlgorithmId::bfs, AlgorithmId::dijkstra, AlgorithmId::insertion_sort}) {
    auto p = aug::generate_pair(id, 6, 5, 8);
    std::swap(p.node_map[1], p.node_map[2]);
    const auto r = oracle::check_equivalence(p);
    EXPECT_TRUE(r.first_divergence) << trace::to_string(id);
    detected += !oracle::certify_family(p, r);
  }
  EXPECT_EQ(detected, 3);

  // Changing a base key in the augmented instance changes the sort.
  auto p = aug::generate_pair(AlgorithmId::insertion_sort, 6, 8, 8);
  auto& key = p.aug_instance.node_inputs.at("key");
  std::swap(key[p.node_map[0]], key[p.node_map[5]]);
  EXPECT_FALSE(oracle::certify_family(p, oracle::check_equivalence(p)));
}

TEST(Oracle, ReportInvariants) {
  for (auto id : trace::all_algorithms()) {
    for (int k = 0; k < 20; ++k) {
      const auto p = aug::generate_pair(id, 3 + k % 6, derive_seed(13, "inv", k), 8);
      const auto r = oracle::check_equivalence(p);
      EXPECT_GE(r.equivalent_up_to, 0);
      EXPECT_LE(r.equivalent_up_to, p.base->steps());
      if (r.full_match) EXPECT_FALSE(r.first_divergence);
    }
  }
}

TEST(Oracle, ExactFamiliesCertifyOnSmallSample) {
  for (auto id : trace::all_algorithms()) {
    if (aug::exactness(id) != aug::Exactness::exact) continue;
    const auto s = oracle::validate_algorithm(id, 100, 14, 2, 8);
    EXPECT_EQ(s.pass_rate, 1.0) << trace::to_string(id) << (s.failures.empty() ? "" : ": " + s.failures[0]);
  }
}

TEST(Oracle, CsvLayout) {
  EXPECT_EQ(oracle::csv_header(), "algorithm,pairs_checked,pass_rate,mean_equivalent_up_to");
  oracle::ValidationSummary s;
  s.algorithm = AlgorithmId::bfs;
  s.pairs_checked = 3;
  s.pass_rate = 1.0;
  s.mean_equivalent_up_to = 2.5;
  EXPECT_EQ(oracle::csv_row(s), "bfs,3,1.000000,2.500000");
}
