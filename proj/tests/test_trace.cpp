#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "hintrelic/rng.hpp"
#include "hintrelic/trace.hpp"
#include "hintrelic/trace_io.hpp"
#include "oracles.hpp"

using namespace hintrelic;
using namespace hintrelic::trace;

namespace {

std::string name_of(const testing::TestParamInfo<AlgorithmId>& info) {
  return std::string(to_string(info.param));
}

class PerAlgorithm : public testing::TestWithParam<AlgorithmId> {};

}  // namespace

TEST(Schema, EveryAlgorithmRegistered) {
  std::set<std::string> names;
  for (auto id : all_algorithms()) {
    names.insert(std::string(to_string(id)));
    EXPECT_EQ(parse_algorithm(to_string(id)), id);
    EXPECT_FALSE(schema(id).empty());
  }
  EXPECT_EQ(names.size(), kNumAlgorithms);
  EXPECT_FALSE(parse_algorithm("no_such_algorithm"));
}

TEST_P(PerAlgorithm, SchemaInvariants) {
  std::set<std::string> seen;
  int outputs = 0;
  for (const auto& f : schema(GetParam())) {
    EXPECT_TRUE(seen.insert(f.name).second) << "duplicate " << f.name;
    if (f.kind == Kind::categorical) {
      EXPECT_GE(f.num_classes, 2);
    }
    if (f.kind == Kind::pointer) {
      EXPECT_NE(f.location, Location::graph);
    }
    outputs += f.stage == Stage::output;
  }
  EXPECT_GE(outputs, 1);
  EXPECT_TRUE(seen.count("pos"));
}

TEST_P(PerAlgorithm, InstancesSatisfySchema) {
  const auto id = GetParam();
  for (int k = 0; k < 40; ++k) {
    const int n = 2 + k % 15;
    const auto g = sample_instance(id, n, derive_seed(1, "trace-test", k));
    EXPECT_NO_THROW(validate_instance(g));
    const auto& pos = g.input("pos");
    for (int i = 0; i < n; ++i) EXPECT_EQ(pos[i], static_cast<double>(i) / n);
    if (graph_kind(id) == GraphKind::undirected) {
      const auto& adj = g.input("adj");
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) EXPECT_EQ(adj[a * n + b], adj[b * n + a]);
    }
  }
}

TEST_P(PerAlgorithm, TrajectoryInvariants) {
  const auto id = GetParam();
  Rng rng(derive_seed(2, to_string(id)));
  for (int k = 0; k < 60; ++k) {
    const int n = static_cast<int>(rng.uniform_int(2, 12));
    const auto t = execute(sample_instance(id, n, rng.next_u64()));
    ASSERT_GE(t.steps(), 1);
    EXPECT_LE(t.steps(), max_steps(id, n));
    for (int s = 0; s < t.steps(); ++s) {
      const auto& frame = t.frames[s];
      EXPECT_EQ(frame.step, s + 1);
      for (const auto& spec : features(id, Stage::hint)) {
        ASSERT_TRUE(frame.hints.count(spec.name)) << spec.name;
        const auto& v = frame.hints.at(spec.name);
        ASSERT_EQ(v.size(), value_count(spec.location, n));
        if (spec.kind == Kind::pointer) {
          for (double p : v) EXPECT_TRUE(p >= 0 && p < n && p == std::floor(p)) << spec.name;
        }
        if (spec.kind == Kind::mask || spec.kind == Kind::mask_one) {
          for (double m : v) EXPECT_TRUE(m == 0.0 || m == 1.0);
        }
        if (spec.kind == Kind::mask_one) {
          EXPECT_EQ(std::accumulate(v.begin(), v.end(), 0.0), 1.0) << spec.name;
        }
      }
    }
    for (const auto& spec : features(id, Stage::output)) {
      ASSERT_TRUE(t.outputs.count(spec.name));
      EXPECT_EQ(t.outputs.at(spec.name).size(), value_count(spec.location, n));
    }
  }
}

TEST_P(PerAlgorithm, DeterministicExecution) {
  const auto g = sample_instance(GetParam(), 9, 77);
  EXPECT_EQ(execute(g), execute(g));
  EXPECT_EQ(sample_instance(GetParam(), 9, 77), g);
}

TEST_P(PerAlgorithm, OutputsMatchReference) {
  const auto id = GetParam();
  Rng rng(derive_seed(3, to_string(id)));
  for (int k = 0; k < 500; ++k) {
    const int n = static_cast<int>(rng.uniform_int(4, 16));
    const auto t = execute(sample_instance(id, n, rng.next_u64()));
    std::string why;
    ASSERT_TRUE(oracles::outputs_ok(t, &why)) << "instance " << k << " n=" << n << ": " << why;
  }
}

TEST_P(PerAlgorithm, JsonlRoundTrip) {
  const auto id = GetParam();
  std::vector<Trajectory> ts;
  for (int k = 0; k < 10; ++k) ts.push_back(execute(sample_instance(id, 3 + k, derive_seed(4, "rt", k))));
  std::stringstream ss;
  write_jsonl(ss, ts);
  const auto back = read_jsonl(ss);
  ASSERT_EQ(back.size(), ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    EXPECT_EQ(back[i], ts[i]);
    EXPECT_EQ(to_jsonl(back[i]), to_jsonl(ts[i]));
  }
}

TEST_P(PerAlgorithm, ReversalDeterminesPointer) {
  const auto id = GetParam();
  const auto t = execute(sample_instance(id, 7, 5));
  const auto r = reverse_pointers(t);
  const int n = 7;
  std::vector<std::string> pointers;
  for (const auto& spec : features(id, Stage::hint))
    if (spec.kind == Kind::pointer && spec.location == Location::node) pointers.push_back(spec.name);
  EXPECT_EQ(r.no_pointer_hints, pointers.empty());
  EXPECT_EQ(r.trajectory.extra_hints.size(), pointers.size());
  for (const auto& frame : r.trajectory.frames) {
    for (const auto& p : pointers) {
      const auto& ptr = frame.hints.at(p);
      const auto& rev = frame.hints.at("rev_" + p);
      // Each column a of rev holds exactly one 1, in row ptr[a].
      for (int a = 0; a < n; ++a) {
        int ones = 0, row = -1;
        for (int b = 0; b < n; ++b)
          if (rev[b * n + a] == 1.0) ++ones, row = b;
        EXPECT_EQ(ones, 1);
        EXPECT_EQ(row, static_cast<int>(ptr[a]));
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(All, PerAlgorithm, testing::ValuesIn(all_algorithms()), name_of);

TEST(Instance, ValidationRejectsBrokenInputs) {
  auto g = sample_instance(AlgorithmId::bfs, 5, 1);
  auto bad = g;
  bad.input("adj")[1] = 0.5;
  EXPECT_THROW(validate_instance(bad), std::invalid_argument);
  bad = g;
  bad.input("adj")[1] = 1.0 - bad.input("adj")[5];  // (0,1) no longer matches (1,0)
  EXPECT_THROW(validate_instance(bad), std::invalid_argument);
  bad = g;
  bad.node_inputs.erase("pos");
  EXPECT_THROW(validate_instance(bad), std::invalid_argument);
  bad = g;
  bad.input("pos")[2] = std::nan("");
  EXPECT_THROW(validate_instance(bad), std::invalid_argument);
}

TEST(Instance, PredOrderConversions) {
  const std::vector<int> order{3, 0, 2, 1};
  const auto pred = order_to_pred(order);
  EXPECT_EQ(pred, (Values{3, 2, 0, 3}));
  EXPECT_EQ(pred_to_order(pred), order);
}
