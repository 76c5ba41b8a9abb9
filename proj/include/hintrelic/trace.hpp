#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hintrelic::trace {

enum class AlgorithmId {
  articulation_points,
  bridges,
  dfs,
  scc,
  topological_sort,
  bellman_ford,
  bfs,
  dag_shortest_paths,
  dijkstra,
  floyd_warshall,
  mst_kruskal,
  mst_prim,
  insertion_sort,
  bubble_sort,
  quicksort,
  heapsort,
  binary_search,
  minimum,
};

inline constexpr std::size_t kNumAlgorithms = 18;

const std::array<AlgorithmId, kNumAlgorithms>& all_algorithms();
std::string_view to_string(AlgorithmId id);
std::optional<AlgorithmId> parse_algorithm(std::string_view name);

enum class Family { dfs_based, graph_based, sorting, searching };
Family family_of(AlgorithmId id);
std::string_view to_string(Family f);

// Graph flavour produced by the sampler for graph families.
enum class GraphKind { none, undirected, directed, dag };
GraphKind graph_kind(AlgorithmId id);
bool is_weighted(AlgorithmId id);
bool has_source(AlgorithmId id);

enum class Stage { input, hint, output };
enum class Location { node, edge, graph };
enum class Kind { scalar, mask, mask_one, categorical, pointer };

std::string_view to_string(Stage s);
std::string_view to_string(Location l);
std::string_view to_string(Kind k);

struct FeatureSpec {
  std::string name;
  Stage stage;
  Location location;
  Kind kind;
  int num_classes = 0;  // categorical only

  bool operator==(const FeatureSpec&) const = default;
};

// Flat row-major storage. Node features hold n values, edge features n*n,
// graph features exactly one. Masks are 0/1, pointers and categorical values
// are stored as exact small integers.
using Values = std::vector<double>;
using FeatureMap = std::map<std::string, Values, std::less<>>;

std::size_t value_count(Location loc, int n);

struct GraphInstance {
  AlgorithmId algorithm = AlgorithmId::minimum;
  int n = 0;
  std::uint64_t seed = 0;
  FeatureMap node_inputs;
  FeatureMap edge_inputs;
  FeatureMap graph_inputs;

  const Values& input(std::string_view name) const;
  Values& input(std::string_view name);
  bool operator==(const GraphInstance&) const = default;
};

struct SnapshotFrame {
  int step = 0;
  FeatureMap hints;
  bool operator==(const SnapshotFrame&) const = default;
};

struct Trajectory {
  AlgorithmId algorithm = AlgorithmId::minimum;
  GraphInstance instance;
  std::vector<SnapshotFrame> frames;
  FeatureMap outputs;
  // Extra edge-mask hints added by reverse_pointers(); empty otherwise.
  std::vector<FeatureSpec> extra_hints;

  int steps() const { return static_cast<int>(frames.size()); }
  bool operator==(const Trajectory&) const = default;
};

// Full ordered schema (inputs, then hints, then outputs).
const std::vector<FeatureSpec>& schema(AlgorithmId id);
std::vector<FeatureSpec> features(AlgorithmId id, Stage stage);
const FeatureSpec& find_feature(AlgorithmId id, std::string_view name);
// Hint schema of a trajectory including reversal hints.
std::vector<FeatureSpec> hint_features(const Trajectory& t);

// Upper bound on the number of frames an executor may emit for n nodes.
int max_steps(AlgorithmId id, int n);

// Probability set the Erdos-Renyi sampler draws from, per instance.
inline constexpr std::array<double, 3> kEdgeProbabilities{0.3, 0.5, 0.7};

GraphInstance sample_instance(AlgorithmId id, int n, std::uint64_t seed);

// Throws std::invalid_argument with a diagnostic when the instance violates
// the schema (missing feature, wrong shape, NaN, non-binary mask, asymmetric
// undirected adjacency, ...).
void validate_instance(const GraphInstance& instance);

Trajectory execute(AlgorithmId id, const GraphInstance& instance);
inline Trajectory execute(const GraphInstance& instance) {
  return execute(instance.algorithm, instance);
}

// Adds, for each node-pointer hint p, an edge mask hint rev_<p> with
// rev[b*n + a] = 1 iff p[a] == b.
struct Reversed {
  Trajectory trajectory;
  bool no_pointer_hints = false;
};
Reversed reverse_pointers(const Trajectory& t);

// Converts a permutation (order[k] = node at position k) into predecessor
// pointers: pred[order[k]] = order[k-1], pred[order[0]] = order[0].
Values order_to_pred(std::span<const int> order);
// Inverse of order_to_pred for a well-formed chain.
std::vector<int> pred_to_order(std::span<const double> pred);

}  // namespace hintrelic::trace
