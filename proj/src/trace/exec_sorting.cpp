// Sorting and searching executors. Arrays are tracked as `order`, the node id
// sitting at each array position; pred_h exposes that order as a
// predecessor chain over nodes.
#include <numeric>

#include "exec_common.hpp"

namespace hintrelic::trace::detail {
namespace {

std::vector<int> identity_order(int n) {
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  return order;
}

}  // namespace

Trajectory run_insertion_sort(const GraphInstance& g) {
  const int n = g.n;
  const Values& key = g.input("key");
  Recorder rec(AlgorithmId::insertion_sort, g);
  auto order = identity_order(n);
  rec.push({{"pred_h", order_to_pred(order)}, {"i", mask_one(n, 0)}, {"j", mask_one(n, 0)}});
  for (int j = 1; j < n; ++j) {
    const int node = order[j];
    int i = j - 1;
    while (i >= 0 && key[order[i]] > key[node]) {
      order[i + 1] = order[i];
      --i;
    }
    order[i + 1] = node;
    const int before = i >= 0 ? order[i] : node;
    rec.push({{"pred_h", order_to_pred(order)}, {"i", mask_one(n, before)}, {"j", mask_one(n, node)}});
  }
  return rec.finish({{"pred", order_to_pred(order)}});
}

Trajectory run_bubble_sort(const GraphInstance& g) {
  const int n = g.n;
  const Values& key = g.input("key");
  Recorder rec(AlgorithmId::bubble_sort, g);
  auto order = identity_order(n);
  // Left-to-right passes: each frame is one comparison of adjacent positions
  // (and the swap it causes), so frame 1 compares positions 0 and 1.
  for (int pass = 0; pass + 1 < n; ++pass) {
    for (int j = 0; j + 1 < n - pass; ++j) {
      const int left = order[j];
      const int right = order[j + 1];
      if (key[left] > key[right]) std::swap(order[j], order[j + 1]);
      rec.push({{"pred_h", order_to_pred(order)}, {"i", mask_one(n, left)}, {"j", mask_one(n, right)}});
    }
  }
  if (rec.steps() == 0) {
    rec.push({{"pred_h", order_to_pred(order)}, {"i", mask_one(n, 0)}, {"j", mask_one(n, 0)}});
  }
  return rec.finish({{"pred", order_to_pred(order)}});
}

Trajectory run_quicksort(const GraphInstance& g) {
  const int n = g.n;
  const Values& key = g.input("key");
  Recorder rec(AlgorithmId::quicksort, g);
  auto order = identity_order(n);
  auto emit = [&](int p, int r, int i_pos, int j_pos) {
    rec.push({{"pred_h", order_to_pred(order)},
              {"p", mask_one(n, order[p])},
              {"r", mask_one(n, order[r])},
              {"i", mask_one(n, order[i_pos])},
              {"j", mask_one(n, order[j_pos])}});
  };
  // Lomuto partition with an explicit stack; left part before right part.
  std::vector<std::pair<int, int>> stack{{0, n - 1}};
  while (!stack.empty()) {
    auto [p, r] = stack.back();
    stack.pop_back();
    if (p >= r) continue;
    const double pivot = key[order[r]];
    int i = p - 1;
    for (int j = p; j < r; ++j) {
      if (key[order[j]] <= pivot) {
        ++i;
        std::swap(order[i], order[j]);
      }
      // i hint marks the slot the next small element goes to.
      emit(p, r, i + 1, j);
    }
    std::swap(order[i + 1], order[r]);
    emit(p, r, i + 1, r);
    const int q = i + 1;
    stack.emplace_back(q + 1, r);
    stack.emplace_back(p, q - 1);
  }
  if (rec.steps() == 0) emit(0, n - 1, 0, 0);
  return rec.finish({{"pred", order_to_pred(order)}});
}

Trajectory run_heapsort(const GraphInstance& g) {
  const int n = g.n;
  const Values& key = g.input("key");
  Recorder rec(AlgorithmId::heapsort, g);
  auto order = identity_order(n);
  int heap_size = n;

  auto emit = [&](int i_pos, int j_pos, int largest_pos, int phase) {
    Values parent(static_cast<std::size_t>(n));
    Values in_heap(static_cast<std::size_t>(n), 0.0);
    for (int k = 0; k < n; ++k) {
      const int node = order[k];
      parent[node] = (k > 0 && k < heap_size) ? order[(k - 1) / 2] : node;
      in_heap[node] = k < heap_size ? 1.0 : 0.0;
    }
    rec.push({{"pred_h", order_to_pred(order)},
              {"parent", std::move(parent)},
              {"i", mask_one(n, order[i_pos])},
              {"j", mask_one(n, order[j_pos])},
              {"largest", mask_one(n, order[largest_pos])},
              {"heap_size", std::move(in_heap)},
              {"phase", {static_cast<double>(phase)}}});
  };

  auto heapify = [&](int i, int phase) {
    while (true) {
      const int l = 2 * i + 1;
      const int r = 2 * i + 2;
      int largest = i;
      if (l < heap_size && key[order[l]] > key[order[largest]]) largest = l;
      if (r < heap_size && key[order[r]] > key[order[largest]]) largest = r;
      emit(i, l < heap_size ? l : i, largest, phase);
      if (largest == i) break;
      std::swap(order[i], order[largest]);
      i = largest;
    }
  };

  for (int i = n / 2 - 1; i >= 0; --i) heapify(i, 0);
  for (int i = n - 1; i >= 1; --i) {
    std::swap(order[0], order[i]);
    --heap_size;
    emit(0, i, 0, 1);
    heapify(0, 2);
  }
  if (rec.steps() == 0) emit(0, 0, 0, 0);
  return rec.finish({{"pred", order_to_pred(order)}});
}

Trajectory run_minimum(const GraphInstance& g) {
  const int n = g.n;
  const Values& key = g.input("key");
  Recorder rec(AlgorithmId::minimum, g);
  const Values chain = order_to_pred(identity_order(n));
  int best = 0;
  rec.push({{"pred_h", chain}, {"min_h", mask_one(n, best)}, {"i", mask_one(n, 0)}});
  for (int i = 1; i < n; ++i) {
    if (key[i] < key[best]) best = i;
    rec.push({{"pred_h", chain}, {"min_h", mask_one(n, best)}, {"i", mask_one(n, i)}});
  }
  return rec.finish({{"min", mask_one(n, best)}});
}

Trajectory run_binary_search(const GraphInstance& g) {
  const int n = g.n;
  const Values& key = g.input("key");
  const double target = g.input("target")[0];
  Recorder rec(AlgorithmId::binary_search, g);
  const Values chain = order_to_pred(identity_order(n));
  int low = 0;
  int high = n - 1;
  int mid = (low + high) / 2;
  auto emit = [&] {
    rec.push({{"pred_h", chain},
              {"low", mask_one(n, low)},
              {"high", mask_one(n, high)},
              {"mid", mask_one(n, mid)}});
  };
  emit();
  // Smallest index whose key is >= target (last index if none).
  while (low < high) {
    mid = (low + high) / 2;
    if (target <= key[mid]) {
      high = mid;
    } else {
      low = mid + 1;
    }
    emit();
  }
  return rec.finish({{"return", mask_one(n, high)}});
}

}  // namespace hintrelic::trace::detail
