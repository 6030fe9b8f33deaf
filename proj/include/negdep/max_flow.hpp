// Copyright 2026 The negdep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NEGDEP_MAX_FLOW_HPP
#define NEGDEP_MAX_FLOW_HPP

#include <algorithm>
#include <cstddef>
#include <limits>
#include <queue>
#include <type_traits>
#include <vector>

namespace negdep {

/// Dinic max-flow over capacities of type Cap (an integer type for exact solves, double for
/// the closure searches where a residual epsilon is good enough).
template <class Cap>
class MaxFlow {
 public:
  struct Edge {
    std::size_t to;
    Cap cap;
    Cap original;
  };

  explicit MaxFlow(std::size_t nodes) : graph_(nodes) {}

  static constexpr Cap infinite() {
    if constexpr (std::is_floating_point_v<Cap>)
      return std::numeric_limits<Cap>::infinity();
    else
      return std::numeric_limits<Cap>::max() / 4;
  }

  /// Returns the edge id, usable with flow_on().
  std::size_t add_edge(std::size_t from, std::size_t to, Cap cap) {
    edges_.push_back({to, cap, cap});
    graph_[from].push_back(edges_.size() - 1);
    edges_.push_back({from, Cap{0}, Cap{0}});
    graph_[to].push_back(edges_.size() - 1);
    return edges_.size() - 2;
  }

  Cap solve(std::size_t source, std::size_t sink) {
    Cap total{0};
    while (build_levels(source, sink)) {
      next_.assign(graph_.size(), 0);
      while (true) {
        Cap pushed = push(source, sink, infinite());
        if (!(pushed > eps())) break;
        total += pushed;
      }
    }
    return total;
  }

  Cap flow_on(std::size_t edge_id) const { return edges_[edge_id].original - edges_[edge_id].cap; }

  /// Nodes reachable from `source` in the residual graph after solve(): the source side of a
  /// minimum cut.
  std::vector<bool> source_side(std::size_t source) const {
    std::vector<bool> seen(graph_.size(), false);
    std::vector<std::size_t> stack{source};
    seen[source] = true;
    while (!stack.empty()) {
      auto v = stack.back();
      stack.pop_back();
      for (auto id : graph_[v]) {
        const auto& e = edges_[id];
        if (e.cap > eps() && !seen[e.to]) {
          seen[e.to] = true;
          stack.push_back(e.to);
        }
      }
    }
    return seen;
  }

 private:
  static constexpr Cap eps() {
    if constexpr (std::is_floating_point_v<Cap>)
      return Cap(1e-18);
    else
      return Cap{0};
  }

  bool build_levels(std::size_t source, std::size_t sink) {
    level_.assign(graph_.size(), -1);
    std::queue<std::size_t> q;
    level_[source] = 0;
    q.push(source);
    while (!q.empty()) {
      auto v = q.front();
      q.pop();
      for (auto id : graph_[v]) {
        const auto& e = edges_[id];
        if (e.cap > eps() && level_[e.to] < 0) {
          level_[e.to] = level_[v] + 1;
          q.push(e.to);
        }
      }
    }
    return level_[sink] >= 0;
  }

  Cap push(std::size_t v, std::size_t sink, Cap limit) {
    if (v == sink) return limit;
    for (auto& i = next_[v]; i < graph_[v].size(); ++i) {
      auto id = graph_[v][i];
      auto& e = edges_[id];
      if (e.cap > eps() && level_[e.to] == level_[v] + 1) {
        Cap got = push(e.to, sink, std::min(limit, e.cap));
        if (got > eps()) {
          e.cap -= got;
          edges_[id ^ 1].cap += got;
          return got;
        }
      }
    }
    return Cap{0};
  }

  std::vector<std::vector<std::size_t>> graph_;
  std::vector<Edge> edges_;
  std::vector<int> level_;
  std::vector<std::size_t> next_;
};

}  // namespace negdep

#endif  // NEGDEP_MAX_FLOW_HPP
