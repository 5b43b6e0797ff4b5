/*
 * Copyright 2026 The lscid Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *       http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace lscid {

// Nodes are numbered in declaration order: observed nodes first, then latent
// nodes. Observed node i is therefore row/column i of every |O|x|O| matrix.
using NodeId = std::size_t;

// Sorted ascending, no duplicates.
using NodeSet = std::vector<NodeId>;

struct Edge {
  NodeId tail;
  NodeId head;
  auto operator<=>(const Edge&) const = default;
};

class GraphError : public std::runtime_error {
 public:
  enum class Kind {
    Malformed,
    EmptyName,
    DuplicateNode,
    OverlappingPartition,
    UnknownEndpoint,
    SelfLoop,
    DuplicateEdge,
    UnknownNode,
  };

  GraphError(Kind kind, std::string token, const std::string& what)
      : std::runtime_error(what), kind_(kind), token_(std::move(token)) {}

  Kind kind() const { return kind_; }
  const std::string& token() const { return token_; }

 private:
  Kind kind_;
  std::string token_;
};

class LatentDigraph {
 public:
  LatentDigraph() = default;
  LatentDigraph(std::vector<std::string> observed, std::vector<std::string> latent,
                const std::vector<std::pair<std::string, std::string>>& edges);
  LatentDigraph(std::vector<std::string> observed, std::vector<std::string> latent,
                std::vector<Edge> edges);

  std::size_t num_nodes() const { return names_.size(); }
  std::size_t num_observed() const { return num_observed_; }
  std::size_t num_latent() const { return names_.size() - num_observed_; }
  bool is_observed(NodeId v) const { return v < num_observed_; }
  bool is_latent(NodeId v) const { return v >= num_observed_ && v < names_.size(); }

  NodeSet observed_nodes() const;
  NodeSet latent_nodes() const;

  const std::string& name(NodeId v) const { return names_.at(v); }
  std::optional<NodeId> find(std::string_view name) const;
  // Throws GraphError(UnknownNode) when absent.
  NodeId id(std::string_view name) const;
  NodeSet ids(const std::vector<std::string>& names) const;
  std::vector<std::string> names(const NodeSet& nodes) const;

  // Edges in the order they were supplied.
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<NodeId>& children(NodeId v) const { return children_.at(v); }
  const std::vector<NodeId>& parents(NodeId v) const { return parents_.at(v); }
  bool has_edge(NodeId tail, NodeId head) const;

  bool operator==(const LatentDigraph& other) const {
    return names_ == other.names_ && num_observed_ == other.num_observed_ &&
           edges_ == other.edges_;
  }

 private:
  void build();

  std::vector<std::string> names_;
  std::size_t num_observed_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> children_;
  std::vector<std::vector<NodeId>> parents_;
  std::unordered_map<std::string, NodeId> index_;
};

// {"observed": [...], "latent": [...], "edges": [[tail, head], ...]}
LatentDigraph parse_graph(std::string_view text);
std::string serialize_graph(const LatentDigraph& g);
LatentDigraph load_graph(const std::string& path);

// Same nodes, only the edges whose tail is latent.
LatentDigraph latent_subgraph(const LatentDigraph& g);

// Observed w with w -> v directly or through latent intermediates only.
NodeSet semi_direct_parents(const LatentDigraph& g, NodeId v);
// Indexed by observed node.
std::vector<NodeSet> semi_direct_parent_sets(const LatentDigraph& g);
// Observed nodes that are their own semi-direct parent (latent-mediated cycle).
NodeSet self_semi_direct_nodes(const LatentDigraph& g);

NodeSet descendants(const LatentDigraph& g, NodeId v);
NodeSet descendants(const LatentDigraph& g, const NodeSet& sources);

// Observed w reachable by a latent trek from some source whose left part
// avoids h1 and whose right part avoids h2 (the top is on both parts).
NodeSet latent_reachable(const LatentDigraph& g, const NodeSet& h1, const NodeSet& h2,
                         const NodeSet& sources);
// Nodes reachable from sources along directed paths of the latent subgraph,
// sources included.
NodeSet latent_descendants(const LatentDigraph& g, const NodeSet& sources);

// All descendants in g of the latent_reachable set.
NodeSet extended_latent_reachable(const LatentDigraph& g, const NodeSet& h1,
                                  const NodeSet& h2, const NodeSet& sources);

LatentDigraph canonicalize(const LatentDigraph& g);

bool is_acyclic(const LatentDigraph& g);
bool is_confounding_free_acyclic(const LatentDigraph& g);

struct Trek {
  // Both sequences start at the top; left ends at the trek's source, right at
  // its sink.
  std::vector<NodeId> left;
  std::vector<NodeId> right;

  NodeId top() const { return left.front(); }
  NodeId source() const { return left.back(); }
  NodeId sink() const { return right.back(); }
  bool operator==(const Trek&) const = default;
};

struct TrekSystem {
  std::vector<Trek> treks;

  NodeSet sources() const;
  NodeSet sinks() const;
  bool has_sided_intersection() const;
};

// Checks that consecutive nodes of both parts are edges of g and that the
// parts share their top.
bool is_trek_in(const LatentDigraph& g, const Trek& t);
std::string format_trek(const LatentDigraph& g, const Trek& t);

inline constexpr std::size_t kDefaultTrekNodeBound = 10;

// Every trek from v to w, including the trivial one when v == w. Ordered by
// top, then left path, then right path.
std::vector<Trek> enumerate_treks(const LatentDigraph& g, NodeId v, NodeId w,
                                  std::size_t max_nodes = kDefaultTrekNodeBound);

// True iff every trek from a to b has its left part meeting ca or its right
// part meeting cb. Decided by reachability, so cyclic graphs are fine.
bool trek_separates(const LatentDigraph& g, const NodeSet& a, const NodeSet& b,
                    const NodeSet& ca, const NodeSet& cb);

// Set helpers shared by the other modules.
NodeSet set_union(const NodeSet& a, const NodeSet& b);
NodeSet set_intersection(const NodeSet& a, const NodeSet& b);
NodeSet set_difference(const NodeSet& a, const NodeSet& b);
bool set_contains(const NodeSet& a, NodeId v);
NodeSet make_set(std::vector<NodeId> nodes);

}  // namespace lscid
