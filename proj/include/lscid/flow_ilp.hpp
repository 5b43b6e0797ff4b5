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

// Path systems through a flow integer program with two commodities: f may use
// every edge, f1 only the edges of a subgraph. Targets in Z must be reached by
// f1, targets in P by f, and every node carries at most one unit in total.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lscid/graph.hpp"
#include "lscid/rational.hpp"
#include "lscid/simplex.hpp"

namespace lscid {

struct Digraph {
  std::vector<std::string> names;
  std::vector<Edge> edges;

  std::size_t num_nodes() const { return names.size(); }
};

// One flag per edge of the host digraph: 1 when the edge is in the subgraph.
using EdgeMask = std::vector<char>;

enum class FlowEdgeKind { Original, Source, ZSink, PSink };

struct FlowEdge {
  NodeId tail;
  NodeId head;
  FlowEdgeKind kind;
  // Whether f1 may use the edge: subgraph edges, source edges and Z-sink edges.
  bool f1_allowed;
};

struct FlowGraph {
  std::size_t num_original = 0;
  NodeId source = 0;  // == num_original
  NodeId sink = 0;    // == num_original + 1
  // Original edges in host order, then s->y for Ya, z->t for Z, p->t for P.
  std::vector<FlowEdge> edges;
  NodeSet Z, P, Ya;

  std::size_t num_nodes() const { return num_original + 2; }
};

FlowGraph build_flow_graph(const Digraph& g, const EdgeMask& g1, const NodeSet& Z,
                           const NodeSet& P, const NodeSet& Ya);

enum class Family { F, F1 };

enum class RowKind {
  Nonnegativity,    // (i)   x >= 0
  Conservation,     // (ii)  in - out = 0 per original node and family
  FamilyCapacity,   // (ii)  in <= 1 per original node and family
  SubgraphExclusion,  // (iii) f1 = 0 off the subgraph and on P-sink edges
  JointCapacity,    // (iv)  f in + f1 in <= 1 per original node
};

struct FlowRow {
  RowKind kind;
  Sense sense;
  int rhs;
  std::vector<std::pair<std::size_t, int>> terms;
  // Original node for node rows, flow edge for edge rows.
  std::size_t anchor;
};

struct FlowProgram {
  FlowGraph graph;
  std::vector<int> objective;
  std::vector<FlowRow> rows;

  std::size_t num_edges() const { return graph.edges.size(); }
  std::size_t num_variables() const { return 2 * graph.edges.size(); }
  // f variables come first, then f1 variables, both in flow-edge order.
  std::size_t var(Family fam, std::size_t edge) const {
    return fam == Family::F ? edge : graph.edges.size() + edge;
  }
  // |Z| + |P|, an upper bound on the objective.
  std::size_t target() const { return graph.Z.size() + graph.P.size(); }
};

FlowProgram build_lp(const FlowGraph& fg);

// CPLEX LP text format, for cross-checking with external solvers.
std::string to_lp_text(const FlowProgram& prog);

struct IlpOptions {
  // Branch-and-bound node limit; 0 means unlimited.
  std::size_t node_budget = 0;
  // Stop as soon as the answer to "is |Z|+|P| attainable" is known.
  bool decision_only = false;
};

enum class IlpStatus {
  Optimal,          // incumbent proven optimal
  TargetReached,    // incumbent attains |Z|+|P|
  BelowTarget,      // decision_only: |Z|+|P| proven unattainable
  BudgetExhausted,  // node budget ran out
};

struct IlpStats {
  std::size_t bb_nodes = 0;
  std::size_t lp_pivots = 0;
  std::size_t presolve_fixed = 0;
  bool big_rational_fallback = false;
  // Audit counters for the open question whether an LP optimum of |Z|+|P|
  // always comes with an integral one.
  bool lp_at_target = false;
  bool integral_at_target = false;
};

struct IlpSolution {
  // Best integral point found; the all-zero flow is always feasible.
  std::vector<Rational> values;
  Rational objective;
  bool integral = true;
  BigRational lp_bound;
  IlpStatus status = IlpStatus::Optimal;
  IlpStats stats;
};

IlpSolution solve_ilp(const FlowProgram& prog, const IlpOptions& options = {});

// Residual check of every row in exact arithmetic.
bool is_feasible(const FlowProgram& prog, const std::vector<Rational>& values);

struct PathSystemOptions {
  // Reject early when a plain max-flow bound already rules out |Z|+|P|.
  bool flow_bound_prefilter = true;
  IlpOptions ilp{0, true};
};

struct PathSystemResult {
  bool found = false;
  bool budget_exhausted = false;
  bool prefiltered = false;
  // Node sequences from a source in Ya to its target; Z targets first.
  std::vector<std::vector<NodeId>> paths;
  IlpStats stats;
};

PathSystemResult has_path_system(const Digraph& g, const EdgeMask& g1, const NodeSet& Z,
                                 const NodeSet& P, const NodeSet& Ya,
                                 const PathSystemOptions& options = {});

// Integral flow decomposed into its s-t paths (cycles dropped). Only paths
// that count toward the objective are returned.
std::vector<std::vector<NodeId>> decompose_flow(const FlowProgram& prog,
                                                const std::vector<Rational>& values);

// Exhaustive search over node-disjoint simple-path tuples. Independent of the
// flow program; limited to small graphs.
inline constexpr std::size_t kBruteForceNodeBound = 10;
bool brute_force_path_system(const Digraph& g, const EdgeMask& g1, const NodeSet& Z,
                             const NodeSet& P, const NodeSet& Ya);

// Doubled graph: node v keeps index v, its primed copy is v + |V|.
struct GlpGraph {
  Digraph graph;
  EdgeMask latent_edges;
  std::size_t base = 0;

  NodeId primed(NodeId v) const { return v + base; }
};

GlpGraph build_glp(const LatentDigraph& g);

struct TrekSystemResult {
  bool found = false;
  bool budget_exhausted = false;
  bool prefiltered = false;
  TrekSystem system;
  IlpStats stats;
};

// Trek systems without sided intersection from some Y within Ya onto Z u P,
// with left parts in the latent subgraph and Z-treks entirely in it. The
// doubled graph is built once per instance.
class TrekSystemSearch {
 public:
  explicit TrekSystemSearch(const LatentDigraph& g);

  TrekSystemResult find(const NodeSet& Z, const NodeSet& P, const NodeSet& Ya,
                        const PathSystemOptions& options = {}) const;
  const GlpGraph& glp() const { return glp_; }

 private:
  const LatentDigraph* g_;
  GlpGraph glp_;
};

TrekSystemResult has_trek_system(const LatentDigraph& g, const NodeSet& Z, const NodeSet& P,
                                 const NodeSet& Ya, const PathSystemOptions& options = {});

}  // namespace lscid
