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

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lscid/flow_ilp.hpp"
#include "lscid/graph.hpp"

namespace lscid {

struct LscTuple {
  NodeId v = 0;
  NodeSet Y, Z, H1, H2;
  bool operator==(const LscTuple&) const = default;
};

enum class LscCondition { None, Cardinality, Disjointness, TrekSeparation, TrekSystem };

struct TupleCheck {
  bool satisfied = false;
  LscCondition failed = LscCondition::None;
  std::string diagnostic;
  std::optional<TrekSystem> witness;
};

struct CertificateStep {
  LscTuple tuple;
  // Nodes solved before this step (parentless nodes count from the start).
  NodeSet solved_before;
};

struct LscCertificate {
  std::vector<CertificateStep> steps;

  NodeSet certified() const;
  bool covers_all_observed(const LatentDigraph& g) const;
};

struct DecideOptions {
  // Bound on |H1| + |H2|; unset means no bound.
  std::optional<std::size_t> k_bound;
  // Total branch-and-bound nodes for the whole call; 0 means unlimited.
  std::size_t bb_node_budget = 0;
  PathSystemOptions search;
  bool memoize = true;
};

struct DecideStats {
  std::size_t ilp_calls = 0;
  std::size_t prefiltered = 0;
  std::size_t cache_hits = 0;
  std::size_t bb_nodes = 0;
  std::size_t lp_pivots = 0;
  std::size_t lp_at_target = 0;
  std::size_t lp_at_target_without_integral = 0;
  std::size_t passes = 0;
};

struct DecideResult {
  bool identifiable = false;
  bool budget_exhausted = false;
  LscCertificate certificate;
  NodeSet unsolved;
  // Per observed node: (H1, H2, Z) combinations examined.
  std::vector<std::size_t> combinations_tried;
  // Observed nodes that are their own semi-direct parent.
  NodeSet self_parent_nodes;
  DecideStats stats;
};

// Caches the per-graph structures the criterion needs.
class LscContext {
 public:
  explicit LscContext(const LatentDigraph& g);

  const LatentDigraph& graph() const { return *g_; }
  const NodeSet& parents(NodeId v) const { return pa_.at(v); }

  TupleCheck check_tuple(const LscTuple& t, const PathSystemOptions& opts = {}) const;
  NodeSet allowed_z(NodeId v, const NodeSet& h1, const NodeSet& h2, const NodeSet& solved) const;
  NodeSet allowed_y(NodeId v, const NodeSet& z, const NodeSet& h1, const NodeSet& h2,
                    const NodeSet& solved) const;
  // Y intersected with elr_{H2,H1}(Z u {v}): the rows that need solved columns.
  NodeSet extended_part(const LscTuple& t) const;
  const TrekSystemSearch& search() const { return search_; }

 private:
  const LatentDigraph* g_;
  LatentDigraph lat_;
  std::vector<NodeSet> pa_;
  TrekSystemSearch search_;
};

TupleCheck check_tuple(const LatentDigraph& g, const LscTuple& t);
NodeSet allowed_Z(const LatentDigraph& g, NodeId v, const NodeSet& h1, const NodeSet& h2,
                  const NodeSet& solved);
NodeSet allowed_Y(const LatentDigraph& g, NodeId v, const NodeSet& z, const NodeSet& h1,
                  const NodeSet& h2, const NodeSet& solved);

DecideResult decide(const LatentDigraph& g, const DecideOptions& options = {});

// Every tuple passes check_tuple and depends only on earlier steps. On
// failure, `reason` (when given) names the offending step.
bool verify_certificate(const LatentDigraph& g, const LscCertificate& cert,
                        std::string* reason = nullptr);

// [{"v": ..., "Y": [...], "Z": [...], "H1": [...], "H2": [...]}, ...]
std::string certificate_to_json(const LatentDigraph& g, const LscCertificate& cert);
// Rebuilds the solved-set trace from the step order.
LscCertificate certificate_from_json(const LatentDigraph& g, const std::string& text);

}  // namespace lscid
