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

// Exhaustive counterparts of the reachability, flow and search routines. They
// enumerate treks explicitly, so they only accept small acyclic graphs, and
// they share no code with the routines they check beyond the graph type and
// enumerate_treks.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lscid/graph.hpp"

namespace lscid::oracle {

NodeSet semi_direct_parents(const LatentDigraph& g, NodeId v);
NodeSet descendants(const LatentDigraph& g, const NodeSet& sources);
LatentDigraph latent_subgraph(const LatentDigraph& g);

// Observed w with a trek in the latent subgraph from some source to w whose
// left part avoids h1 and whose right part avoids h2.
NodeSet latent_reachable(const LatentDigraph& g, const NodeSet& h1, const NodeSet& h2,
                         const NodeSet& sources);
NodeSet extended_latent_reachable(const LatentDigraph& g, const NodeSet& h1, const NodeSet& h2,
                                  const NodeSet& sources);

bool trek_separates(const LatentDigraph& g, const NodeSet& a, const NodeSet& b, const NodeSet& ca,
                    const NodeSet& cb);

// Backtracking over explicit treks: a system without sided intersection from
// some Y within Ya onto Z u P, left parts in the latent subgraph and treks
// ending in Z entirely inside it.
std::optional<TrekSystem> find_trek_system(const LatentDigraph& g, const NodeSet& Z,
                                           const NodeSet& P, const NodeSet& Ya);

// Every condition of the criterion checked by enumeration, Y used exactly.
bool tuple_satisfies(const LatentDigraph& g, NodeId v, const NodeSet& Y, const NodeSet& Z,
                     const NodeSet& H1, const NodeSet& H2);

struct LscFixpoint {
  bool identifiable = false;
  NodeSet solved;
};

// Greedy closure over every (v, Y, Z, H1, H2). Solvability only grows with
// the solved set, so the closure does not depend on the order.
LscFixpoint exhaustive_lsc(const LatentDigraph& g);

struct OracleCheck {
  std::string name;
  bool skipped = false;
  bool passed = true;
  std::string detail;
};

// Cross-checks of one graph against the oracles above: decide vs. the
// exhaustive closure, the flow reduction on random queries, trek separation
// and the trek rule. Checks are skipped when the graph is too large.
std::vector<OracleCheck> run_oracle_checks(const LatentDigraph& g, std::uint64_t seed = 1);

}  // namespace lscid::oracle
