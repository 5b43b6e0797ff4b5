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

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "lscid/graph.hpp"

namespace lscid::testing {

inline LatentDigraph fixture(const std::string& name) {
  return load_graph(std::string(LSCID_FIXTURES_DIR) + "/" + name + ".json");
}

inline NodeSet nodes(const LatentDigraph& g, const std::vector<std::string>& names) {
  return make_set(g.ids(names));
}

inline std::vector<Edge> sorted_edges(const LatentDigraph& g) {
  std::vector<Edge> e = g.edges();
  std::sort(e.begin(), e.end());
  return e;
}

// Same node lists and the same edge set, ignoring edge order.
inline bool same_graph(const LatentDigraph& a, const LatentDigraph& b) {
  return a.names(a.observed_nodes()) == b.names(b.observed_nodes()) &&
         a.names(a.latent_nodes()) == b.names(b.latent_nodes()) && sorted_edges(a) == sorted_edges(b);
}

// Random graph on shuffled node roles. Acyclic graphs only use edges that go
// forward in a hidden random order; cyclic ones draw every ordered pair.
inline LatentDigraph random_digraph(std::mt19937_64& rng, std::size_t n_obs, std::size_t n_lat, double p,
                                    bool acyclic = true) {
  const std::size_t n = n_obs + n_lat;
  std::vector<NodeId> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::bernoulli_distribution coin(p);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || (acyclic && i > j)) continue;
      if (coin(rng)) edges.push_back({order[i], order[j]});
    }
  std::vector<std::string> obs, lat;
  for (std::size_t i = 0; i < n_obs; ++i) obs.push_back("v" + std::to_string(i + 1));
  for (std::size_t i = 0; i < n_lat; ++i) lat.push_back("h" + std::to_string(i + 1));
  return LatentDigraph(obs, lat, edges);
}

inline NodeSet random_subset(std::mt19937_64& rng, const NodeSet& pool, double p = 0.4) {
  std::bernoulli_distribution coin(p);
  NodeSet s;
  for (NodeId x : pool)
    if (coin(rng)) s.push_back(x);
  return s;
}

inline NodeSet all_nodes(const LatentDigraph& g) {
  NodeSet s(g.num_nodes());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = i;
  return s;
}

}  // namespace lscid::testing
