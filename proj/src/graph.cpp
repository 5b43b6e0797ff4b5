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

#include "lscid/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace lscid {

namespace {

using Mask = std::vector<char>;

Mask to_mask(std::size_t n, const NodeSet& s) {
  Mask m(n, 0);
  for (NodeId v : s) m.at(v) = 1;
  return m;
}

NodeSet from_mask(const Mask& m, bool observed_only, std::size_t num_observed) {
  NodeSet out;
  const std::size_t limit = observed_only ? num_observed : m.size();
  for (NodeId v = 0; v < limit; ++v)
    if (m[v]) out.push_back(v);
  return out;
}

void check_nodes(const LatentDigraph& g, const NodeSet& s) {
  for (NodeId v : s)
    if (v >= g.num_nodes())
      throw GraphError(GraphError::Kind::UnknownNode, std::to_string(v),
                       "node index " + std::to_string(v) + " out of range");
}

void check_latent(const LatentDigraph& g, const NodeSet& s) {
  check_nodes(g, s);
  for (NodeId v : s)
    if (!g.is_latent(v))
      throw std::invalid_argument("avoidance set contains observed node " + g.name(v));
}

// Forward closure from `starts`. With latent_only, only edges with a latent
// tail are followed.
Mask forward_reach(const LatentDigraph& g, const NodeSet& starts, bool latent_only) {
  Mask seen(g.num_nodes(), 0);
  std::vector<NodeId> stack;
  for (NodeId s : starts) {
    if (!seen[s]) {
      seen[s] = 1;
      stack.push_back(s);
    }
  }
  while (!stack.empty()) {
    NodeId x = stack.back();
    stack.pop_back();
    if (latent_only && !g.is_latent(x)) continue;
    for (NodeId c : g.children(x)) {
      if (!seen[c]) {
        seen[c] = 1;
        stack.push_back(c);
      }
    }
  }
  return seen;
}

// Right endpoints of treks whose left endpoint is in `starts`. The left part
// is walked backwards avoiding left_block, the top must avoid both blocks, and
// the right part is walked forwards avoiding right_block. This is reachability
// in the doubled trek graph with the blocked nodes deleted from each copy.
Mask trek_reach(const LatentDigraph& g, bool latent_only, const NodeSet& starts,
                const Mask& left_block, const Mask& right_block) {
  const std::size_t n = g.num_nodes();
  Mask tops(n, 0);
  std::vector<NodeId> stack;
  for (NodeId s : starts) {
    if (!left_block[s] && !tops[s]) {
      tops[s] = 1;
      stack.push_back(s);
    }
  }
  while (!stack.empty()) {
    NodeId x = stack.back();
    stack.pop_back();
    for (NodeId p : g.parents(x)) {
      if (latent_only && !g.is_latent(p)) continue;
      if (!left_block[p] && !tops[p]) {
        tops[p] = 1;
        stack.push_back(p);
      }
    }
  }
  Mask right(n, 0);
  for (NodeId t = 0; t < n; ++t) {
    if (tops[t] && !right_block[t]) {
      right[t] = 1;
      stack.push_back(t);
    }
  }
  while (!stack.empty()) {
    NodeId x = stack.back();
    stack.pop_back();
    if (latent_only && !g.is_latent(x)) continue;
    for (NodeId c : g.children(x)) {
      if (!right_block[c] && !right[c]) {
        right[c] = 1;
        stack.push_back(c);
      }
    }
  }
  return right;
}

void collect_paths(const LatentDigraph& g, NodeId from, NodeId to, std::vector<NodeId>& path,
                   std::vector<std::vector<NodeId>>& out) {
  path.push_back(from);
  if (from == to) {
    out.push_back(path);
  } else {
    for (NodeId c : g.children(from)) collect_paths(g, c, to, path, out);
  }
  path.pop_back();
}

}  // namespace

LatentDigraph::LatentDigraph(std::vector<std::string> observed, std::vector<std::string> latent,
                             const std::vector<std::pair<std::string, std::string>>& edges) {
  num_observed_ = observed.size();
  names_ = std::move(observed);
  names_.insert(names_.end(), latent.begin(), latent.end());
  std::set<std::string> obs_names(names_.begin(), names_.begin() + num_observed_);
  for (std::size_t i = 0; i < names_.size(); ++i) {
    const std::string& nm = names_[i];
    if (nm.empty()) throw GraphError(GraphError::Kind::EmptyName, nm, "empty node name");
    if (index_.count(nm)) {
      if (i >= num_observed_ && obs_names.count(nm))
        throw GraphError(GraphError::Kind::OverlappingPartition, nm,
                         "node '" + nm + "' is declared both observed and latent");
      throw GraphError(GraphError::Kind::DuplicateNode, nm, "duplicate node '" + nm + "'");
    }
    index_.emplace(nm, i);
  }
  for (const auto& [t, h] : edges) {
    auto it = index_.find(t);
    if (it == index_.end())
      throw GraphError(GraphError::Kind::UnknownEndpoint, t,
                       "edge endpoint '" + t + "' is not a declared node");
    auto jt = index_.find(h);
    if (jt == index_.end())
      throw GraphError(GraphError::Kind::UnknownEndpoint, h,
                       "edge endpoint '" + h + "' is not a declared node");
    edges_.push_back({it->second, jt->second});
  }
  build();
}

LatentDigraph::LatentDigraph(std::vector<std::string> observed, std::vector<std::string> latent,
                             std::vector<Edge> edges) {
  std::vector<std::pair<std::string, std::string>> named;
  std::vector<std::string> all = observed;
  all.insert(all.end(), latent.begin(), latent.end());
  for (const Edge& e : edges) {
    if (e.tail >= all.size() || e.head >= all.size())
      throw GraphError(GraphError::Kind::UnknownEndpoint,
                       std::to_string(std::max(e.tail, e.head)), "edge endpoint out of range");
    named.emplace_back(all[e.tail], all[e.head]);
  }
  *this = LatentDigraph(std::move(observed), std::move(latent), named);
}

void LatentDigraph::build() {
  const std::size_t n = names_.size();
  children_.assign(n, {});
  parents_.assign(n, {});
  std::set<Edge> seen;
  for (const Edge& e : edges_) {
    if (e.tail == e.head)
      throw GraphError(GraphError::Kind::SelfLoop, names_[e.tail],
                       "self-loop on '" + names_[e.tail] + "'");
    if (!seen.insert(e).second)
      throw GraphError(GraphError::Kind::DuplicateEdge, names_[e.tail] + "->" + names_[e.head],
                       "duplicate edge " + names_[e.tail] + " -> " + names_[e.head]);
    children_[e.tail].push_back(e.head);
    parents_[e.head].push_back(e.tail);
  }
  for (auto& c : children_) std::sort(c.begin(), c.end());
  for (auto& p : parents_) std::sort(p.begin(), p.end());
}

NodeSet LatentDigraph::observed_nodes() const {
  NodeSet out(num_observed_);
  for (NodeId v = 0; v < num_observed_; ++v) out[v] = v;
  return out;
}

NodeSet LatentDigraph::latent_nodes() const {
  NodeSet out;
  for (NodeId v = num_observed_; v < names_.size(); ++v) out.push_back(v);
  return out;
}

std::optional<NodeId> LatentDigraph::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeId LatentDigraph::id(std::string_view name) const {
  auto v = find(name);
  if (!v)
    throw GraphError(GraphError::Kind::UnknownNode, std::string(name),
                     "unknown node '" + std::string(name) + "'");
  return *v;
}

NodeSet LatentDigraph::ids(const std::vector<std::string>& names) const {
  NodeSet out;
  for (const auto& n : names) out.push_back(id(n));
  return make_set(std::move(out));
}

std::vector<std::string> LatentDigraph::names(const NodeSet& nodes) const {
  std::vector<std::string> out;
  for (NodeId v : nodes) out.push_back(name(v));
  return out;
}

bool LatentDigraph::has_edge(NodeId tail, NodeId head) const {
  const auto& c = children_.at(tail);
  return std::binary_search(c.begin(), c.end(), head);
}

LatentDigraph parse_graph(std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw GraphError(GraphError::Kind::Malformed, "", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object())
    throw GraphError(GraphError::Kind::Malformed, "", "graph document must be a JSON object");
  auto string_list = [&](const char* key) {
    std::vector<std::string> out;
    if (!doc.contains(key)) return out;
    const json& arr = doc.at(key);
    if (!arr.is_array())
      throw GraphError(GraphError::Kind::Malformed, key, std::string("'") + key + "' must be an array");
    for (const json& item : arr) {
      if (!item.is_string())
        throw GraphError(GraphError::Kind::Malformed, item.dump(),
                         std::string("'") + key + "' entries must be strings");
      out.push_back(item.get<std::string>());
    }
    return out;
  };
  if (!doc.contains("observed"))
    throw GraphError(GraphError::Kind::Malformed, "observed", "missing 'observed'");
  std::vector<std::string> observed = string_list("observed");
  std::vector<std::string> latent = string_list("latent");
  std::vector<std::pair<std::string, std::string>> edges;
  if (doc.contains("edges")) {
    const json& arr = doc.at("edges");
    if (!arr.is_array())
      throw GraphError(GraphError::Kind::Malformed, "edges", "'edges' must be an array");
    for (const json& e : arr) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
        throw GraphError(GraphError::Kind::Malformed, e.dump(),
                         "each edge must be a [tail, head] pair of strings, got " + e.dump());
      edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
  }
  return LatentDigraph(std::move(observed), std::move(latent), edges);
}

std::string serialize_graph(const LatentDigraph& g) {
  auto quote = [](const std::string& s) { return nlohmann::json(s).dump(); };
  auto list = [&](const NodeSet& nodes) {
    std::string out = "[";
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (i) out += ", ";
      out += quote(g.name(nodes[i]));
    }
    return out + "]";
  };
  std::string out = "{\n  \"observed\": " + list(g.observed_nodes()) + ",\n";
  out += "  \"latent\": " + list(g.latent_nodes()) + ",\n";
  if (g.edges().empty()) {
    out += "  \"edges\": []\n}\n";
    return out;
  }
  out += "  \"edges\": [\n";
  for (std::size_t i = 0; i < g.edges().size(); ++i) {
    const Edge& e = g.edges()[i];
    out += "    [" + quote(g.name(e.tail)) + ", " + quote(g.name(e.head)) + "]";
    out += i + 1 < g.edges().size() ? ",\n" : "\n";
  }
  out += "  ]\n}\n";
  return out;
}

LatentDigraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GraphError(GraphError::Kind::Malformed, path, "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_graph(buf.str());
}

LatentDigraph latent_subgraph(const LatentDigraph& g) {
  std::vector<Edge> kept;
  for (const Edge& e : g.edges())
    if (g.is_latent(e.tail)) kept.push_back(e);
  return LatentDigraph(g.names(g.observed_nodes()), g.names(g.latent_nodes()), std::move(kept));
}

NodeSet semi_direct_parents(const LatentDigraph& g, NodeId v) {
  if (!g.is_observed(v))
    throw std::invalid_argument("semi-direct parents requested for non-observed node");
  // Latent nodes with a latent-only directed path into v.
  Mask via(g.num_nodes(), 0);
  std::vector<NodeId> stack;
  Mask pa(g.num_nodes(), 0);
  for (NodeId p : g.parents(v)) {
    if (g.is_latent(p)) {
      via[p] = 1;
      stack.push_back(p);
    } else {
      pa[p] = 1;
    }
  }
  while (!stack.empty()) {
    NodeId x = stack.back();
    stack.pop_back();
    for (NodeId p : g.parents(x)) {
      if (g.is_latent(p)) {
        if (!via[p]) {
          via[p] = 1;
          stack.push_back(p);
        }
      } else {
        pa[p] = 1;
      }
    }
  }
  return from_mask(pa, true, g.num_observed());
}

std::vector<NodeSet> semi_direct_parent_sets(const LatentDigraph& g) {
  std::vector<NodeSet> out;
  for (NodeId v = 0; v < g.num_observed(); ++v) out.push_back(semi_direct_parents(g, v));
  return out;
}

NodeSet self_semi_direct_nodes(const LatentDigraph& g) {
  NodeSet out;
  for (NodeId v = 0; v < g.num_observed(); ++v)
    if (set_contains(semi_direct_parents(g, v), v)) out.push_back(v);
  return out;
}

NodeSet descendants(const LatentDigraph& g, NodeId v) { return descendants(g, NodeSet{v}); }

NodeSet descendants(const LatentDigraph& g, const NodeSet& sources) {
  check_nodes(g, sources);
  return from_mask(forward_reach(g, sources, false), false, g.num_observed());
}

NodeSet latent_reachable(const LatentDigraph& g, const NodeSet& h1, const NodeSet& h2,
                         const NodeSet& sources) {
  check_latent(g, h1);
  check_latent(g, h2);
  check_nodes(g, sources);
  Mask right = trek_reach(g, true, sources, to_mask(g.num_nodes(), h1), to_mask(g.num_nodes(), h2));
  return from_mask(right, true, g.num_observed());
}

NodeSet latent_descendants(const LatentDigraph& g, const NodeSet& sources) {
  check_nodes(g, sources);
  return from_mask(forward_reach(g, sources, true), false, g.num_observed());
}

NodeSet extended_latent_reachable(const LatentDigraph& g, const NodeSet& h1, const NodeSet& h2,
                                  const NodeSet& sources) {
  return descendants(g, latent_reachable(g, h1, h2, sources));
}

LatentDigraph canonicalize(const LatentDigraph& g) {
  std::vector<Edge> edges;
  const auto pa = semi_direct_parent_sets(g);
  for (NodeId t = 0; t < g.num_observed(); ++t)
    for (NodeId h = 0; h < g.num_observed(); ++h)
      if (t != h && set_contains(pa[h], t)) edges.push_back({t, h});
  for (NodeId t : g.latent_nodes()) {
    Mask reach = forward_reach(g, {t}, true);
    for (NodeId h = 0; h < g.num_observed(); ++h)
      if (reach[h]) edges.push_back({t, h});
  }
  return LatentDigraph(g.names(g.observed_nodes()), g.names(g.latent_nodes()), std::move(edges));
}

bool is_acyclic(const LatentDigraph& g) {
  std::vector<std::size_t> indeg(g.num_nodes(), 0);
  for (const Edge& e : g.edges()) ++indeg[e.head];
  std::vector<NodeId> ready;
  for (NodeId v = 0; v < g.num_nodes(); ++v)
    if (indeg[v] == 0) ready.push_back(v);
  std::size_t done = 0;
  while (!ready.empty()) {
    NodeId v = ready.back();
    ready.pop_back();
    ++done;
    for (NodeId c : g.children(v))
      if (--indeg[c] == 0) ready.push_back(c);
  }
  return done == g.num_nodes();
}

bool is_confounding_free_acyclic(const LatentDigraph& g) {
  if (!is_acyclic(g)) return false;
  for (NodeId v = 0; v < g.num_observed(); ++v) {
    NodeSet confounded = latent_reachable(g, {}, {}, {v});
    for (NodeId u : semi_direct_parents(g, v))
      if (set_contains(confounded, u)) return false;
  }
  return true;
}

NodeSet TrekSystem::sources() const {
  NodeSet out;
  for (const Trek& t : treks) out.push_back(t.source());
  return make_set(std::move(out));
}

NodeSet TrekSystem::sinks() const {
  NodeSet out;
  for (const Trek& t : treks) out.push_back(t.sink());
  return make_set(std::move(out));
}

bool TrekSystem::has_sided_intersection() const {
  std::set<NodeId> left, right;
  for (const Trek& t : treks) {
    for (NodeId v : t.left)
      if (!left.insert(v).second) return true;
    for (NodeId v : t.right)
      if (!right.insert(v).second) return true;
  }
  return false;
}

bool is_trek_in(const LatentDigraph& g, const Trek& t) {
  if (t.left.empty() || t.right.empty() || t.left.front() != t.right.front()) return false;
  for (const auto* part : {&t.left, &t.right})
    for (std::size_t i = 0; i + 1 < part->size(); ++i)
      if ((*part)[i] >= g.num_nodes() || (*part)[i + 1] >= g.num_nodes() ||
          !g.has_edge((*part)[i], (*part)[i + 1]))
        return false;
  return true;
}

std::string format_trek(const LatentDigraph& g, const Trek& t) {
  std::string out;
  for (std::size_t i = t.left.size(); i-- > 0;) {
    out += g.name(t.left[i]);
    if (i > 0) out += " <- ";
  }
  for (std::size_t i = 1; i < t.right.size(); ++i) out += " -> " + g.name(t.right[i]);
  return out;
}

std::vector<Trek> enumerate_treks(const LatentDigraph& g, NodeId v, NodeId w,
                                  std::size_t max_nodes) {
  if (g.num_nodes() > max_nodes)
    throw std::invalid_argument("trek enumeration limited to " + std::to_string(max_nodes) +
                                " nodes, graph has " + std::to_string(g.num_nodes()));
  if (!is_acyclic(g)) throw std::invalid_argument("trek enumeration requires an acyclic graph");
  check_nodes(g, {v, w});
  std::vector<Trek> out;
  std::vector<NodeId> scratch;
  for (NodeId top = 0; top < g.num_nodes(); ++top) {
    std::vector<std::vector<NodeId>> lefts, rights;
    collect_paths(g, top, v, scratch, lefts);
    if (lefts.empty()) continue;
    collect_paths(g, top, w, scratch, rights);
    for (const auto& l : lefts)
      for (const auto& r : rights) out.push_back({l, r});
  }
  return out;
}

bool trek_separates(const LatentDigraph& g, const NodeSet& a, const NodeSet& b, const NodeSet& ca,
                    const NodeSet& cb) {
  check_nodes(g, a);
  check_nodes(g, b);
  check_nodes(g, ca);
  check_nodes(g, cb);
  Mask right = trek_reach(g, false, a, to_mask(g.num_nodes(), ca), to_mask(g.num_nodes(), cb));
  for (NodeId x : b)
    if (right[x]) return false;
  return true;
}

NodeSet set_union(const NodeSet& a, const NodeSet& b) {
  NodeSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

NodeSet set_intersection(const NodeSet& a, const NodeSet& b) {
  NodeSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

NodeSet set_difference(const NodeSet& a, const NodeSet& b) {
  NodeSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool set_contains(const NodeSet& a, NodeId v) { return std::binary_search(a.begin(), a.end(), v); }

NodeSet make_set(std::vector<NodeId> nodes) {
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return nodes;
}

}  // namespace lscid
