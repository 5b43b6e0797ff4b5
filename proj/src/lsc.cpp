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

#include "lscid/lsc.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

#include <json.hpp>

namespace lscid {

namespace {

std::string join_names(const LatentDigraph& g, const NodeSet& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + g.name(s[i]);
  return out + "}";
}

// Calls fn on every k-subset of `items` in lexicographic order until fn
// returns true. Returns whether fn stopped the enumeration.
bool for_each_subset(const NodeSet& items, std::size_t k, const std::function<bool(const NodeSet&)>& fn) {
  if (k > items.size()) return false;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  NodeSet subset(k);
  for (;;) {
    for (std::size_t i = 0; i < k; ++i) subset[i] = items[idx[i]];
    if (fn(subset)) return true;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == items.size() - k + i - 1) --i;
    if (i == 0) return false;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

NodeSet parentless(const LscContext& ctx) {
  NodeSet out;
  for (NodeId v = 0; v < ctx.graph().num_observed(); ++v)
    if (ctx.parents(v).empty()) out.push_back(v);
  return out;
}

}  // namespace

NodeSet LscCertificate::certified() const {
  NodeSet out;
  for (const auto& s : steps) out.push_back(s.tuple.v);
  return make_set(std::move(out));
}

bool LscCertificate::covers_all_observed(const LatentDigraph& g) const {
  return certified() == g.observed_nodes();
}

LscContext::LscContext(const LatentDigraph& g)
    : g_(&g), lat_(latent_subgraph(g)), pa_(semi_direct_parent_sets(g)), search_(g) {}

TupleCheck LscContext::check_tuple(const LscTuple& raw, const PathSystemOptions& opts) const {
  const LatentDigraph& g = *g_;
  if (!g.is_observed(raw.v)) throw std::invalid_argument("tuple node must be observed");
  for (const NodeSet* s : {&raw.Y, &raw.Z})
    for (NodeId x : *s)
      if (!g.is_observed(x)) throw std::invalid_argument("Y and Z must contain observed nodes only");
  for (const NodeSet* s : {&raw.H1, &raw.H2})
    for (NodeId x : *s)
      if (!g.is_latent(x)) throw std::invalid_argument("H1 and H2 must contain latent nodes only");
  LscTuple t{raw.v, make_set(raw.Y), make_set(raw.Z), make_set(raw.H1), make_set(raw.H2)};
  const NodeSet& pa = parents(t.v);

  TupleCheck out;
  auto fail = [&](LscCondition c, std::string msg) {
    out.failed = c;
    out.diagnostic = std::move(msg);
    return out;
  };
  if (t.Y.size() != pa.size() + t.Z.size())
    return fail(LscCondition::Cardinality, "|Y| = " + std::to_string(t.Y.size()) +
                                               " but |pa(v)| + |Z| = " +
                                               std::to_string(pa.size() + t.Z.size()));
  if (t.Z.size() != t.H1.size() + t.H2.size())
    return fail(LscCondition::Cardinality, "|Z| = " + std::to_string(t.Z.size()) +
                                               " but |H1| + |H2| = " +
                                               std::to_string(t.H1.size() + t.H2.size()));
  if (!set_intersection(t.Z, pa).empty())
    return fail(LscCondition::Cardinality,
                "Z meets the semi-direct parents of " + g.name(t.v) + ": " +
                    join_names(g, set_intersection(t.Z, pa)));
  const NodeSet zv = set_union(t.Z, {t.v});
  if (!set_intersection(t.Y, zv).empty())
    return fail(LscCondition::Disjointness, "Y meets Z u {v}: " + join_names(g, set_intersection(t.Y, zv)));
  if (!trek_separates(lat_, t.Y, zv, t.H1, t.H2))
    return fail(LscCondition::TrekSeparation, "(H1,H2) = (" + join_names(g, t.H1) + "," +
                                                  join_names(g, t.H2) +
                                                  ") does not trek separate Y from Z u {v} in the latent subgraph");
  TrekSystemResult ts = search_.find(t.Z, pa, t.Y, opts);
  if (!ts.found)
    return fail(LscCondition::TrekSystem,
                ts.budget_exhausted ? "trek-system search ran out of budget"
                                    : "no trek system without sided intersection from Y to pa(v) u Z");
  out.satisfied = true;
  out.witness = std::move(ts.system);
  return out;
}

NodeSet LscContext::allowed_z(NodeId v, const NodeSet& h1, const NodeSet& h2,
                              const NodeSet& solved) const {
  const LatentDigraph& g = *g_;
  NodeSet from_h2;
  for (NodeId w : latent_descendants(g, h2))
    if (g.is_observed(w)) from_h2.push_back(w);
  NodeSet cand = set_union(latent_reachable(g, {}, {}, h1), from_h2);
  return set_difference(set_intersection(cand, make_set(solved)), set_union(parents(v), {v}));
}

NodeSet LscContext::allowed_y(NodeId v, const NodeSet& z, const NodeSet& h1, const NodeSet& h2,
                              const NodeSet& solved) const {
  const LatentDigraph& g = *g_;
  const NodeSet src = set_union(make_set(z), {v});
  const NodeSet lr = latent_reachable(g, h2, h1, src);
  NodeSet elr;
  for (NodeId w : descendants(g, lr))
    if (g.is_observed(w)) elr.push_back(w);
  const NodeSet excluded = set_union(set_difference(elr, make_set(solved)), lr);
  return set_difference(g.observed_nodes(), excluded);
}

NodeSet LscContext::extended_part(const LscTuple& t) const {
  const NodeSet src = set_union(make_set(t.Z), {t.v});
  return set_intersection(make_set(t.Y),
                          extended_latent_reachable(*g_, make_set(t.H2), make_set(t.H1), src));
}

TupleCheck check_tuple(const LatentDigraph& g, const LscTuple& t) {
  return LscContext(g).check_tuple(t);
}

NodeSet allowed_Z(const LatentDigraph& g, NodeId v, const NodeSet& h1, const NodeSet& h2,
                  const NodeSet& solved) {
  return LscContext(g).allowed_z(v, h1, h2, solved);
}

NodeSet allowed_Y(const LatentDigraph& g, NodeId v, const NodeSet& z, const NodeSet& h1,
                  const NodeSet& h2, const NodeSet& solved) {
  return LscContext(g).allowed_y(v, z, h1, h2, solved);
}

DecideResult decide(const LatentDigraph& g, const DecideOptions& options) {
  LscContext ctx(g);
  DecideResult res;
  res.combinations_tried.assign(g.num_observed(), 0);
  res.self_parent_nodes = self_semi_direct_nodes(g);

  NodeSet solved = parentless(ctx);
  for (NodeId v : solved) res.certificate.steps.push_back({LscTuple{v, {}, {}, {}, {}}, solved});

  const NodeSet latent = g.latent_nodes();
  const std::size_t max_total = std::min(
      options.k_bound.value_or(2 * latent.size()), std::min(2 * latent.size(), g.num_observed()));

  struct Cached {
    bool found;
    NodeSet y;
  };
  std::map<std::vector<std::size_t>, Cached> cache;
  bool out_of_budget = false;

  auto query = [&](NodeId v, const NodeSet& z, const NodeSet& ya) -> std::optional<NodeSet> {
    std::vector<std::size_t> key;
    if (options.memoize) {
      key.push_back(v);
      key.insert(key.end(), z.begin(), z.end());
      key.push_back(SIZE_MAX);
      key.insert(key.end(), ya.begin(), ya.end());
      auto it = cache.find(key);
      if (it != cache.end()) {
        ++res.stats.cache_hits;
        if (it->second.found) return it->second.y;
        return std::nullopt;
      }
    }
    // With Z empty the trivial treks on pa(v) form a system whenever pa(v) is
    // allowed; take it so the certificate records the parents themselves.
    if (z.empty() && set_difference(ctx.parents(v), ya).empty()) return ctx.parents(v);
    PathSystemOptions po = options.search;
    if (options.bb_node_budget != 0) {
      if (res.stats.bb_nodes >= options.bb_node_budget) {
        out_of_budget = true;
        return std::nullopt;
      }
      po.ilp.node_budget = options.bb_node_budget - res.stats.bb_nodes;
    }
    TrekSystemResult r = ctx.search().find(z, ctx.parents(v), ya, po);
    if (r.prefiltered) {
      ++res.stats.prefiltered;
    } else if (!(z.empty() && ctx.parents(v).empty())) {
      ++res.stats.ilp_calls;
      res.stats.bb_nodes += r.stats.bb_nodes;
      res.stats.lp_pivots += r.stats.lp_pivots;
      if (r.stats.lp_at_target) {
        ++res.stats.lp_at_target;
        if (!r.stats.integral_at_target && !r.budget_exhausted) ++res.stats.lp_at_target_without_integral;
      }
    }
    if (r.budget_exhausted) {
      out_of_budget = true;
      return std::nullopt;
    }
    Cached c{r.found, r.found ? r.system.sources() : NodeSet{}};
    if (options.memoize) cache.emplace(std::move(key), c);
    if (c.found) return c.y;
    return std::nullopt;
  };

  bool changed = true;
  while (changed && !out_of_budget) {
    changed = false;
    ++res.stats.passes;
    for (NodeId v = 0; v < g.num_observed() && !out_of_budget; ++v) {
      if (set_contains(solved, v)) continue;
      const std::size_t npa = ctx.parents(v).size();
      std::optional<LscTuple> found;
      for (std::size_t t = 0; t <= max_total && !found && !out_of_budget; ++t) {
        for (std::size_t s1 = 0; s1 <= t && !found && !out_of_budget; ++s1) {
          const std::size_t s2 = t - s1;
          if (s1 > latent.size() || s2 > latent.size()) continue;
          for_each_subset(latent, s1, [&](const NodeSet& h1) {
            return for_each_subset(latent, s2, [&](const NodeSet& h2) {
              const NodeSet za = ctx.allowed_z(v, h1, h2, solved);
              return for_each_subset(za, t, [&](const NodeSet& z) {
                ++res.combinations_tried[v];
                const NodeSet ya = ctx.allowed_y(v, z, h1, h2, solved);
                if (ya.size() < npa + t) return false;
                auto y = query(v, z, ya);
                if (out_of_budget) return true;
                if (!y) return false;
                found = LscTuple{v, *y, z, h1, h2};
                return true;
              });
            });
          });
        }
      }
      if (found) {
        res.certificate.steps.push_back({*found, solved});
        solved = set_union(solved, {v});
        changed = true;
      }
    }
  }
  res.budget_exhausted = out_of_budget;
  res.unsolved = set_difference(g.observed_nodes(), solved);
  res.identifiable = res.unsolved.empty();
  return res;
}

bool verify_certificate(const LatentDigraph& g, const LscCertificate& cert, std::string* reason) {
  LscContext ctx(g);
  auto fail = [&](std::string msg) {
    if (reason) *reason = std::move(msg);
    return false;
  };
  const NodeSet base = parentless(ctx);
  NodeSet solved = base;
  NodeSet seen;
  for (std::size_t i = 0; i < cert.steps.size(); ++i) {
    const LscTuple& t = cert.steps[i].tuple;
    const std::string where = "step " + std::to_string(i);
    if (!g.is_observed(t.v)) return fail(where + ": node is not observed");
    if (set_contains(seen, t.v)) return fail(where + ": " + g.name(t.v) + " certified twice");
    seen = set_union(seen, {t.v});
    TupleCheck tc;
    try {
      tc = ctx.check_tuple(t);
    } catch (const std::exception& e) {
      return fail(where + " (" + g.name(t.v) + "): " + e.what());
    }
    if (!tc.satisfied) return fail(where + " (" + g.name(t.v) + "): " + tc.diagnostic);
    const NodeSet needed = set_union(make_set(t.Z), ctx.extended_part(t));
    const NodeSet missing = set_difference(needed, solved);
    if (!missing.empty())
      return fail(where + " (" + g.name(t.v) + ") depends on unsolved nodes " + join_names(g, missing));
    solved = set_union(solved, {t.v});
  }
  return true;
}

std::string certificate_to_json(const LatentDigraph& g, const LscCertificate& cert) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& s : cert.steps) {
    nlohmann::ordered_json o;
    o["v"] = g.name(s.tuple.v);
    o["Y"] = g.names(s.tuple.Y);
    o["Z"] = g.names(s.tuple.Z);
    o["H1"] = g.names(s.tuple.H1);
    o["H2"] = g.names(s.tuple.H2);
    arr.push_back(std::move(o));
  }
  return arr.dump(2) + "\n";
}

LscCertificate certificate_from_json(const LatentDigraph& g, const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw GraphError(GraphError::Kind::Malformed, "", std::string("invalid certificate JSON: ") + e.what());
  }
  if (!doc.is_array()) throw GraphError(GraphError::Kind::Malformed, "", "certificate must be a JSON array");
  auto names = [&](const nlohmann::json& o, const char* key) {
    std::vector<std::string> out;
    if (!o.contains(key)) return out;
    if (!o.at(key).is_array())
      throw GraphError(GraphError::Kind::Malformed, key, std::string("'") + key + "' must be an array");
    for (const auto& x : o.at(key)) {
      if (!x.is_string()) throw GraphError(GraphError::Kind::Malformed, x.dump(), "node names must be strings");
      out.push_back(x.get<std::string>());
    }
    return out;
  };
  LscCertificate cert;
  NodeSet solved;
  const auto pa = semi_direct_parent_sets(g);
  for (NodeId v = 0; v < g.num_observed(); ++v)
    if (pa[v].empty()) solved.push_back(v);
  for (const auto& o : doc) {
    if (!o.is_object() || !o.contains("v") || !o.at("v").is_string())
      throw GraphError(GraphError::Kind::Malformed, o.dump(), "each step needs a string 'v'");
    LscTuple t;
    t.v = g.id(o.at("v").get<std::string>());
    t.Y = g.ids(names(o, "Y"));
    t.Z = g.ids(names(o, "Z"));
    t.H1 = g.ids(names(o, "H1"));
    t.H2 = g.ids(names(o, "H2"));
    cert.steps.push_back({t, solved});
    solved = set_union(solved, {t.v});
  }
  return cert;
}

}  // namespace lscid
