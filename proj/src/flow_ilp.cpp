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

#include "lscid/flow_ilp.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace lscid {

namespace {

void check_in_range(std::size_t n, const NodeSet& s, const char* what) {
  for (NodeId v : s)
    if (v >= n) throw std::invalid_argument(std::string(what) + " contains unknown node");
}

// ---------------------------------------------------------------------------
// Presolve: fix variables to zero and reduce the row set.

struct ReducedProgram {
  std::vector<std::size_t> vars;  // reduced index -> program variable
  std::vector<int> objective;     // per reduced variable
  struct Row {
    Sense sense;
    int rhs;
    std::vector<std::pair<std::size_t, int>> terms;  // reduced indices
  };
  std::vector<Row> rows;
  std::size_t fixed = 0;
};

ReducedProgram presolve(const FlowProgram& prog) {
  const std::size_t nv = prog.num_variables();
  std::vector<char> zero(nv, 0);
  for (const FlowRow& r : prog.rows)
    if (r.kind == RowKind::SubgraphExclusion)
      for (const auto& [j, a] : r.terms) zero[j] = 1;

  // A conservation row whose inflow (or outflow) is forced to zero forces the
  // other side to zero as well, since all variables are nonnegative.
  bool changed = true;
  while (changed) {
    changed = false;
    for (const FlowRow& r : prog.rows) {
      if (r.kind != RowKind::Conservation) continue;
      bool in_dead = true, out_dead = true;
      for (const auto& [j, a] : r.terms) {
        if (zero[j]) continue;
        (a > 0 ? in_dead : out_dead) = false;
      }
      if (!in_dead && !out_dead) continue;
      for (const auto& [j, a] : r.terms) {
        if (!zero[j]) {
          zero[j] = 1;
          changed = true;
        }
      }
    }
  }

  ReducedProgram red;
  std::vector<std::size_t> index(nv, SIZE_MAX);
  for (std::size_t j = 0; j < nv; ++j) {
    if (zero[j]) {
      ++red.fixed;
      continue;
    }
    index[j] = red.vars.size();
    red.vars.push_back(j);
    red.objective.push_back(prog.objective[j]);
  }

  std::vector<char> has_joint(prog.graph.num_original, 0);
  for (const FlowRow& r : prog.rows)
    if (r.kind == RowKind::JointCapacity) has_joint[r.anchor] = 1;

  for (const FlowRow& r : prog.rows) {
    if (r.kind == RowKind::Nonnegativity || r.kind == RowKind::SubgraphExclusion) continue;
    // The joint row of the same node contains every term of a family row.
    if (r.kind == RowKind::FamilyCapacity && has_joint[r.anchor]) continue;
    ReducedProgram::Row row{r.sense, r.rhs, {}};
    for (const auto& [j, a] : r.terms)
      if (index[j] != SIZE_MAX) row.terms.emplace_back(index[j], a);
    if (row.terms.empty()) continue;
    red.rows.push_back(std::move(row));
  }
  return red;
}

// ---------------------------------------------------------------------------
// Branch and bound over the reduced 0/1 program.

template <class T>
T floor_of(const T& x);

template <>
Rational floor_of(const Rational& x) {
  std::int64_t q = x.num() / x.den();
  if (x.num() % x.den() != 0 && x.num() < 0) --q;
  return Rational(q);
}

template <>
BigRational floor_of(const BigRational& x) {
  using boost::multiprecision::cpp_int;
  cpp_int n = boost::multiprecision::numerator(x);
  cpp_int d = boost::multiprecision::denominator(x);
  cpp_int q = n / d;
  if (q * d != n && n < 0) --q;
  return BigRational(q);
}

std::int64_t to_int(const Rational& x) { return x.num() / x.den(); }
std::int64_t to_int(const BigRational& x) {
  return static_cast<std::int64_t>(boost::multiprecision::numerator(x) /
                                   boost::multiprecision::denominator(x));
}
BigRational to_big(const Rational& x) { return x.to_big(); }
BigRational to_big(const BigRational& x) { return x; }

struct BbOutcome {
  std::vector<char> best;  // reduced 0/1 assignment
  std::int64_t best_obj = 0;
  BigRational root_bound;
  IlpStatus status = IlpStatus::Optimal;
  std::size_t nodes = 0;
  std::size_t pivots = 0;
};

template <class T>
BbOutcome branch_and_bound(const ReducedProgram& red, std::int64_t target, const IlpOptions& opt) {
  const std::size_t n = red.vars.size();
  BbOutcome out;
  out.best.assign(n, 0);
  bool have_root = false;

  std::vector<std::vector<signed char>> stack;
  stack.emplace_back(n, static_cast<signed char>(-1));

  while (!stack.empty()) {
    if (opt.node_budget != 0 && out.nodes >= opt.node_budget) {
      out.status = IlpStatus::BudgetExhausted;
      return out;
    }
    std::vector<signed char> fix = std::move(stack.back());
    stack.pop_back();
    ++out.nodes;

    std::vector<std::size_t> local(n, SIZE_MAX);
    std::vector<std::size_t> free_vars;
    std::int64_t const_obj = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (fix[j] < 0) {
        local[j] = free_vars.size();
        free_vars.push_back(j);
      } else if (fix[j] == 1) {
        const_obj += red.objective[j];
      }
    }

    LpProblem<T> lp;
    lp.num_vars = free_vars.size();
    lp.objective.assign(lp.num_vars, T(0));
    for (std::size_t k = 0; k < free_vars.size(); ++k) lp.objective[k] = T(red.objective[free_vars[k]]);
    bool infeasible = false;
    for (const auto& row : red.rows) {
      LpRow<T> r;
      r.sense = row.sense;
      std::int64_t rhs = row.rhs;
      for (const auto& [j, a] : row.terms) {
        if (fix[j] < 0)
          r.terms.emplace_back(local[j], T(a));
        else if (fix[j] == 1)
          rhs -= a;
      }
      if (r.terms.empty()) {
        if ((row.sense == Sense::Equal && rhs != 0) || (row.sense == Sense::LessEqual && rhs < 0) ||
            (row.sense == Sense::GreaterEqual && rhs > 0))
          infeasible = true;
        continue;
      }
      r.rhs = T(rhs);
      lp.rows.push_back(std::move(r));
    }
    if (infeasible) continue;

    LpResult<T> res = solve_lp(lp);
    out.pivots += res.pivots;
    if (res.status != LpStatus::Optimal) continue;
    const T bound = res.objective + T(const_obj);
    if (!have_root) {
      have_root = true;
      out.root_bound = to_big(bound);
    }
    const std::int64_t ceiling = to_int(floor_of(bound));
    if (opt.decision_only ? ceiling < target : ceiling <= out.best_obj) continue;

    // Most fractional variable, ties to the smallest index.
    std::size_t branch = SIZE_MAX;
    T best_gap{};
    const T half = T(1) / T(2);
    for (std::size_t k = 0; k < free_vars.size(); ++k) {
      if (is_integral(res.x[k])) continue;
      T gap = res.x[k] - half;
      if (gap < T(0)) gap = T(0) - gap;
      if (branch == SIZE_MAX || gap < best_gap) {
        branch = free_vars[k];
        best_gap = gap;
      }
    }
    if (branch == SIZE_MAX) {
      const std::int64_t value = to_int(bound);
      if (value > out.best_obj) {
        out.best_obj = value;
        for (std::size_t j = 0; j < n; ++j)
          out.best[j] = fix[j] == 1 || (fix[j] < 0 && res.x[local[j]] == T(1));
      }
      if (out.best_obj >= target) {
        out.status = IlpStatus::TargetReached;
        return out;
      }
      continue;
    }
    std::vector<signed char> zero = fix, one = std::move(fix);
    zero[branch] = 0;
    one[branch] = 1;
    stack.push_back(std::move(zero));
    stack.push_back(std::move(one));
  }
  out.status = opt.decision_only && out.best_obj < target ? IlpStatus::BelowTarget : IlpStatus::Optimal;
  return out;
}

// ---------------------------------------------------------------------------
// Unit-capacity node-disjoint max flow, used as a necessary-condition filter.

std::size_t max_disjoint_paths(std::size_t n, const std::vector<Edge>& edges, const NodeSet& sources,
                               const NodeSet& sinks) {
  // Split nodes: in(v) = 2v, out(v) = 2v + 1; super source 2n, super sink 2n+1.
  const std::size_t N = 2 * n + 2, S = 2 * n, T = 2 * n + 1;
  struct Arc {
    std::size_t to;
    int cap;
    std::size_t rev;
  };
  std::vector<std::vector<Arc>> adj(N);
  auto add = [&](std::size_t a, std::size_t b) {
    adj[a].push_back({b, 1, adj[b].size()});
    adj[b].push_back({a, 0, adj[a].size() - 1});
  };
  for (std::size_t v = 0; v < n; ++v) add(2 * v, 2 * v + 1);
  for (const Edge& e : edges) add(2 * e.tail + 1, 2 * e.head);
  for (NodeId y : sources) add(S, 2 * y);
  for (NodeId z : sinks) add(2 * z + 1, T);

  std::size_t flow = 0;
  std::vector<char> seen(N);
  std::function<bool(std::size_t)> dfs = [&](std::size_t x) {
    if (x == T) return true;
    seen[x] = 1;
    for (Arc& a : adj[x]) {
      if (a.cap > 0 && !seen[a.to] && dfs(a.to)) {
        --a.cap;
        ++adj[a.to][a.rev].cap;
        return true;
      }
    }
    return false;
  };
  for (;;) {
    std::fill(seen.begin(), seen.end(), 0);
    if (!dfs(S)) break;
    ++flow;
  }
  return flow;
}

}  // namespace

FlowGraph build_flow_graph(const Digraph& g, const EdgeMask& g1, const NodeSet& Z, const NodeSet& P,
                           const NodeSet& Ya) {
  const std::size_t n = g.num_nodes();
  if (g1.size() != g.edges.size())
    throw std::invalid_argument("subgraph mask size does not match edge count");
  check_in_range(n, Z, "Z");
  check_in_range(n, P, "P");
  check_in_range(n, Ya, "Ya");
  if (!set_intersection(make_set(Z), make_set(P)).empty())
    throw std::invalid_argument("Z and P overlap");
  FlowGraph fg;
  fg.num_original = n;
  fg.source = n;
  fg.sink = n + 1;
  fg.Z = make_set(Z);
  fg.P = make_set(P);
  fg.Ya = make_set(Ya);
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const Edge& e = g.edges[i];
    if (e.tail >= n || e.head >= n) throw std::invalid_argument("edge endpoint out of range");
    fg.edges.push_back({e.tail, e.head, FlowEdgeKind::Original, g1[i] != 0});
  }
  for (NodeId y : fg.Ya) fg.edges.push_back({fg.source, y, FlowEdgeKind::Source, true});
  for (NodeId z : fg.Z) fg.edges.push_back({z, fg.sink, FlowEdgeKind::ZSink, true});
  for (NodeId p : fg.P) fg.edges.push_back({p, fg.sink, FlowEdgeKind::PSink, false});
  return fg;
}

FlowProgram build_lp(const FlowGraph& fg) {
  FlowProgram prog;
  prog.graph = fg;
  const std::size_t m = fg.edges.size();
  prog.objective.assign(2 * m, 0);
  for (std::size_t e = 0; e < m; ++e) {
    if (fg.edges[e].kind == FlowEdgeKind::ZSink) prog.objective[prog.var(Family::F1, e)] = 1;
    if (fg.edges[e].kind == FlowEdgeKind::PSink) prog.objective[prog.var(Family::F, e)] = 1;
  }
  for (std::size_t j = 0; j < 2 * m; ++j)
    prog.rows.push_back({RowKind::Nonnegativity, Sense::GreaterEqual, 0, {{j, 1}}, j % m});

  std::vector<std::vector<std::size_t>> in(fg.num_original), out(fg.num_original);
  for (std::size_t e = 0; e < m; ++e) {
    if (fg.edges[e].head < fg.num_original) in[fg.edges[e].head].push_back(e);
    if (fg.edges[e].tail < fg.num_original) out[fg.edges[e].tail].push_back(e);
  }
  for (NodeId v = 0; v < fg.num_original; ++v) {
    for (Family fam : {Family::F, Family::F1}) {
      FlowRow cons{RowKind::Conservation, Sense::Equal, 0, {}, v};
      for (std::size_t e : in[v]) cons.terms.emplace_back(prog.var(fam, e), 1);
      for (std::size_t e : out[v]) cons.terms.emplace_back(prog.var(fam, e), -1);
      prog.rows.push_back(std::move(cons));
      FlowRow cap{RowKind::FamilyCapacity, Sense::LessEqual, 1, {}, v};
      for (std::size_t e : in[v]) cap.terms.emplace_back(prog.var(fam, e), 1);
      prog.rows.push_back(std::move(cap));
    }
  }
  for (std::size_t e = 0; e < m; ++e)
    if (!fg.edges[e].f1_allowed)
      prog.rows.push_back({RowKind::SubgraphExclusion, Sense::Equal, 0, {{prog.var(Family::F1, e), 1}}, e});
  for (NodeId v = 0; v < fg.num_original; ++v) {
    FlowRow joint{RowKind::JointCapacity, Sense::LessEqual, 1, {}, v};
    for (std::size_t e : in[v]) {
      joint.terms.emplace_back(prog.var(Family::F, e), 1);
      joint.terms.emplace_back(prog.var(Family::F1, e), 1);
    }
    prog.rows.push_back(std::move(joint));
  }
  return prog;
}

std::string to_lp_text(const FlowProgram& prog) {
  const std::size_t m = prog.num_edges();
  auto var_name = [&](std::size_t j) {
    return (j < m ? "f_" : "f1_") + std::to_string(j % m);
  };
  auto node_name = [&](NodeId v) {
    if (v == prog.graph.source) return std::string("s");
    if (v == prog.graph.sink) return std::string("t");
    return std::to_string(v);
  };
  std::ostringstream os;
  os << "\\ flow program: " << prog.graph.num_original << " original nodes, " << m << " flow edges\n";
  for (std::size_t e = 0; e < m; ++e)
    os << "\\ edge " << e << ": " << node_name(prog.graph.edges[e].tail) << " -> "
       << node_name(prog.graph.edges[e].head) << "\n";
  auto expr = [&](const std::vector<std::pair<std::size_t, int>>& terms) {
    std::string s;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const auto& [j, a] = terms[i];
      if (i == 0)
        s += a < 0 ? "- " : "";
      else
        s += a < 0 ? " - " : " + ";
      if (a != 1 && a != -1) s += std::to_string(a < 0 ? -a : a) + " ";
      s += var_name(j);
    }
    return s.empty() ? std::string("0 ") + var_name(0) : s;
  };
  std::vector<std::pair<std::size_t, int>> obj;
  for (std::size_t j = 0; j < prog.objective.size(); ++j)
    if (prog.objective[j] != 0) obj.emplace_back(j, prog.objective[j]);
  os << "Maximize\n obj: " << (obj.empty() ? std::string("0") : expr(obj)) << "\nSubject To\n";
  std::size_t idx = 0;
  for (const FlowRow& r : prog.rows) {
    if (r.kind == RowKind::Nonnegativity) continue;
    const char* tag = r.kind == RowKind::Conservation      ? "cons"
                      : r.kind == RowKind::FamilyCapacity  ? "cap"
                      : r.kind == RowKind::SubgraphExclusion ? "excl"
                                                             : "joint";
    const char* op = r.sense == Sense::Equal ? " = " : r.sense == Sense::LessEqual ? " <= " : " >= ";
    if (r.terms.empty()) continue;
    os << " " << tag << idx++ << ": " << expr(r.terms) << op << r.rhs << "\n";
  }
  os << "Bounds\n";
  for (std::size_t j = 0; j < prog.num_variables(); ++j) os << " " << var_name(j) << " >= 0\n";
  os << "End\n";
  return os.str();
}

IlpSolution solve_ilp(const FlowProgram& prog, const IlpOptions& options) {
  IlpSolution sol;
  sol.values.assign(prog.num_variables(), Rational(0));
  const ReducedProgram red = presolve(prog);
  sol.stats.presolve_fixed = red.fixed;
  const auto target = static_cast<std::int64_t>(prog.target());

  BbOutcome bb;
  try {
    bb = branch_and_bound<Rational>(red, target, options);
  } catch (const RationalOverflow&) {
    sol.stats.big_rational_fallback = true;
    bb = branch_and_bound<BigRational>(red, target, options);
  }
  sol.stats.bb_nodes = bb.nodes;
  sol.stats.lp_pivots = bb.pivots;
  sol.lp_bound = bb.root_bound;
  sol.status = bb.status;
  sol.objective = Rational(bb.best_obj);
  for (std::size_t k = 0; k < red.vars.size(); ++k)
    if (bb.best[k]) sol.values[red.vars[k]] = Rational(1);
  sol.stats.lp_at_target = bb.nodes > 0 && bb.root_bound == BigRational(target);
  sol.stats.integral_at_target = bb.best_obj == target;
  return sol;
}

bool is_feasible(const FlowProgram& prog, const std::vector<Rational>& values) {
  if (values.size() != prog.num_variables()) return false;
  for (const FlowRow& r : prog.rows) {
    Rational lhs(0);
    for (const auto& [j, a] : r.terms) lhs += Rational(a) * values[j];
    const Rational rhs(r.rhs);
    if (r.sense == Sense::Equal && lhs != rhs) return false;
    if (r.sense == Sense::LessEqual && lhs > rhs) return false;
    if (r.sense == Sense::GreaterEqual && lhs < rhs) return false;
  }
  return true;
}

std::vector<std::vector<NodeId>> decompose_flow(const FlowProgram& prog,
                                                const std::vector<Rational>& values) {
  const FlowGraph& fg = prog.graph;
  std::vector<std::vector<NodeId>> paths;
  for (Family fam : {Family::F1, Family::F}) {
    std::vector<std::vector<std::size_t>> out(fg.num_nodes());
    for (std::size_t e = 0; e < fg.edges.size(); ++e)
      if (values[prog.var(fam, e)] == Rational(1)) out[fg.edges[e].tail].push_back(e);
    for (std::size_t se : out[fg.source]) {
      std::vector<NodeId> path{fg.edges[se].head};
      std::vector<char> visited(fg.num_nodes(), 0);
      visited[path.back()] = 1;
      for (;;) {
        const NodeId cur = path.back();
        if (out[cur].empty()) break;
        const FlowEdge& e = fg.edges[out[cur].front()];
        if (e.head == fg.sink) {
          const bool counts = (fam == Family::F1 && e.kind == FlowEdgeKind::ZSink) ||
                              (fam == Family::F && e.kind == FlowEdgeKind::PSink);
          if (counts) paths.push_back(path);
          break;
        }
        if (visited[e.head]) break;
        visited[e.head] = 1;
        path.push_back(e.head);
      }
    }
  }
  return paths;
}

PathSystemResult has_path_system(const Digraph& g, const EdgeMask& g1, const NodeSet& Z,
                                 const NodeSet& P, const NodeSet& Ya,
                                 const PathSystemOptions& options) {
  FlowGraph fg = build_flow_graph(g, g1, Z, P, Ya);
  PathSystemResult result;
  if (fg.Z.empty() && fg.P.empty()) {
    result.found = true;
    return result;
  }
  if (options.flow_bound_prefilter) {
    std::vector<Edge> sub;
    for (std::size_t i = 0; i < g.edges.size(); ++i)
      if (g1[i]) sub.push_back(g.edges[i]);
    if (max_disjoint_paths(g.num_nodes(), g.edges, fg.Ya, set_union(fg.Z, fg.P)) <
            fg.Z.size() + fg.P.size() ||
        max_disjoint_paths(g.num_nodes(), sub, fg.Ya, fg.Z) < fg.Z.size()) {
      result.prefiltered = true;
      return result;
    }
  }
  FlowProgram prog = build_lp(fg);
  IlpSolution sol = solve_ilp(prog, options.ilp);
  result.stats = sol.stats;
  result.budget_exhausted = sol.status == IlpStatus::BudgetExhausted;
  if (sol.objective == Rational(static_cast<std::int64_t>(prog.target()))) {
    result.found = true;
    result.paths = decompose_flow(prog, sol.values);
  }
  return result;
}

bool brute_force_path_system(const Digraph& g, const EdgeMask& g1, const NodeSet& Z,
                             const NodeSet& P, const NodeSet& Ya) {
  const std::size_t n = g.num_nodes();
  if (n > kBruteForceNodeBound)
    throw std::invalid_argument("brute-force path search limited to " +
                                std::to_string(kBruteForceNodeBound) + " nodes");
  if (g1.size() != g.edges.size())
    throw std::invalid_argument("subgraph mask size does not match edge count");
  check_in_range(n, Z, "Z");
  check_in_range(n, P, "P");
  check_in_range(n, Ya, "Ya");
  // Parents per node, with the subgraph flag of the connecting edge.
  std::vector<std::vector<std::pair<NodeId, bool>>> parents(n);
  for (std::size_t i = 0; i < g.edges.size(); ++i)
    parents[g.edges[i].head].emplace_back(g.edges[i].tail, g1[i] != 0);
  std::vector<char> allowed_source(n, 0);
  for (NodeId y : Ya) allowed_source[y] = 1;

  std::vector<std::pair<NodeId, bool>> targets;
  for (NodeId z : make_set(Z)) targets.emplace_back(z, true);
  for (NodeId p : make_set(P)) targets.emplace_back(p, false);
  std::vector<char> used(n, 0);

  // Grows paths backwards from each target; any unused source on the way may
  // start the path.
  std::function<bool(std::size_t)> assign;
  std::function<bool(std::size_t, NodeId, bool, std::vector<NodeId>&)> extend =
      [&](std::size_t i, NodeId cur, bool sub_only, std::vector<NodeId>& path) {
        if (allowed_source[cur] && assign(i + 1)) return true;
        for (const auto& [p, in_sub] : parents[cur]) {
          if (used[p] || (sub_only && !in_sub)) continue;
          used[p] = 1;
          path.push_back(p);
          bool ok = extend(i, p, sub_only, path);
          path.pop_back();
          used[p] = 0;
          if (ok) return true;
        }
        return false;
      };
  assign = [&](std::size_t i) {
    if (i == targets.size()) return true;
    const auto [t, sub_only] = targets[i];
    if (used[t]) return false;
    used[t] = 1;
    std::vector<NodeId> path{t};
    bool ok = extend(i, t, sub_only, path);
    used[t] = 0;
    return ok;
  };
  return assign(0);
}

GlpGraph build_glp(const LatentDigraph& g) {
  GlpGraph out;
  const std::size_t n = g.num_nodes();
  out.base = n;
  for (NodeId v = 0; v < n; ++v) out.graph.names.push_back(g.name(v));
  for (NodeId v = 0; v < n; ++v) out.graph.names.push_back(g.name(v) + "'");
  for (const Edge& e : g.edges()) {
    if (!g.is_latent(e.tail)) continue;
    out.graph.edges.push_back({e.head, e.tail});
    out.latent_edges.push_back(1);
  }
  for (NodeId v = 0; v < n; ++v) {
    out.graph.edges.push_back({v, v + n});
    out.latent_edges.push_back(1);
  }
  for (const Edge& e : g.edges()) {
    out.graph.edges.push_back({e.tail + n, e.head + n});
    out.latent_edges.push_back(g.is_latent(e.tail) ? 1 : 0);
  }
  return out;
}

TrekSystemSearch::TrekSystemSearch(const LatentDigraph& g) : g_(&g), glp_(build_glp(g)) {}

TrekSystemResult TrekSystemSearch::find(const NodeSet& Z, const NodeSet& P, const NodeSet& Ya,
                                        const PathSystemOptions& options) const {
  for (const NodeSet* s : {&Z, &P, &Ya})
    for (NodeId v : *s)
      if (!g_->is_observed(v)) throw std::invalid_argument("trek-system query uses non-observed node");
  NodeSet zp, pp;
  for (NodeId z : Z) zp.push_back(glp_.primed(z));
  for (NodeId p : P) pp.push_back(glp_.primed(p));
  PathSystemResult ps = has_path_system(glp_.graph, glp_.latent_edges, zp, pp, Ya, options);
  TrekSystemResult out;
  out.found = ps.found;
  out.budget_exhausted = ps.budget_exhausted;
  out.prefiltered = ps.prefiltered;
  out.stats = ps.stats;
  for (const auto& path : ps.paths) {
    Trek t;
    std::size_t split = 0;
    while (split < path.size() && path[split] < glp_.base) ++split;
    if (split == 0 || split == path.size())
      throw std::logic_error("path in doubled graph does not cross to the primed copy");
    t.left.assign(path.rbegin() + static_cast<std::ptrdiff_t>(path.size() - split), path.rend());
    for (std::size_t i = split; i < path.size(); ++i) t.right.push_back(path[i] - glp_.base);
    out.system.treks.push_back(std::move(t));
  }
  return out;
}

TrekSystemResult has_trek_system(const LatentDigraph& g, const NodeSet& Z, const NodeSet& P,
                                 const NodeSet& Ya, const PathSystemOptions& options) {
  return TrekSystemSearch(g).find(Z, P, Ya, options);
}

}  // namespace lscid
