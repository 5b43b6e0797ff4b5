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

#include "lscid/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <omp.h>

#include <json.hpp>

#include "lscid/lsc.hpp"

namespace lscid {

namespace {

struct GraphOutcome {
  std::vector<char> lsc, lsc_can, timeout;
  std::vector<double> seconds;
  std::size_t certificate_failures = 0;
  std::size_t lp_at_target = 0;
  std::size_t lp_at_target_without_integral = 0;
};

GraphOutcome evaluate(const ExperimentConfig& cfg, std::size_t prob_index, std::size_t graph_index) {
  std::mt19937_64 rng(graph_seed(cfg.seed, graph_index));
  const LatentDigraph g = realize_graph(draw_graph(cfg.n_observed, cfg.n_latent, rng), cfg.edge_probs[prob_index]);
  const LatentDigraph can = canonicalize(g);
  GraphOutcome out;
  for (std::size_t k : cfg.k_bounds) {
    DecideOptions opts;
    opts.k_bound = k;
    opts.bb_node_budget = cfg.bb_node_budget;
    const auto start = std::chrono::steady_clock::now();
    const DecideResult a = decide(g, opts);
    const DecideResult b = decide(can, opts);
    out.seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    out.lsc.push_back(a.identifiable);
    out.lsc_can.push_back(b.identifiable);
    out.timeout.push_back(a.budget_exhausted || b.budget_exhausted);
    if (a.identifiable && !verify_certificate(g, a.certificate)) ++out.certificate_failures;
    if (b.identifiable && !verify_certificate(can, b.certificate)) ++out.certificate_failures;
    out.lp_at_target += a.stats.lp_at_target + b.stats.lp_at_target;
    out.lp_at_target_without_integral += a.stats.lp_at_target_without_integral + b.stats.lp_at_target_without_integral;
  }
  return out;
}

ExperimentResult aggregate(const ExperimentConfig& cfg, const std::vector<GraphOutcome>& outcomes) {
  ExperimentResult res;
  for (std::size_t pi = 0; pi < cfg.edge_probs.size(); ++pi) {
    for (std::size_t ki = 0; ki < cfg.k_bounds.size(); ++ki) {
      CellResult c;
      c.edge_prob = cfg.edge_probs[pi];
      c.k = cfg.k_bounds[ki];
      for (std::size_t gi = 0; gi < cfg.graphs_per_prob; ++gi) {
        const GraphOutcome& o = outcomes[pi * cfg.graphs_per_prob + gi];
        ++c.n_total;
        c.n_lsc += o.lsc[ki];
        c.n_lsc_can += o.lsc_can[ki];
        c.n_G_not_can += o.lsc[ki] && !o.lsc_can[ki];
        c.n_can_not_G += !o.lsc[ki] && o.lsc_can[ki];
        c.n_timeout += o.timeout[ki];
        c.seconds += o.seconds[ki];
      }
      res.cells.push_back(c);
    }
  }
  for (const GraphOutcome& o : outcomes) {
    res.certificate_failures += o.certificate_failures;
    res.lp_at_target += o.lp_at_target;
    res.lp_at_target_without_integral += o.lp_at_target_without_integral;
  }
  std::stable_sort(res.cells.begin(), res.cells.end(), [](const CellResult& a, const CellResult& b) {
    return a.edge_prob != b.edge_prob ? a.edge_prob < b.edge_prob : a.k < b.k;
  });
  return res;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.n_observed == 0) throw std::invalid_argument("n_observed must be positive");
  for (double p : cfg.edge_probs)
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("edge probabilities must lie in (0, 1)");
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("invalid config JSON: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");
  ExperimentConfig cfg;
  // nlohmann converts negative numbers to unsigned targets silently.
  auto count = [](const nlohmann::json& j, const char* key) {
    if (!j.is_number_unsigned()) throw std::invalid_argument(std::string(key) + " must be a non-negative integer");
    return j.get<std::uint64_t>();
  };
  try {
    if (doc.contains("n_observed")) cfg.n_observed = count(doc.at("n_observed"), "n_observed");
    if (doc.contains("n_latent")) cfg.n_latent = count(doc.at("n_latent"), "n_latent");
    if (doc.contains("edge_probs")) cfg.edge_probs = doc.at("edge_probs").get<std::vector<double>>();
    if (doc.contains("graphs_per_prob")) cfg.graphs_per_prob = count(doc.at("graphs_per_prob"), "graphs_per_prob");
    if (doc.contains("k_bounds")) {
      if (!doc.at("k_bounds").is_array()) throw std::invalid_argument("k_bounds must be an array");
      cfg.k_bounds.clear();
      for (const auto& k : doc.at("k_bounds")) cfg.k_bounds.push_back(count(k, "k_bounds entry"));
    }
    if (doc.contains("seed")) cfg.seed = count(doc.at("seed"), "seed");
    if (doc.contains("parallelism")) cfg.parallelism = count(doc.at("parallelism"), "parallelism");
    if (doc.contains("bb_node_budget")) cfg.bb_node_budget = count(doc.at("bb_node_budget"), "bb_node_budget");
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad config field: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

GraphDraw draw_graph(std::size_t n_observed, std::size_t n_latent, std::mt19937_64& rng) {
  GraphDraw d;
  d.n_observed = n_observed;
  d.n_latent = n_latent;
  const std::size_t n = n_observed + n_latent;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d.uniforms.push_back(unif(rng));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  d.latent.assign(n, 0);
  for (std::size_t i = 0; i < n_latent; ++i) d.latent[order[i]] = 1;
  return d;
}

LatentDigraph realize_graph(const GraphDraw& draw, double p) {
  const std::size_t n = draw.n_observed + draw.n_latent;
  std::vector<NodeId> id(n);
  std::vector<std::string> observed, latent;
  for (std::size_t i = 0; i < n; ++i) {
    if (draw.latent[i]) {
      latent.push_back("h" + std::to_string(latent.size() + 1));
    } else {
      id[i] = observed.size();
      observed.push_back("v" + std::to_string(observed.size() + 1));
    }
  }
  for (std::size_t i = 0, l = 0; i < n; ++i)
    if (draw.latent[i]) id[i] = observed.size() + l++;
  std::vector<Edge> edges;
  std::size_t u = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (draw.uniforms[u++] < p) edges.push_back({id[i], id[j]});
  return LatentDigraph(std::move(observed), std::move(latent), std::move(edges));
}

LatentDigraph random_graph(std::size_t n_observed, std::size_t n_latent, double p, std::mt19937_64& rng) {
  return realize_graph(draw_graph(n_observed, n_latent, rng), p);
}

std::uint64_t graph_seed(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const std::size_t total = cfg.edge_probs.size() * cfg.graphs_per_prob;
  std::vector<GraphOutcome> outcomes(total);
  const int threads = cfg.parallelism > 0 ? static_cast<int>(cfg.parallelism) : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::size_t i = 0; i < total; ++i)
    outcomes[i] = evaluate(cfg, i / cfg.graphs_per_prob, i % cfg.graphs_per_prob);
  return aggregate(cfg, outcomes);
}

ExperimentResult run_experiment_serial(const ExperimentConfig& cfg) {
  validate(cfg);
  const std::size_t total = cfg.edge_probs.size() * cfg.graphs_per_prob;
  std::vector<GraphOutcome> outcomes(total);
  for (std::size_t i = 0; i < total; ++i)
    outcomes[i] = evaluate(cfg, i / cfg.graphs_per_prob, i % cfg.graphs_per_prob);
  return aggregate(cfg, outcomes);
}

std::string to_csv(const ExperimentResult& result) {
  std::ostringstream os;
  os << "edge_prob,k,n_total,n_lsc,n_lsc_can,n_G_not_can,n_can_not_G,n_timeout,seconds\n";
  for (const CellResult& c : result.cells) {
    char seconds[32];
    std::snprintf(seconds, sizeof seconds, "%.3f", c.seconds);
    os << c.edge_prob << ',' << c.k << ',' << c.n_total << ',' << c.n_lsc << ',' << c.n_lsc_can << ','
       << c.n_G_not_can << ',' << c.n_can_not_G << ',' << c.n_timeout << ',' << seconds << '\n';
  }
  return os.str();
}

}  // namespace lscid
