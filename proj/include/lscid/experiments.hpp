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
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "lscid/graph.hpp"

namespace lscid {

struct ExperimentConfig {
  std::size_t n_observed = 10;
  std::size_t n_latent = 5;
  std::vector<double> edge_probs{0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45};
  std::size_t graphs_per_prob = 100;
  std::vector<std::size_t> k_bounds{1, 2};
  std::uint64_t seed = 2024;
  // Worker threads; 0 uses the OpenMP default.
  std::size_t parallelism = 0;
  // Branch-and-bound nodes per decide call; 0 means unlimited.
  std::size_t bb_node_budget = 100000;
};

// Throws std::invalid_argument on malformed or out-of-range fields.
ExperimentConfig parse_experiment_config(std::string_view text);

// The randomness behind one generated graph, independent of the edge
// probability: one uniform per node pair i < j and the latent flags.
struct GraphDraw {
  std::size_t n_observed = 0;
  std::size_t n_latent = 0;
  std::vector<double> uniforms;
  std::vector<char> latent;
};

GraphDraw draw_graph(std::size_t n_observed, std::size_t n_latent, std::mt19937_64& rng);
// Edge i -> j for i < j whenever its uniform falls below p. Observed nodes are
// named v1.. and latent nodes h1.. in generation order.
LatentDigraph realize_graph(const GraphDraw& draw, double p);
LatentDigraph random_graph(std::size_t n_observed, std::size_t n_latent, double p, std::mt19937_64& rng);

// Seed of the i-th graph of a run. Every edge probability reuses the same
// stream, so cells differ only through p.
std::uint64_t graph_seed(std::uint64_t seed, std::size_t index);

struct CellResult {
  double edge_prob = 0.0;
  std::size_t k = 0;
  std::size_t n_total = 0;
  std::size_t n_lsc = 0;
  std::size_t n_lsc_can = 0;
  std::size_t n_G_not_can = 0;
  std::size_t n_can_not_G = 0;
  std::size_t n_timeout = 0;
  double seconds = 0.0;
};

struct ExperimentResult {
  // Sorted by (edge_prob, k).
  std::vector<CellResult> cells;
  // Certificates that failed to re-verify; expected to stay zero.
  std::size_t certificate_failures = 0;
  std::size_t lp_at_target = 0;
  std::size_t lp_at_target_without_integral = 0;
};

// Graph-level OpenMP parallelism.
ExperimentResult run_experiment(const ExperimentConfig& cfg);
// Single-threaded reference with identical counts.
ExperimentResult run_experiment_serial(const ExperimentConfig& cfg);

// edge_prob,k,n_total,n_lsc,n_lsc_can,n_G_not_can,n_can_not_G,n_timeout,seconds
std::string to_csv(const ExperimentResult& result);

}  // namespace lscid
