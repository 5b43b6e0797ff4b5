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


// Serial reference against the OpenMP experiment driver, plus the kernels
// that dominate a single decision.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <string>

#include "lscid/experiments.hpp"
#include "lscid/graph.hpp"
#include "lscid/lsc.hpp"
#include "lscid/sem.hpp"

namespace {

lscid::ExperimentConfig bench_config() {
  lscid::ExperimentConfig cfg;
  cfg.graphs_per_prob = 20;
  cfg.parallelism = 0;
  return cfg;
}

lscid::LatentDigraph fixture(const std::string& name) {
  return lscid::load_graph(std::string(LSCID_FIXTURES_DIR) + "/" + name + ".json");
}

void BM_ExperimentSerial(benchmark::State& state) {
  const lscid::ExperimentConfig cfg = bench_config();
  for (auto _ : state) benchmark::DoNotOptimize(lscid::run_experiment_serial(cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(cfg.graphs_per_prob * cfg.edge_probs.size()));
}

void BM_ExperimentParallel(benchmark::State& state) {
  const lscid::ExperimentConfig cfg = bench_config();
  for (auto _ : state) benchmark::DoNotOptimize(lscid::run_experiment(cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(cfg.graphs_per_prob * cfg.edge_probs.size()));
  state.counters["threads"] = omp_get_max_threads();
}

void BM_Decide(benchmark::State& state, const std::string& name) {
  const lscid::LatentDigraph g = fixture(name);
  for (auto _ : state) benchmark::DoNotOptimize(lscid::decide(g));
}

void BM_SigmaSolve(benchmark::State& state) {
  const lscid::LatentDigraph g = fixture("latent_chain");
  const lscid::ParameterPoint p = lscid::sample_parameters(g, 1);
  for (auto _ : state) benchmark::DoNotOptimize(lscid::sigma_matrix(g, p));
}

void BM_SigmaTrekRule(benchmark::State& state) {
  const lscid::LatentDigraph g = fixture("latent_chain");
  const lscid::ParameterPoint p = lscid::sample_parameters(g, 1);
  for (auto _ : state) benchmark::DoNotOptimize(lscid::trek_rule_sigma(g, p));
}

}  // namespace

BENCHMARK(BM_ExperimentSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExperimentParallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Decide, latent_chain, std::string("latent_chain"))->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_Decide, shared_latent, std::string("shared_latent"))->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_Decide, latent_tree, std::string("latent_tree"))->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_Decide, canon_mixed_parent_right, std::string("canon_mixed_parent_right"))->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SigmaSolve);
BENCHMARK(BM_SigmaTrekRule);

BENCHMARK_MAIN();
