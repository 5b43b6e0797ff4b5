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

// lscid: command-line front end. Exit status 0 on success or "yes", 1 on
// "no" or a failed verification, 2 on usage errors and malformed input.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lscid/experiments.hpp"
#include "lscid/graph.hpp"
#include "lscid/lsc.hpp"
#include "lscid/oracles.hpp"
#include "lscid/sem.hpp"

namespace {

constexpr int kYes = 0;
constexpr int kNo = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << text;
}

int cmd_check(const std::string& graph_path, std::optional<std::size_t> k, std::string out_path) {
  const lscid::LatentDigraph g = lscid::load_graph(graph_path);
  lscid::DecideOptions opts;
  opts.k_bound = k;
  const lscid::DecideResult r = lscid::decide(g, opts);
  if (!r.identifiable) {
    std::cout << "no\n";
    for (lscid::NodeId v : r.unsolved)
      std::cout << "unsolved " << g.name(v) << " after " << r.combinations_tried[v] << " combinations\n";
    if (r.budget_exhausted) std::cout << "search budget exhausted\n";
    return kNo;
  }
  if (out_path.empty()) out_path = std::filesystem::path(graph_path).stem().string() + ".cert.json";
  write_file(out_path, lscid::certificate_to_json(g, r.certificate));
  std::cout << "yes\n" << "certificate: " << out_path << "\n";
  return kYes;
}

int cmd_verify(const std::string& graph_path, const std::string& cert_path) {
  const lscid::LatentDigraph g = lscid::load_graph(graph_path);
  const lscid::LscCertificate cert = lscid::certificate_from_json(g, read_file(cert_path));
  std::string reason;
  if (!lscid::verify_certificate(g, cert, &reason)) {
    std::cout << "invalid: " << reason << "\n";
    return kNo;
  }
  if (!cert.covers_all_observed(g)) {
    std::cout << "valid but partial: " << cert.certified().size() << " of " << g.num_observed()
              << " observed nodes\n";
    return kNo;
  }
  std::cout << "valid\n";
  return kYes;
}

int cmd_recover(const std::string& graph_path, const std::string& cert_path, std::uint64_t seed) {
  const lscid::LatentDigraph g = lscid::load_graph(graph_path);
  const lscid::LscCertificate cert = lscid::certificate_from_json(g, read_file(cert_path));
  std::string reason;
  if (!lscid::verify_certificate(g, cert, &reason)) {
    std::cerr << "certificate does not verify: " << reason << "\n";
    return kNo;
  }
  const lscid::ParameterPoint p = lscid::sample_parameters(g, seed);
  lscid::RecoveryReport report = lscid::recover_effects(g, cert, lscid::sigma_matrix(g, p));
  lscid::compare_with_truth(report, lscid::semi_direct_matrix(g, p), lscid::omega_matrix(g, p));
  std::cout << lscid::report_to_json(g, report).dump(2) << "\n";
  if (report.max_error_lambda) std::cout << "max error lambda: " << *report.max_error_lambda << "\n";
  if (report.max_error_omega) std::cout << "max error omega: " << *report.max_error_omega << "\n";
  return report.complete ? kYes : kNo;
}

int cmd_canon(const std::string& graph_path) {
  std::cout << lscid::serialize_graph(lscid::canonicalize(lscid::load_graph(graph_path)));
  return kYes;
}

int cmd_treks(const std::string& graph_path, const std::string& v, const std::string& w) {
  const lscid::LatentDigraph g = lscid::load_graph(graph_path);
  if (!lscid::is_acyclic(g)) throw UsageError("trek listing needs an acyclic graph");
  for (const lscid::Trek& t : lscid::enumerate_treks(g, g.id(v), g.id(w), g.num_nodes()))
    std::cout << lscid::format_trek(g, t) << "\n";
  return kYes;
}

int cmd_experiment(const std::string& config_path, const std::string& out_path,
                   std::optional<std::uint64_t> seed, const std::vector<std::size_t>& k) {
  lscid::ExperimentConfig cfg;
  try {
    cfg = lscid::parse_experiment_config(read_file(config_path));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (seed) cfg.seed = *seed;
  if (!k.empty()) cfg.k_bounds = k;
  const lscid::ExperimentResult r = lscid::run_experiment(cfg);
  const std::string csv = lscid::to_csv(r);
  if (out_path.empty()) {
    std::cout << csv;
  } else {
    write_file(out_path, csv);
  }
  std::cerr << "certificate re-verification failures: " << r.certificate_failures << "\n"
            << "LP optimum at target: " << r.lp_at_target
            << ", of which without integral optimum: " << r.lp_at_target_without_integral << "\n";
  return r.certificate_failures == 0 ? kYes : kNo;
}

int cmd_oracle(const std::string& graph_path, std::uint64_t seed) {
  const lscid::LatentDigraph g = lscid::load_graph(graph_path);
  bool ok = true;
  for (const lscid::oracle::OracleCheck& c : lscid::oracle::run_oracle_checks(g, seed)) {
    if (c.skipped) {
      std::cout << "SKIP " << c.name << " (" << c.detail << ")\n";
    } else if (c.passed) {
      std::cout << "PASS " << c.name << "\n";
    } else {
      std::cout << "FAIL " << c.name << ": " << c.detail << "\n";
      ok = false;
    }
  }
  return ok ? kYes : kNo;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent-subgraph criterion toolkit for linear structural equation models"};
  app.require_subcommand(1);

  std::string graph, cert, out, config, v, w;
  std::optional<std::size_t> k;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> exp_seed;
  std::vector<std::size_t> exp_k;

  auto* check = app.add_subcommand("check", "decide identifiability and write a certificate");
  check->add_option("graph", graph, "graph JSON")->required();
  check->add_option("--k", k, "bound on |H1| + |H2|");
  check->add_option("--out", out, "certificate path (default <graph stem>.cert.json)");

  auto* verify = app.add_subcommand("verify", "re-check a certificate");
  verify->add_option("graph", graph, "graph JSON")->required();
  verify->add_option("cert", cert, "certificate JSON")->required();

  auto* recover = app.add_subcommand("recover", "recover effects from a sampled covariance");
  recover->add_option("graph", graph, "graph JSON")->required();
  recover->add_option("cert", cert, "certificate JSON")->required();
  recover->add_option("--seed", seed, "parameter seed");

  auto* canon = app.add_subcommand("canon", "print the canonical graph");
  canon->add_option("graph", graph, "graph JSON")->required();

  auto* treks = app.add_subcommand("treks", "list treks between two nodes");
  treks->add_option("graph", graph, "graph JSON")->required();
  treks->add_option("v", v, "source node")->required();
  treks->add_option("w", w, "sink node")->required();

  auto* experiment = app.add_subcommand("experiment", "run the random-graph experiment");
  experiment->add_option("config", config, "config JSON")->required();
  experiment->add_option("--out", out, "CSV path (default stdout)");
  experiment->add_option("--seed", exp_seed, "override the config seed");
  experiment->add_option("--k", exp_k, "override the k bounds");

  auto* oracle = app.add_subcommand("oracle", "cross-check a graph against exhaustive oracles");
  oracle->add_option("graph", graph, "graph JSON")->required();
  oracle->add_option("--seed", seed, "sampling seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*check) return cmd_check(graph, k, out);
    if (*verify) return cmd_verify(graph, cert);
    if (*recover) return cmd_recover(graph, cert, seed);
    if (*canon) return cmd_canon(graph);
    if (*treks) return cmd_treks(graph, v, w);
    if (*experiment) return cmd_experiment(config, out, exp_seed, exp_k);
    if (*oracle) return cmd_oracle(graph, seed);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const lscid::GraphError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const lscid::SingularModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNo;
  }
  return kUsage;
}
