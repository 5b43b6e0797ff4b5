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

// Linear structural equation models X = Lambda^T X + eps on a LatentDigraph,
// with Var(eps) = diag(phi).

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "lscid/graph.hpp"
#include "lscid/lsc.hpp"

namespace lscid {

class SingularModelError : public std::runtime_error {
 public:
  SingularModelError(const std::string& what, double det) : std::runtime_error(what), det_(det) {}
  double determinant() const { return det_; }

 private:
  double det_;
};

struct SamplingConfig {
  double coef_min = 0.5;
  double coef_max = 1.5;
  double var_min = 0.5;
  double var_max = 1.5;
  int max_tries = 100;
  double det_tolerance = 1e-6;
};

struct ParameterPoint {
  // Aligned with g.edges().
  std::vector<double> lambda;
  // Indexed by node.
  std::vector<double> phi;
  std::uint64_t seed = 0;
  int retries = 0;
};

// Edge weights +-U[coef_min, coef_max], variances U[var_min, var_max];
// redraws until det(I - Lambda_LL) and det(I - semi-direct matrix) are both
// away from zero.
ParameterPoint sample_parameters(const LatentDigraph& g, std::uint64_t seed,
                                 const SamplingConfig& config = {});

// det(I - Lambda_LL) and det(I - semi-direct matrix).
std::pair<double, double> regularity_determinants(const LatentDigraph& g, const ParameterPoint& p);

// Full |V| x |V| coefficient matrix.
Eigen::MatrixXd lambda_matrix(const LatentDigraph& g, const ParameterPoint& p);

// |O| x |O| matrices in observed order.
Eigen::MatrixXd semi_direct_matrix(const LatentDigraph& g, const ParameterPoint& p);
Eigen::MatrixXd omega_matrix(const LatentDigraph& g, const ParameterPoint& p);
// Through the semi-direct factorization.
Eigen::MatrixXd sigma_matrix(const LatentDigraph& g, const ParameterPoint& p);
// Through the full model, restricted to the observed block.
Eigen::MatrixXd sigma_matrix_full(const LatentDigraph& g, const ParameterPoint& p);

double trek_monomial(const LatentDigraph& g, const ParameterPoint& p, const Trek& t);
// Sum of trek monomials; acyclic graphs with at most kDefaultTrekNodeBound nodes.
Eigen::MatrixXd trek_rule_sigma(const LatentDigraph& g, const ParameterPoint& p);

struct StepDiagnostics {
  NodeId v = 0;
  std::size_t unknowns = 0;
  double condition = 0.0;
  double residual = 0.0;
  bool ok = true;
  std::string note;
};

struct RecoveryReport {
  Eigen::MatrixXd lambda_bar_hat;
  Eigen::MatrixXd omega_hat;
  std::vector<StepDiagnostics> steps;
  bool complete = false;
  std::optional<double> max_error_lambda;
  std::optional<double> max_error_omega;
};

inline constexpr double kConditionAbort = 1e12;

struct StepSystem {
  Eigen::MatrixXd matrix;  // (A B)
  Eigen::VectorXd rhs;     // c
  NodeSet rows_extended;   // Y1
  NodeSet rows_plain;      // Y2
};

// Assembles the linear system of one certificate step from sigma and the
// semi-direct columns recovered so far.
StepSystem assemble_step(const LscContext& ctx, const LscTuple& t, const Eigen::MatrixXd& sigma,
                         const Eigen::MatrixXd& lambda_bar);

// Walks the certificate in order. Throws std::invalid_argument when the
// certificate does not verify.
RecoveryReport recover_effects(const LatentDigraph& g, const LscCertificate& cert,
                               const Eigen::MatrixXd& sigma);

// Fills max_error_* against a generating point.
void compare_with_truth(RecoveryReport& report, const Eigen::MatrixXd& lambda_bar,
                        const Eigen::MatrixXd& omega);

// w26 w35 / (w23 w56 - w26 w35) for the four given observed nodes.
double latent_effect_ratio(const Eigen::MatrixXd& omega, NodeId v2, NodeId v3, NodeId v5, NodeId v6);

// On the relabelled air-pollution graph with unit latent variances: certifies,
// recovers Omega from Sigma and returns the ratio above, which should equal
// the squared h1 -> h3 coefficient. Throws SingularModelError when the
// denominator vanishes.
double verify_c2_formula(const LatentDigraph& g, const ParameterPoint& p);

enum class TrekMatrixTarget { Full, LeftFactor, RightFactor };

struct SubgraphTrekMatrixSpec {
  LatentDigraph host;
  EdgeMask d1;  // rows in A use only these edges
  EdgeMask d2;  // columns in D use only these edges
  NodeSet A, B, C, D;
  TrekMatrixTarget target = TrekMatrixTarget::Full;
  // Row set for the factor targets.
  NodeSet tops;
};

// Entry (a, c) sums trek monomials from a to c with the left part inside D1
// for a in A and the right part inside D2 for c in D.
Eigen::MatrixXd subgraph_trek_matrix(const SubgraphTrekMatrixSpec& spec, const ParameterPoint& p);

enum class DetVerdict { NonzeroWitnessed, AllZero };

struct DetCheckResult {
  DetVerdict verdict = DetVerdict::AllZero;
  double max_abs_det = 0.0;
  int trials = 0;
};

inline constexpr double kDetZeroTolerance = 1e-9;

DetCheckResult subgraph_trek_det_check(const SubgraphTrekMatrixSpec& spec, int trials,
                                       std::uint64_t seed = 1);

// Rank after discarding singular values below tol * largest.
int numerical_rank(const Eigen::MatrixXd& m, double tol = 1e-9);
double condition_number(const Eigen::MatrixXd& m);

// Parameters on the canonical graph producing the same observed covariance.
ParameterPoint canonical_parameters(const LatentDigraph& g, const LatentDigraph& canonical,
                                    const ParameterPoint& p);

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
nlohmann::ordered_json report_to_json(const LatentDigraph& g, const RecoveryReport& report);

}  // namespace lscid
