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

#include "lscid/sem.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace lscid {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kSingularDet = 1e-14;

struct Blocks {
  MatrixXd oo, ol, lo, ll;
};

Blocks split(const LatentDigraph& g, const MatrixXd& lam) {
  const Eigen::Index no = static_cast<Eigen::Index>(g.num_observed());
  const Eigen::Index nl = static_cast<Eigen::Index>(g.num_latent());
  return {lam.topLeftCorner(no, no), lam.topRightCorner(no, nl), lam.bottomLeftCorner(nl, no),
          lam.bottomRightCorner(nl, nl)};
}

// (I - Lambda_LL)^{-1} Lambda_LO: total latent-path effects of latent nodes on
// observed nodes.
MatrixXd latent_to_observed(const LatentDigraph& g, const Blocks& b) {
  const Eigen::Index nl = static_cast<Eigen::Index>(g.num_latent());
  if (nl == 0) return MatrixXd::Zero(0, static_cast<Eigen::Index>(g.num_observed()));
  MatrixXd m = MatrixXd::Identity(nl, nl) - b.ll;
  Eigen::FullPivLU<MatrixXd> lu(m);
  const double det = lu.determinant();
  if (std::abs(det) < kSingularDet) throw SingularModelError("I - Lambda_LL is singular", det);
  return lu.solve(b.lo);
}

MatrixXd inverse_checked(const MatrixXd& m, const char* what) {
  Eigen::FullPivLU<MatrixXd> lu(m);
  const double det = lu.determinant();
  if (std::abs(det) < kSingularDet) throw SingularModelError(std::string(what) + " is singular", det);
  return lu.inverse();
}

MatrixXd symmetrize(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

std::vector<Eigen::Index> as_index(const NodeSet& s) {
  return std::vector<Eigen::Index>(s.begin(), s.end());
}

}  // namespace

ParameterPoint sample_parameters(const LatentDigraph& g, std::uint64_t seed, const SamplingConfig& config) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(config.coef_min, config.coef_max);
  std::uniform_real_distribution<double> var(config.var_min, config.var_max);
  std::bernoulli_distribution negative(0.5);
  double worst = 0.0;
  for (int attempt = 0; attempt < config.max_tries; ++attempt) {
    ParameterPoint p;
    p.seed = seed;
    p.retries = attempt;
    for (std::size_t e = 0; e < g.edges().size(); ++e) {
      const double mag = coef(rng);
      p.lambda.push_back(negative(rng) ? -mag : mag);
    }
    for (std::size_t v = 0; v < g.num_nodes(); ++v) p.phi.push_back(var(rng));
    const auto [d_ll, d_bar] = regularity_determinants(g, p);
    if (std::abs(d_ll) > config.det_tolerance && std::abs(d_bar) > config.det_tolerance) return p;
    worst = std::abs(d_ll) <= config.det_tolerance ? d_ll : d_bar;
  }
  throw SingularModelError("no regular parameter point after " + std::to_string(config.max_tries) +
                               " draws (last failing determinant " + std::to_string(worst) + ")",
                           worst);
}

std::pair<double, double> regularity_determinants(const LatentDigraph& g, const ParameterPoint& p) {
  const Blocks b = split(g, lambda_matrix(g, p));
  const Eigen::Index nl = static_cast<Eigen::Index>(g.num_latent());
  const Eigen::Index no = static_cast<Eigen::Index>(g.num_observed());
  double d_ll = 1.0;
  MatrixXd bar = b.oo;
  if (nl > 0) {
    Eigen::FullPivLU<MatrixXd> lu(MatrixXd::Identity(nl, nl) - b.ll);
    d_ll = lu.determinant();
    if (std::abs(d_ll) < kSingularDet) return {d_ll, 0.0};
    bar += b.ol * lu.solve(b.lo);
  }
  const double d_bar = no > 0 ? (MatrixXd::Identity(no, no) - bar).determinant() : 1.0;
  return {d_ll, d_bar};
}

MatrixXd lambda_matrix(const LatentDigraph& g, const ParameterPoint& p) {
  if (p.lambda.size() != g.edges().size() || p.phi.size() != g.num_nodes())
    throw std::invalid_argument("parameter point does not match the graph");
  const Eigen::Index n = static_cast<Eigen::Index>(g.num_nodes());
  MatrixXd lam = MatrixXd::Zero(n, n);
  for (std::size_t e = 0; e < g.edges().size(); ++e)
    lam(static_cast<Eigen::Index>(g.edges()[e].tail), static_cast<Eigen::Index>(g.edges()[e].head)) =
        p.lambda[e];
  return lam;
}

MatrixXd semi_direct_matrix(const LatentDigraph& g, const ParameterPoint& p) {
  const Blocks b = split(g, lambda_matrix(g, p));
  if (g.num_latent() == 0) return b.oo;
  return b.oo + b.ol * latent_to_observed(g, b);
}

MatrixXd omega_matrix(const LatentDigraph& g, const ParameterPoint& p) {
  const Blocks b = split(g, lambda_matrix(g, p));
  const Eigen::Index no = static_cast<Eigen::Index>(g.num_observed());
  VectorXd phi = Eigen::Map<const VectorXd>(p.phi.data(), static_cast<Eigen::Index>(p.phi.size()));
  MatrixXd omega = phi.head(no).asDiagonal();
  if (g.num_latent() > 0) {
    const MatrixXd k = latent_to_observed(g, b);
    omega += k.transpose() * phi.tail(static_cast<Eigen::Index>(g.num_latent())).asDiagonal() * k;
  }
  return symmetrize(omega);
}

MatrixXd sigma_matrix(const LatentDigraph& g, const ParameterPoint& p) {
  const Eigen::Index no = static_cast<Eigen::Index>(g.num_observed());
  const MatrixXd w = inverse_checked(MatrixXd::Identity(no, no) - semi_direct_matrix(g, p), "I - semi-direct matrix");
  return symmetrize(w.transpose() * omega_matrix(g, p) * w);
}

MatrixXd sigma_matrix_full(const LatentDigraph& g, const ParameterPoint& p) {
  const Eigen::Index n = static_cast<Eigen::Index>(g.num_nodes());
  const Eigen::Index no = static_cast<Eigen::Index>(g.num_observed());
  const MatrixXd w = inverse_checked(MatrixXd::Identity(n, n) - lambda_matrix(g, p), "I - Lambda");
  VectorXd phi = Eigen::Map<const VectorXd>(p.phi.data(), n);
  const MatrixXd full = w.transpose() * phi.asDiagonal() * w;
  return symmetrize(full.topLeftCorner(no, no));
}

double trek_monomial(const LatentDigraph& g, const ParameterPoint& p, const Trek& t) {
  const MatrixXd lam = lambda_matrix(g, p);
  double value = p.phi.at(t.top());
  for (const auto* part : {&t.left, &t.right})
    for (std::size_t i = 0; i + 1 < part->size(); ++i)
      value *= lam(static_cast<Eigen::Index>((*part)[i]), static_cast<Eigen::Index>((*part)[i + 1]));
  return value;
}

MatrixXd trek_rule_sigma(const LatentDigraph& g, const ParameterPoint& p) {
  const Eigen::Index no = static_cast<Eigen::Index>(g.num_observed());
  MatrixXd s = MatrixXd::Zero(no, no);
  for (NodeId v = 0; v < g.num_observed(); ++v) {
    for (NodeId w = v; w < g.num_observed(); ++w) {
      double sum = 0.0;
      for (const Trek& t : enumerate_treks(g, v, w)) sum += trek_monomial(g, p, t);
      s(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(w)) = sum;
      s(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(v)) = sum;
    }
  }
  return s;
}

StepSystem assemble_step(const LscContext& ctx, const LscTuple& t, const MatrixXd& sigma,
                         const MatrixXd& lambda_bar) {
  const NodeSet& pa = ctx.parents(t.v);
  StepSystem sys;
  sys.rows_extended = ctx.extended_part(t);
  sys.rows_plain = set_difference(make_set(t.Y), sys.rows_extended);
  const Eigen::Index no = sigma.rows();
  const MatrixXd m = MatrixXd::Identity(no, no) - lambda_bar;
  const MatrixXd left = m.transpose() * sigma;  // rows of (I - L)^T Sigma
  const MatrixXd both = left * m;               // (I - L)^T Sigma (I - L)
  const MatrixXd right = sigma * m;             // Sigma (I - L)
  const NodeSet z = make_set(t.Z);
  const NodeSet y = make_set(t.Y);
  const Eigen::Index rows = static_cast<Eigen::Index>(y.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(pa.size() + z.size());
  sys.matrix = MatrixXd::Zero(rows, cols);
  sys.rhs = VectorXd::Zero(rows);
  const auto v = static_cast<Eigen::Index>(t.v);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto yi = static_cast<Eigen::Index>(y[static_cast<std::size_t>(r)]);
    const bool extended = set_contains(sys.rows_extended, y[static_cast<std::size_t>(r)]);
    const MatrixXd& a_src = extended ? left : sigma;
    const MatrixXd& b_src = extended ? both : right;
    for (std::size_t j = 0; j < pa.size(); ++j)
      sys.matrix(r, static_cast<Eigen::Index>(j)) = a_src(yi, static_cast<Eigen::Index>(pa[j]));
    for (std::size_t j = 0; j < z.size(); ++j)
      sys.matrix(r, static_cast<Eigen::Index>(pa.size() + j)) = b_src(yi, static_cast<Eigen::Index>(z[j]));
    sys.rhs(r) = a_src(yi, v);
  }
  return sys;
}

RecoveryReport recover_effects(const LatentDigraph& g, const LscCertificate& cert, const MatrixXd& sigma) {
  const Eigen::Index no = static_cast<Eigen::Index>(g.num_observed());
  if (sigma.rows() != no || sigma.cols() != no)
    throw std::invalid_argument("sigma must be |O| x |O|");
  std::string reason;
  if (!verify_certificate(g, cert, &reason)) throw std::invalid_argument("certificate does not verify: " + reason);
  LscContext ctx(g);
  RecoveryReport rep;
  rep.lambda_bar_hat = MatrixXd::Zero(no, no);
  std::vector<char> ok(g.num_observed(), 0);
  for (NodeId v = 0; v < g.num_observed(); ++v)
    if (ctx.parents(v).empty()) ok[v] = 1;

  for (const CertificateStep& step : cert.steps) {
    const LscTuple& t = step.tuple;
    StepDiagnostics d;
    d.v = t.v;
    const NodeSet& pa = ctx.parents(t.v);
    d.unknowns = pa.size() + t.Z.size();
    if (pa.empty()) {
      rep.steps.push_back(d);
      continue;
    }
    const NodeSet needed = set_union(make_set(t.Z), ctx.extended_part(t));
    bool blocked = false;
    for (NodeId w : needed) blocked = blocked || !ok[w];
    if (blocked) {
      d.ok = false;
      d.note = "depends on a step that failed";
      rep.steps.push_back(d);
      continue;
    }
    const StepSystem sys = assemble_step(ctx, t, sigma, rep.lambda_bar_hat);
    d.condition = condition_number(sys.matrix);
    if (!std::isfinite(d.condition) || d.condition > kConditionAbort) {
      d.ok = false;
      d.note = "numerically singular system (non-generic draw)";
      rep.steps.push_back(d);
      continue;
    }
    const VectorXd x = sys.matrix.colPivHouseholderQr().solve(sys.rhs);
    d.residual = (sys.matrix * x - sys.rhs).norm();
    for (std::size_t j = 0; j < pa.size(); ++j)
      rep.lambda_bar_hat(static_cast<Eigen::Index>(pa[j]), static_cast<Eigen::Index>(t.v)) =
          x(static_cast<Eigen::Index>(j));
    ok[t.v] = 1;
    rep.steps.push_back(d);
  }
  rep.complete = std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; });
  const MatrixXd m = MatrixXd::Identity(no, no) - rep.lambda_bar_hat;
  rep.omega_hat = symmetrize(m.transpose() * sigma * m);
  return rep;
}

void compare_with_truth(RecoveryReport& report, const MatrixXd& lambda_bar, const MatrixXd& omega) {
  report.max_error_lambda = (report.lambda_bar_hat - lambda_bar).cwiseAbs().maxCoeff();
  report.max_error_omega = (report.omega_hat - omega).cwiseAbs().maxCoeff();
}

double latent_effect_ratio(const MatrixXd& omega, NodeId v2, NodeId v3, NodeId v5, NodeId v6) {
  auto w = [&](NodeId a, NodeId b) { return omega(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)); };
  const double num = w(v2, v6) * w(v3, v5);
  const double den = w(v2, v3) * w(v5, v6) - num;
  if (std::abs(den) < 1e-12) throw SingularModelError("vanishing denominator in latent-effect ratio", den);
  return num / den;
}

double verify_c2_formula(const LatentDigraph& g, const ParameterPoint& p) {
  for (NodeId h : g.latent_nodes())
    if (p.phi.at(h) != 1.0) throw std::invalid_argument("latent variances must be fixed to 1");
  const NodeId v2 = g.id("v2"), v3 = g.id("v3"), v5 = g.id("v5"), v6 = g.id("v6");
  DecideOptions opts;
  opts.k_bound = 1;
  const DecideResult dr = decide(g, opts);
  if (!dr.certificate.covers_all_observed(g)) throw std::runtime_error("graph is not certified with k = 1");
  const RecoveryReport rep = recover_effects(g, dr.certificate, sigma_matrix(g, p));
  for (const auto& s : rep.steps)
    if (!s.ok && (s.v == v2 || s.v == v3 || s.v == v5 || s.v == v6))
      throw SingularModelError("recovery failed for " + g.name(s.v), 0.0);
  return latent_effect_ratio(rep.omega_hat, v2, v3, v5, v6);
}

MatrixXd subgraph_trek_matrix(const SubgraphTrekMatrixSpec& spec, const ParameterPoint& p) {
  const LatentDigraph& h = spec.host;
  if (spec.d1.size() != h.edges().size() || spec.d2.size() != h.edges().size())
    throw std::invalid_argument("subgraph masks must match the host edge count");
  if (!set_intersection(make_set(spec.A), make_set(spec.B)).empty() ||
      !set_intersection(make_set(spec.C), make_set(spec.D)).empty())
    throw std::invalid_argument("A, B and C, D must be disjoint");
  const Eigen::Index n = static_cast<Eigen::Index>(h.num_nodes());
  const MatrixXd lam = lambda_matrix(h, p);
  MatrixXd lam1 = MatrixXd::Zero(n, n), lam2 = MatrixXd::Zero(n, n);
  for (std::size_t e = 0; e < h.edges().size(); ++e) {
    const auto t = static_cast<Eigen::Index>(h.edges()[e].tail);
    const auto hd = static_cast<Eigen::Index>(h.edges()[e].head);
    if (spec.d1[e]) lam1(t, hd) = lam(t, hd);
    if (spec.d2[e]) lam2(t, hd) = lam(t, hd);
  }
  const MatrixXd id = MatrixXd::Identity(n, n);
  const MatrixXd w = inverse_checked(id - lam, "I - Lambda");
  const MatrixXd w1 = inverse_checked(id - lam1, "I - Lambda_1");
  const MatrixXd w2 = inverse_checked(id - lam2, "I - Lambda_2");
  const Eigen::Index nl = static_cast<Eigen::Index>(spec.A.size() + spec.B.size());
  const Eigen::Index nr = static_cast<Eigen::Index>(spec.C.size() + spec.D.size());
  MatrixXd left(n, nl), right(n, nr);
  Eigen::Index c = 0;
  for (NodeId a : spec.A) left.col(c++) = w1.col(static_cast<Eigen::Index>(a));
  for (NodeId b : spec.B) left.col(c++) = w.col(static_cast<Eigen::Index>(b));
  c = 0;
  for (NodeId x : spec.C) right.col(c++) = w.col(static_cast<Eigen::Index>(x));
  for (NodeId x : spec.D) right.col(c++) = w2.col(static_cast<Eigen::Index>(x));
  switch (spec.target) {
    case TrekMatrixTarget::LeftFactor:
      return left(as_index(spec.tops), Eigen::all);
    case TrekMatrixTarget::RightFactor:
      return right(as_index(spec.tops), Eigen::all);
    case TrekMatrixTarget::Full:
      break;
  }
  VectorXd phi = Eigen::Map<const VectorXd>(p.phi.data(), n);
  return left.transpose() * phi.asDiagonal() * right;
}

DetCheckResult subgraph_trek_det_check(const SubgraphTrekMatrixSpec& spec, int trials, std::uint64_t seed) {
  const std::size_t rows =
      spec.target == TrekMatrixTarget::Full ? spec.A.size() + spec.B.size() : spec.tops.size();
  const std::size_t cols = spec.target == TrekMatrixTarget::RightFactor ? spec.C.size() + spec.D.size()
                           : spec.target == TrekMatrixTarget::LeftFactor ? spec.A.size() + spec.B.size()
                                                                         : spec.C.size() + spec.D.size();
  if (rows != cols) throw std::invalid_argument("trek matrix is not square");
  DetCheckResult res;
  for (int i = 0; i < trials; ++i) {
    const ParameterPoint p = sample_parameters(spec.host, seed + static_cast<std::uint64_t>(i));
    MatrixXd m = subgraph_trek_matrix(spec, p);
    ++res.trials;
    double det = 0.0;
    bool zero_line = false;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const double s = m.row(r).cwiseAbs().maxCoeff();
      if (s == 0.0) zero_line = true;
      else m.row(r) /= s;
    }
    for (Eigen::Index k = 0; k < m.cols() && !zero_line; ++k) {
      const double s = m.col(k).cwiseAbs().maxCoeff();
      if (s == 0.0) zero_line = true;
      else m.col(k) /= s;
    }
    if (!zero_line) det = m.rows() == 0 ? 1.0 : m.fullPivLu().determinant();
    res.max_abs_det = std::max(res.max_abs_det, std::abs(det));
  }
  res.verdict = res.max_abs_det > kDetZeroTolerance ? DetVerdict::NonzeroWitnessed : DetVerdict::AllZero;
  return res;
}

int numerical_rank(const MatrixXd& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<MatrixXd> svd(m);
  const VectorXd& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol * s(0)) ++r;
  return r;
}

double condition_number(const MatrixXd& m) {
  if (m.size() == 0) return 1.0;
  Eigen::JacobiSVD<MatrixXd> svd(m);
  const VectorXd& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

ParameterPoint canonical_parameters(const LatentDigraph& g, const LatentDigraph& canonical, const ParameterPoint& p) {
  if (g.names(g.observed_nodes()) != canonical.names(canonical.observed_nodes()) ||
      g.names(g.latent_nodes()) != canonical.names(canonical.latent_nodes()))
    throw std::invalid_argument("canonical graph must have the same node partition");
  const Blocks b = split(g, lambda_matrix(g, p));
  const MatrixXd bar = semi_direct_matrix(g, p);
  const MatrixXd k = latent_to_observed(g, b);
  const auto no = static_cast<Eigen::Index>(g.num_observed());
  ParameterPoint out;
  out.seed = p.seed;
  out.phi = p.phi;
  MatrixXd covered_bar = MatrixXd::Zero(bar.rows(), bar.cols());
  MatrixXd covered_k = MatrixXd::Zero(k.rows(), k.cols());
  for (const Edge& e : canonical.edges()) {
    const auto t = static_cast<Eigen::Index>(e.tail), h = static_cast<Eigen::Index>(e.head);
    double value = 0.0;
    if (canonical.is_observed(e.tail) && canonical.is_observed(e.head)) {
      value = bar(t, h);
      covered_bar(t, h) = 1.0;
    } else if (canonical.is_latent(e.tail) && canonical.is_observed(e.head)) {
      value = k(t - no, h);
      covered_k(t - no, h) = 1.0;
    }
    out.lambda.push_back(value);
  }
  constexpr double kStructuralZero = 1e-14;
  for (Eigen::Index i = 0; i < bar.rows(); ++i)
    for (Eigen::Index j = 0; j < bar.cols(); ++j)
      if (std::abs(bar(i, j)) > kStructuralZero && covered_bar(i, j) == 0.0)
        throw std::invalid_argument("canonical graph misses a semi-direct edge");
  for (Eigen::Index i = 0; i < k.rows(); ++i)
    for (Eigen::Index j = 0; j < k.cols(); ++j)
      if (std::abs(k(i, j)) > kStructuralZero && covered_k(i, j) == 0.0)
        throw std::invalid_argument("canonical graph misses a latent-to-observed edge");
  return out;
}

nlohmann::json matrix_to_json(const MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::ordered_json report_to_json(const LatentDigraph& g, const RecoveryReport& report) {
  nlohmann::ordered_json out;
  out["observed"] = g.names(g.observed_nodes());
  out["complete"] = report.complete;
  out["lambda_bar_hat"] = matrix_to_json(report.lambda_bar_hat);
  out["omega_hat"] = matrix_to_json(report.omega_hat);
  nlohmann::ordered_json steps = nlohmann::ordered_json::array();
  for (const auto& s : report.steps) {
    nlohmann::ordered_json o;
    o["v"] = g.name(s.v);
    o["unknowns"] = s.unknowns;
    o["condition"] = s.condition;
    o["residual"] = s.residual;
    o["ok"] = s.ok;
    if (!s.note.empty()) o["note"] = s.note;
    steps.push_back(std::move(o));
  }
  out["steps"] = std::move(steps);
  if (report.max_error_lambda) out["max_error_lambda"] = *report.max_error_lambda;
  if (report.max_error_omega) out["max_error_omega"] = *report.max_error_omega;
  return out;
}

}  // namespace lscid
