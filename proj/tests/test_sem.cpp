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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "lscid/lsc.hpp"
#include "lscid/sem.hpp"
#include "support.hpp"

using namespace lscid;
using Eigen::MatrixXd;
using lscid::testing::fixture;
using lscid::testing::nodes;
using lscid::testing::random_digraph;

namespace {

// Coefficient of the named edge; zero when the edge is absent.
double coef(const LatentDigraph& g, const ParameterPoint& p, const std::string& a, const std::string& b) {
  for (std::size_t e = 0; e < g.edges().size(); ++e)
    if (g.edges()[e].tail == g.id(a) && g.edges()[e].head == g.id(b)) return p.lambda[e];
  return 0.0;
}

double var(const LatentDigraph& g, const ParameterPoint& p, const std::string& v) { return p.phi[g.id(v)]; }

double at(const LatentDigraph& g, const MatrixXd& m, const std::string& a, const std::string& b) {
  return m(static_cast<Eigen::Index>(g.id(a)), static_cast<Eigen::Index>(g.id(b)));
}

double max_abs(const MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// The same point read on a subgraph with the same nodes.
ParameterPoint restrict_point(const LatentDigraph& g, const LatentDigraph& sub, const ParameterPoint& p) {
  ParameterPoint out;
  out.phi = p.phi;
  for (const Edge& e : sub.edges()) {
    double value = 0.0;
    for (std::size_t i = 0; i < g.edges().size(); ++i)
      if (g.edges()[i] == e) value = p.lambda[i];
    out.lambda.push_back(value);
  }
  return out;
}

const char* const kCertified[] = {"air_pollution", "latent_chain", "shared_latent", "latent_tree", "canon_mixed_parent_left", "canon_latent_path_left"};

}  // namespace

TEST_CASE("sampled points respect the configured ranges") {
  const LatentDigraph g = fixture("latent_chain");
  const ParameterPoint p = sample_parameters(g, 1);
  CHECK(p.lambda.size() == 7);
  CHECK(p.phi.size() == 7);
  for (double l : p.lambda) {
    CHECK(std::abs(l) >= 0.5);
    CHECK(std::abs(l) <= 1.5);
  }
  for (double v : p.phi) {
    CHECK(v >= 0.5);
    CHECK(v <= 1.5);
  }
  CHECK(p.retries == 0);
  const auto [d_ll, d_bar] = regularity_determinants(g, p);
  CHECK(d_ll == doctest::Approx(1.0));
  CHECK(d_bar == doctest::Approx(1.0));

  const ParameterPoint q = sample_parameters(g, 1);
  CHECK(q.lambda == p.lambda);
  CHECK(q.phi == p.phi);
  CHECK(sample_parameters(g, 2).lambda != p.lambda);
}

TEST_CASE("unreachable regularity is reported") {
  const LatentDigraph g = fixture("latent_chain");
  SamplingConfig cfg;
  cfg.det_tolerance = 10.0;
  cfg.max_tries = 5;
  CHECK_THROWS_AS(sample_parameters(g, 1, cfg), SingularModelError);

  // A two-cycle whose loop product is exactly one.
  const LatentDigraph c({"a", "b"}, {}, std::vector<std::pair<std::string, std::string>>{{"a", "b"}, {"b", "a"}});
  ParameterPoint p{{1.0, 1.0}, {1.0, 1.0}, 0, 0};
  CHECK_THROWS_AS(sigma_matrix(c, p), SingularModelError);
  CHECK_THROWS_AS(sigma_matrix_full(c, p), SingularModelError);

  const LatentDigraph l({"a"}, {"x", "y"},
                        std::vector<std::pair<std::string, std::string>>{{"x", "y"}, {"y", "x"}, {"x", "a"}});
  ParameterPoint q{{2.0, 0.5, 1.0}, {1.0, 1.0, 1.0}, 0, 0};
  CHECK_THROWS_AS(omega_matrix(l, q), SingularModelError);
  CHECK_THROWS_AS(semi_direct_matrix(l, q), SingularModelError);

  CHECK_THROWS_AS(latent_effect_ratio(MatrixXd::Zero(4, 4), 0, 1, 2, 3), SingularModelError);
}

TEST_CASE("semi-direct matrix on the pollution graph") {
  const LatentDigraph g = fixture("air_pollution");
  const ParameterPoint p = sample_parameters(g, 5);
  const MatrixXd bar = semi_direct_matrix(g, p);
  const double t_ap = coef(g, p, "T", "AP"), ap_i = coef(g, p, "AP", "I");
  CHECK(at(g, bar, "T", "CO") == doctest::Approx(t_ap * coef(g, p, "AP", "CO")));
  CHECK(at(g, bar, "T", "NO2") == doctest::Approx(t_ap * coef(g, p, "AP", "NO2")));
  CHECK(at(g, bar, "T", "sV") == doctest::Approx(t_ap * ap_i * coef(g, p, "I", "sV")));
  CHECK(at(g, bar, "T", "sI") == doctest::Approx(t_ap * ap_i * coef(g, p, "I", "sI")));
  CHECK(at(g, bar, "T", "CRP") == doctest::Approx(t_ap * ap_i * coef(g, p, "I", "CRP")));
  CHECK(at(g, bar, "NO2", "sV") == doctest::Approx(coef(g, p, "NO2", "U") * coef(g, p, "U", "sV")));
  int nonzero = 0;
  for (Eigen::Index i = 0; i < bar.rows(); ++i)
    for (Eigen::Index j = 0; j < bar.cols(); ++j) nonzero += bar(i, j) != 0.0;
  CHECK(nonzero == 6);
}

TEST_CASE("matrices on the two-latent chain match hand-expanded polynomials") {
  const LatentDigraph g = fixture("latent_chain");
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const ParameterPoint p = sample_parameters(g, seed);
    auto l = [&](const char* a, const char* b) { return coef(g, p, a, b); };
    auto f = [&](const char* v) { return var(g, p, v); };
    const MatrixXd bar = semi_direct_matrix(g, p);
    CHECK(at(g, bar, "v1", "v2") == doctest::Approx(l("v1", "h1") * l("h1", "h2") * l("h2", "v2")));

    const MatrixXd omega = omega_matrix(g, p);
    const double shared = l("h2", "v3") * l("h2", "v4");
    CHECK(at(g, omega, "v1", "v3") == 0.0);
    CHECK(at(g, omega, "v3", "v4") ==
          doctest::Approx(f("h1") * l("h1", "h2") * l("h1", "h2") * shared + f("h2") * shared));

    const double a = l("v1", "h1"), b = l("h1", "h2"), c = l("h2", "v3"), d = l("h2", "v4"), e = l("v3", "v4");
    const double expected = f("v3") * e + f("h2") * c * d + f("h1") * b * b * c * d +
                            f("v1") * a * a * b * b * c * d + f("h2") * c * c * e +
                            f("h1") * b * b * c * c * e + f("v1") * a * a * b * b * c * c * e;
    CHECK(at(g, sigma_matrix(g, p), "v3", "v4") == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK(enumerate_treks(g, g.id("v3"), g.id("v4")).size() == 7);
}

TEST_CASE("trek monomial of a single trek") {
  const LatentDigraph g = fixture("latent_chain");
  const ParameterPoint p = sample_parameters(g, 9);
  Trek t;
  for (const char* n : {"v1", "h1", "h2", "v3"}) t.left.push_back(g.id(n));
  for (const char* n : {"v1", "h1", "h2", "v4"}) t.right.push_back(g.id(n));
  const double a = coef(g, p, "v1", "h1"), b = coef(g, p, "h1", "h2");
  CHECK(trek_monomial(g, p, t) ==
        doctest::Approx(var(g, p, "v1") * a * a * b * b * coef(g, p, "h2", "v3") * coef(g, p, "h2", "v4")));
}

TEST_CASE("edge cases of the parametrization") {
  const LatentDigraph one({"a"}, {}, std::vector<std::pair<std::string, std::string>>{});
  const ParameterPoint p = sample_parameters(one, 3);
  CHECK(sigma_matrix(one, p)(0, 0) == doctest::Approx(p.phi[0]));
  CHECK(trek_rule_sigma(one, p)(0, 0) == doctest::Approx(p.phi[0]));

  std::mt19937_64 rng(8);
  const LatentDigraph g = random_digraph(rng, 5, 0, 0.5);
  const ParameterPoint q = sample_parameters(g, 4);
  CHECK(max_abs(semi_direct_matrix(g, q) - lambda_matrix(g, q)) == 0.0);
  MatrixXd phi = MatrixXd::Zero(5, 5);
  for (int i = 0; i < 5; ++i) phi(i, i) = q.phi[static_cast<std::size_t>(i)];
  CHECK(max_abs(omega_matrix(g, q) - phi) < 1e-15);
}

TEST_CASE("three routes to the covariance agree") {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> n_obs(2, 6), n_lat(0, 3);
  for (int rep = 0; rep < 50; ++rep) {
    const LatentDigraph g = random_digraph(rng, n_obs(rng), n_lat(rng), 0.35);
    const ParameterPoint p = sample_parameters(g, static_cast<std::uint64_t>(rep));
    CHECK(p.retries == 0);
    const MatrixXd s = sigma_matrix(g, p);
    const double scale = max_abs(s);
    CHECK(max_abs(s - sigma_matrix_full(g, p)) < 1e-10 * scale);
    if (g.num_nodes() <= 8) CHECK(max_abs(s - trek_rule_sigma(g, p)) < 1e-10 * scale);
    CHECK(max_abs(s - s.transpose()) == 0.0);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(s);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);

    const Eigen::Index no = static_cast<Eigen::Index>(g.num_observed());
    const MatrixXd w = (MatrixXd::Identity(no, no) - semi_direct_matrix(g, p)).inverse();
    CHECK(max_abs(s - w.transpose() * omega_matrix(g, p) * w) < 1e-10 * scale);
  }
}

TEST_CASE("cyclic graphs use the full-model route") {
  std::mt19937_64 rng(43);
  int cyclic = 0;
  for (int rep = 0; rep < 40; ++rep) {
    const LatentDigraph g = random_digraph(rng, 4, 2, 0.25, false);
    if (is_acyclic(g)) continue;
    ++cyclic;
    const ParameterPoint p = sample_parameters(g, static_cast<std::uint64_t>(rep));
    const MatrixXd s = sigma_matrix(g, p);
    CHECK(max_abs(s - sigma_matrix_full(g, p)) < 1e-9 * max_abs(s));
  }
  CHECK(cyclic > 5);
}

TEST_CASE("the latent-part covariance is the covariance of the latent subgraph") {
  std::mt19937_64 rng(47);
  for (int rep = 0; rep < 20; ++rep) {
    const LatentDigraph g = random_digraph(rng, 5, 3, 0.35);
    const ParameterPoint p = sample_parameters(g, static_cast<std::uint64_t>(100 + rep));
    const LatentDigraph lat = latent_subgraph(g);
    const MatrixXd omega = omega_matrix(g, p);
    CHECK(max_abs(omega - sigma_matrix(lat, restrict_point(g, lat, p))) < 1e-10 * max_abs(omega));
  }
}

TEST_CASE("semi-direct matrix is supported on semi-direct parents") {
  std::mt19937_64 rng(53);
  for (int rep = 0; rep < 20; ++rep) {
    const LatentDigraph g = random_digraph(rng, 6, 3, 0.3);
    const ParameterPoint p = sample_parameters(g, static_cast<std::uint64_t>(rep));
    const MatrixXd bar = semi_direct_matrix(g, p);
    for (NodeId w : g.observed_nodes()) {
      const NodeSet pa = semi_direct_parents(g, w);
      for (NodeId u : g.observed_nodes()) {
        const bool support = std::abs(bar(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(w))) > 1e-12;
        CHECK(support == set_contains(pa, u));
      }
    }
  }
}

TEST_CASE("regression coefficient for the first pollution effect") {
  const LatentDigraph g = fixture("air_pollution");
  const DecideResult r = decide(g);
  REQUIRE(r.identifiable);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ParameterPoint p = sample_parameters(g, seed);
    const MatrixXd s = sigma_matrix(g, p);
    const RecoveryReport rep = recover_effects(g, r.certificate, s);
    CHECK(at(g, rep.lambda_bar_hat, "T", "CO") ==
          doctest::Approx(at(g, s, "T", "CO") / at(g, s, "T", "T")).epsilon(1e-10));
  }
}

TEST_CASE("recovery reproduces the generating point on certified graphs") {
  for (const char* name : kCertified) {
    CAPTURE(name);
    const LatentDigraph g = fixture(name);
    const DecideResult r = decide(g);
    REQUIRE(r.identifiable);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const ParameterPoint p = sample_parameters(g, seed);
      RecoveryReport rep = recover_effects(g, r.certificate, sigma_matrix(g, p));
      CHECK(rep.complete);
      compare_with_truth(rep, semi_direct_matrix(g, p), omega_matrix(g, p));
      CHECK(*rep.max_error_lambda < 1e-8);
      CHECK(*rep.max_error_omega < 1e-8);
      for (const StepDiagnostics& d : rep.steps) {
        CHECK(d.ok);
        CHECK(d.residual < 1e-9);
      }
    }
  }
}

TEST_CASE("recovery on random certified graphs") {
  std::mt19937_64 rng(59);
  int certified = 0;
  for (int rep = 0; rep < 80; ++rep) {
    const LatentDigraph g = random_digraph(rng, 6, 3, 0.3);
    const DecideResult r = decide(g);
    if (!r.identifiable) continue;
    ++certified;
    const ParameterPoint p = sample_parameters(g, static_cast<std::uint64_t>(rep));
    RecoveryReport report = recover_effects(g, r.certificate, sigma_matrix(g, p));
    compare_with_truth(report, semi_direct_matrix(g, p), omega_matrix(g, p));
    CHECK(report.complete);
    CHECK(*report.max_error_lambda < 1e-8);
    const MatrixXd& bar = report.lambda_bar_hat;
    for (NodeId w : g.observed_nodes())
      for (NodeId u : g.observed_nodes())
        if (!set_contains(semi_direct_parents(g, w), u))
          CHECK(bar(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(w)) == 0.0);
  }
  CHECK(certified > 20);
}

TEST_CASE("recovery without parents returns the covariance") {
  const LatentDigraph g({"a", "b", "c"}, {"l"},
                        std::vector<std::pair<std::string, std::string>>{{"l", "a"}, {"l", "b"}, {"l", "c"}});
  const DecideResult r = decide(g);
  REQUIRE(r.identifiable);
  const ParameterPoint p = sample_parameters(g, 2);
  const MatrixXd s = sigma_matrix(g, p);
  const RecoveryReport rep = recover_effects(g, r.certificate, s);
  CHECK(max_abs(rep.lambda_bar_hat) == 0.0);
  CHECK(max_abs(rep.omega_hat - s) == 0.0);
}

TEST_CASE("recovery rejects certificates that do not verify") {
  const LatentDigraph g = fixture("latent_chain");
  LscCertificate bad;
  bad.steps.push_back({LscTuple{g.id("v2"), nodes(g, {"v3"}), {}, {}, {}}, {}});
  const MatrixXd s = sigma_matrix(g, sample_parameters(g, 1));
  CHECK_THROWS_AS(recover_effects(g, bad, s), std::invalid_argument);
  CHECK_THROWS_AS(recover_effects(g, decide(g).certificate, MatrixXd::Identity(3, 3)), std::invalid_argument);
}

TEST_CASE("step systems are well conditioned at random points") {
  for (const char* name : kCertified) {
    CAPTURE(name);
    const LatentDigraph g = fixture(name);
    const LscContext ctx(g);
    const DecideResult r = decide(g);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const ParameterPoint p = sample_parameters(g, seed);
      const MatrixXd s = sigma_matrix(g, p);
      const MatrixXd bar = semi_direct_matrix(g, p);
      for (const CertificateStep& step : r.certificate.steps) {
        if (ctx.parents(step.tuple.v).empty()) continue;
        const StepSystem sys = assemble_step(ctx, step.tuple, s, bar);
        CHECK(sys.matrix.rows() == sys.matrix.cols());
        CHECK(condition_number(sys.matrix) < 1e9);
        // The true effects and latent terms solve the system exactly.
        const Eigen::VectorXd x = sys.matrix.colPivHouseholderQr().solve(sys.rhs);
        for (std::size_t j = 0; j < ctx.parents(step.tuple.v).size(); ++j)
          CHECK(x(static_cast<Eigen::Index>(j)) ==
                doctest::Approx(bar(static_cast<Eigen::Index>(ctx.parents(step.tuple.v)[j]),
                                    static_cast<Eigen::Index>(step.tuple.v))));
      }
    }
  }
}

TEST_CASE("latent effect formula on the relabelled pollution graph") {
  const LatentDigraph g = fixture("latent_tree");
  int used = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    ParameterPoint p = sample_parameters(g, seed);
    for (NodeId h : g.latent_nodes()) p.phi[h] = 1.0;
    const double truth = coef(g, p, "h1", "h3");
    const double ratio = verify_c2_formula(g, p);
    CHECK(ratio == doctest::Approx(truth * truth).epsilon(1e-8));
    ++used;
  }
  CHECK(used == 20);

  ParameterPoint p = sample_parameters(g, 1);
  CHECK_THROWS_AS(verify_c2_formula(g, p), std::invalid_argument);
}

TEST_CASE("latent effect formula with a vanishing effect") {
  const LatentDigraph g = fixture("latent_tree");
  ParameterPoint p = sample_parameters(g, 4);
  for (NodeId h : g.latent_nodes()) p.phi[h] = 1.0;
  for (std::size_t e = 0; e < g.edges().size(); ++e)
    if (g.edges()[e].tail == g.id("h1") && g.edges()[e].head == g.id("h3")) p.lambda[e] = 0.0;
  // Every numerator term vanishes; the denominator keeps its h1 and h3 parts.
  CHECK(std::abs(verify_c2_formula(g, p)) < 1e-12);
}

TEST_CASE("canonical parameters keep the observed covariance") {
  std::mt19937_64 rng(61);
  for (const char* name : {"latent_chain", "shared_latent", "latent_tree", "canon_mixed_parent_left", "canon_observed_parents_left"}) {
    const LatentDigraph g = fixture(name);
    const LatentDigraph c = canonicalize(g);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const ParameterPoint p = sample_parameters(g, seed);
      const MatrixXd s = sigma_matrix(g, p);
      CHECK(max_abs(s - sigma_matrix(c, canonical_parameters(g, c, p))) < 1e-10 * max_abs(s));
    }
  }
  for (int rep = 0; rep < 20; ++rep) {
    const LatentDigraph g = random_digraph(rng, 6, 3, 0.3);
    const LatentDigraph c = canonicalize(g);
    const ParameterPoint p = sample_parameters(g, static_cast<std::uint64_t>(rep));
    const MatrixXd s = sigma_matrix(g, p);
    CHECK(max_abs(s - sigma_matrix(c, canonical_parameters(g, c, p))) < 1e-10 * max_abs(s));
  }
  const LatentDigraph g = fixture("latent_chain");
  CHECK_THROWS_AS(canonical_parameters(g, latent_subgraph(g), sample_parameters(g, 1)), std::invalid_argument);
}

TEST_CASE("trek separation bounds the rank of the latent covariance") {
  std::mt19937_64 rng(67);
  int separated = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const LatentDigraph g = random_digraph(rng, 6, 3, 0.35);
    const LatentDigraph lat = latent_subgraph(g);
    const NodeSet obs = g.observed_nodes();
    const NodeSet x = testing::random_subset(rng, obs, 0.5);
    const NodeSet y = testing::random_subset(rng, obs, 0.5);
    const NodeSet h1 = testing::random_subset(rng, g.latent_nodes(), 0.3);
    const NodeSet h2 = testing::random_subset(rng, g.latent_nodes(), 0.3);
    if (x.empty() || y.empty() || !trek_separates(lat, x, y, h1, h2)) continue;
    ++separated;
    const MatrixXd omega = omega_matrix(g, sample_parameters(g, static_cast<std::uint64_t>(rep)));
    const std::vector<Eigen::Index> rx(x.begin(), x.end()), ry(y.begin(), y.end());
    CHECK(numerical_rank(omega(rx, ry)) <= static_cast<int>(h1.size() + h2.size()));
  }
  CHECK(separated > 100);
}

TEST_CASE("numerical rank and condition") {
  MatrixXd m(2, 2);
  m << 1, 2, 2, 4;
  CHECK(numerical_rank(m) == 1);
  CHECK(numerical_rank(MatrixXd::Identity(3, 3)) == 3);
  CHECK(numerical_rank(MatrixXd::Zero(2, 2)) == 0);
  CHECK(condition_number(MatrixXd::Identity(3, 3)) == doctest::Approx(1.0));
  CHECK(condition_number(m) > 1e12);
}

namespace {

LatentDigraph path_host() {
  return LatentDigraph({"1", "2", "3", "4"}, {},
                       std::vector<std::pair<std::string, std::string>>{{"1", "2"}, {"2", "3"}, {"3", "4"}});
}

EdgeMask mask_of(const LatentDigraph& h, const std::vector<std::pair<std::string, std::string>>& keep) {
  EdgeMask m(h.edges().size(), 0);
  for (std::size_t e = 0; e < h.edges().size(); ++e)
    for (const auto& [a, b] : keep)
      if (h.edges()[e].tail == h.id(a) && h.edges()[e].head == h.id(b)) m[e] = 1;
  return m;
}

bool path_in(const LatentDigraph& h, const EdgeMask& mask, const std::vector<NodeId>& path) {
  for (std::size_t i = 1; i < path.size(); ++i) {
    bool found = false;
    for (std::size_t e = 0; e < h.edges().size(); ++e)
      if (mask[e] && h.edges()[e].tail == path[i - 1] && h.edges()[e].head == path[i]) found = true;
    if (!found) return false;
  }
  return true;
}

// Backtracking over explicit treks: rows A then B matched to columns C then D.
bool brute_force_system(const SubgraphTrekMatrixSpec& spec, std::size_t row, std::vector<char>& used,
                        TrekSystem& sys) {
  const std::size_t na = spec.A.size();
  const std::size_t rows = na + spec.B.size();
  if (row == rows) return true;
  const NodeId from = row < na ? spec.A[row] : spec.B[row - na];
  const std::size_t cols = spec.C.size() + spec.D.size();
  for (std::size_t c = 0; c < cols; ++c) {
    if (used[c]) continue;
    const bool in_d = c >= spec.C.size();
    const NodeId to = in_d ? spec.D[c - spec.C.size()] : spec.C[c];
    for (const Trek& t : enumerate_treks(spec.host, from, to)) {
      if (row < na && !path_in(spec.host, spec.d1, t.left)) continue;
      if (in_d && !path_in(spec.host, spec.d2, t.right)) continue;
      sys.treks.push_back(t);
      if (!sys.has_sided_intersection()) {
        used[c] = 1;
        if (brute_force_system(spec, row + 1, used, sys)) return true;
        used[c] = 0;
      }
      sys.treks.pop_back();
    }
  }
  return false;
}

}  // namespace

TEST_CASE("left factor can be invertible without a qualifying path system") {
  SubgraphTrekMatrixSpec spec;
  spec.host = path_host();
  const LatentDigraph& h = spec.host;
  spec.d1 = mask_of(h, {{"2", "3"}});
  spec.d2 = mask_of(h, {{"1", "2"}, {"2", "3"}, {"3", "4"}});
  spec.A = {h.id("3")};
  spec.B = {h.id("4")};
  spec.C = {h.id("3"), h.id("4")};
  spec.tops = {h.id("1"), h.id("2")};
  spec.target = TrekMatrixTarget::LeftFactor;

  const ParameterPoint p = sample_parameters(h, 3);
  const MatrixXd l = subgraph_trek_matrix(spec, p);
  const double l12 = p.lambda[0], l23 = p.lambda[1], l34 = p.lambda[2];
  CHECK(l(0, 0) == 0.0);
  CHECK(l(0, 1) == doctest::Approx(l12 * l23 * l34));
  CHECK(l(1, 0) == doctest::Approx(l23));
  CHECK(l(1, 1) == doctest::Approx(l23 * l34));
  CHECK(subgraph_trek_det_check(spec, 10).verdict == DetVerdict::NonzeroWitnessed);

  // No vertex-disjoint paths from {1, 2} to {3, 4} with the path into 3
  // restricted to the single edge 2 -> 3: that path must start at 2, and the
  // only path from 1 to 4 runs through 2.
  int systems = 0;
  for (NodeId into3 : spec.tops)
    for (NodeId into4 : spec.tops) {
      if (into3 == into4) continue;
      for (const Trek& a : enumerate_treks(h, into3, h.id("3")))
        for (const Trek& b : enumerate_treks(h, into4, h.id("4"))) {
          if (a.left.size() != 1 || b.left.size() != 1) continue;  // directed paths only
          if (!path_in(h, spec.d1, a.right)) continue;
          bool disjoint = true;
          for (NodeId x : a.right)
            for (NodeId y : b.right) disjoint = disjoint && x != y;
          systems += disjoint;
        }
    }
  CHECK(systems == 0);
}

TEST_CASE("single direct edge gives an invertible trek matrix") {
  SubgraphTrekMatrixSpec spec;
  spec.host = LatentDigraph({"a", "b"}, {}, std::vector<std::pair<std::string, std::string>>{{"a", "b"}});
  spec.d1 = {1};
  spec.d2 = {1};
  spec.A = {0};
  spec.C = {1};
  CHECK(subgraph_trek_det_check(spec, 3).verdict == DetVerdict::NonzeroWitnessed);
  spec.C = {};
  CHECK_THROWS_AS(subgraph_trek_det_check(spec, 1), std::invalid_argument);
}

TEST_CASE("a separated block of the latent covariance has vanishing determinant") {
  SubgraphTrekMatrixSpec spec;
  const LatentDigraph g = fixture("latent_chain");
  spec.host = latent_subgraph(g);
  spec.d1 = EdgeMask(spec.host.edges().size(), 1);
  spec.d2 = spec.d1;
  spec.A = nodes(g, {"v2", "v3"});
  spec.C = nodes(g, {"v4", "v5"});
  CHECK(trek_separates(spec.host, spec.A, spec.C, {}, nodes(g, {"h2"})));
  const DetCheckResult r = subgraph_trek_det_check(spec, 20);
  CHECK(r.verdict == DetVerdict::AllZero);
  CHECK(r.trials == 20);
}

TEST_CASE("trek systems with subgraph restrictions give nonzero determinants") {
  std::mt19937_64 rng(71);
  std::uniform_int_distribution<int> size(1, 3);
  int witnessed = 0;
  for (int rep = 0; rep < 200; ++rep) {
    SubgraphTrekMatrixSpec spec;
    spec.host = random_digraph(rng, 6, 0, 0.4);
    const std::size_t m = spec.host.edges().size();
    std::bernoulli_distribution keep(0.6);
    spec.d1.resize(m);
    spec.d2.resize(m);
    for (std::size_t e = 0; e < m; ++e) {
      spec.d1[e] = keep(rng);
      spec.d2[e] = keep(rng);
    }
    std::vector<NodeId> perm = testing::all_nodes(spec.host);
    const int k = size(rng);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::uniform_int_distribution<int> split(0, k);
    const int ka = split(rng);
    spec.A = make_set({perm.begin(), perm.begin() + ka});
    spec.B = make_set({perm.begin() + ka, perm.begin() + k});
    std::shuffle(perm.begin(), perm.end(), rng);
    const int kc = split(rng);
    spec.C = make_set({perm.begin(), perm.begin() + kc});
    spec.D = make_set({perm.begin() + kc, perm.begin() + k});

    std::vector<char> used(static_cast<std::size_t>(k), 0);
    TrekSystem sys;
    if (!brute_force_system(spec, 0, used, sys)) continue;
    ++witnessed;
    CHECK(subgraph_trek_det_check(spec, 3, static_cast<std::uint64_t>(rep)).verdict ==
          DetVerdict::NonzeroWitnessed);
  }
  CHECK(witnessed > 40);
}
