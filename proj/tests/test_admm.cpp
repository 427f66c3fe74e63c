// Copyright 2026 The iadmm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>

#include "iadmm/admm.hpp"
#include "iadmm/datasets.hpp"
#include "iadmm/precond.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace iadmm {
namespace {

double MaxChange(const Iterate& a, const Iterate& b) {
  return std::max({(a.x - b.x).cwiseAbs().maxCoeff(),
                   (a.z - b.z).cwiseAbs().maxCoeff(),
                   (a.y - b.y).cwiseAbs().maxCoeff()});
}

// min 1/2 |x|^2 s.t. x1 + x2 >= 2; solution x = (1, 1), y = -1.
BoxQp HalfPlane() {
  BoxQp prob;
  prob.Q = Matrix::Identity(2, 2);
  prob.p = Vector::Zero(2);
  prob.A = Matrix::Ones(1, 2);
  prob.l = Vector::Constant(1, 2.0);
  prob.u = Vector::Constant(1, kInf);
  return prob;
}

TEST(Settings, DefaultsAndValidation) {
  std::mt19937_64 gen(30);
  const BoxQp prob = oracle::RandomBoxQp(gen, 4, 5, 2);
  const Vector rho = DefaultRho(prob);
  EXPECT_EQ(rho[0], 100.0);
  EXPECT_EQ(rho[1], 100.0);
  EXPECT_EQ(rho[2], 0.1);
  AdmmSettings s = DefaultSettings(prob);
  EXPECT_EQ(s.sigma, 1e-6);
  EXPECT_EQ(s.alpha, 1.6);
  EXPECT_NO_THROW(s.Validate(5));
  s.alpha = 2.0;
  EXPECT_ERROR_KIND(s.Validate(5), ErrorKind::kInvalidArgument);
  s = DefaultSettings(prob);
  s.rho[0] = 0.0;
  EXPECT_ERROR_KIND(s.Validate(5), ErrorKind::kInvalidArgument);
  EXPECT_ERROR_KIND(DefaultSettings(prob).Validate(4),
                    ErrorKind::kDimensionMismatch);
}

TEST(Step, EqualityProjectionIsExact) {
  BoxQp prob;
  prob.Q = Matrix::Identity(1, 1);
  prob.p = Vector::Zero(1);
  prob.A = Matrix::Identity(1, 1);
  prob.l = prob.u = Vector::Ones(1);
  AdmmSettings s;
  s.rho = Vector::Ones(1);
  s.alpha = 1.0;
  const LdlFactorization f(BuildKkt(prob, s.rho, s.sigma));
  const Iterate next = AdmmStep(prob, Iterate::Zeros(1, 1), s, f);
  EXPECT_EQ(next.z[0], 1.0);
  EXPECT_EQ(next.x, next.x_tilde);
}

TEST(Step, KktPointIsFixed) {
  const BoxQp prob = HalfPlane();
  Iterate kkt = Iterate::Zeros(2, 1);
  kkt.x = Vector::Ones(2);
  kkt.z = Vector::Constant(1, 2.0);
  kkt.y = Vector::Constant(1, -1.0);
  ASSERT_EQ(StationarityViolation(prob, kkt), 0.0);
  const AdmmSettings s = DefaultSettings(prob);
  const LdlFactorization f(BuildKkt(prob, s.rho, s.sigma));
  EXPECT_LE(MaxChange(AdmmStep(prob, kkt, s, f), kkt), 1e-8);
}

TEST(Step, UpdateIdentities) {
  std::mt19937_64 gen(31);
  const BoxQp prob = oracle::RandomBoxQp(gen, 6, 5, 1);
  AdmmSettings s = DefaultSettings(prob);
  const LdlFactorization f(BuildKkt(prob, s.rho, s.sigma));
  Iterate it = Iterate::Zeros(6, 5);
  it.x = oracle::RandomVector(gen, 6);
  it.z = ProjectBox(oracle::RandomVector(gen, 5), prob.l, prob.u);
  it.y = oracle::RandomVector(gen, 5);
  const Iterate next = AdmmStep(prob, it, s, f);

  const Vector y_again = it.y + s.rho.cwiseProduct(next.z_tilde - next.z);
  EXPECT_LE((y_again - next.y).cwiseAbs().maxCoeff(),
            1e-12 * (1 + next.y.cwiseAbs().maxCoeff()));
  // With an exact solve z_tilde = A x_tilde, so d_y = rho (A x_tilde - z).
  const Vector d_y = s.rho.cwiseProduct(prob.A * next.x_tilde - next.z);
  EXPECT_LE((next.y - it.y - d_y).cwiseAbs().maxCoeff(),
            1e-8 * (1 + d_y.cwiseAbs().maxCoeff()));
  EXPECT_TRUE(next.x.isApprox(1.6 * next.x_tilde - 0.6 * it.x));
}

TEST(Step, CondensedEqualsReducedSystem) {
  std::mt19937_64 gen(32);
  const BoxQp prob = oracle::RandomBoxQp(gen, 7, 4);
  AdmmSettings s = DefaultSettings(prob);
  s.rho = Vector::Constant(4, 0.7);
  const LdlFactorization f(BuildKkt(prob, s.rho, s.sigma));
  Iterate it = Iterate::Zeros(7, 4);
  it.x = oracle::RandomVector(gen, 7);
  it.z = oracle::RandomVector(gen, 4);
  it.y = oracle::RandomVector(gen, 4);
  const Iterate next = AdmmStep(prob, it, s, f);
  const Matrix M = prob.Q + s.sigma * Matrix::Identity(7, 7) +
                   0.7 * prob.A.transpose() * prob.A;
  const Vector rhs =
      s.sigma * it.x - prob.p + prob.A.transpose() * (0.7 * it.z - it.y);
  EXPECT_LE((next.x_tilde - oracle::GeppSolve(M, rhs)).cwiseAbs().maxCoeff(),
            1e-8);
}

TEST(Step, UnitRelaxationKeepsXTilde) {
  std::mt19937_64 gen(33);
  const BoxQp prob = oracle::RandomBoxQp(gen, 5, 5);
  AdmmSettings s = DefaultSettings(prob);
  s.alpha = 1.0;
  const LdlFactorization f(BuildKkt(prob, s.rho, s.sigma));
  Iterate it = Iterate::Zeros(5, 5);
  for (int k = 0; k < 5; ++k) {
    it = AdmmStep(prob, it, s, f);
    EXPECT_EQ(it.x, it.x_tilde);
  }
}

TEST(Exact, HandSolvedProblems) {
  BoxQp free_prob;
  free_prob.Q = Matrix::Identity(3, 3);
  free_prob.p = Vector::Zero(3);
  free_prob.A = Matrix::Zero(0, 3);
  free_prob.l = free_prob.u = Vector::Zero(0);
  const SolveResult f = SolveExact(free_prob, DefaultSettings(free_prob));
  EXPECT_LE(f.iterate.x.cwiseAbs().maxCoeff(), 1e-8);

  BoxQp sum;
  sum.Q = Matrix::Identity(2, 2);
  sum.p = Vector::Zero(2);
  sum.A = Matrix::Ones(1, 2);
  sum.l = sum.u = Vector::Constant(1, 2.0);
  AdmmSettings tight = DefaultSettings(sum);
  tight.eps_abs = tight.eps_rel = 1e-8;
  const SolveResult r = SolveExact(sum, tight);
  EXPECT_EQ(r.status, SolveStatus::kConverged);
  EXPECT_LE((r.iterate.x - Vector::Ones(2)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Exact, RandomProblemsMatchEnumeration) {
  std::mt19937_64 gen(34);
  for (int trial = 0; trial < 5; ++trial) {
    const BoxQp prob = oracle::RandomBoxQp(gen, 10, 6, trial % 3);
    const std::optional<Vector> ref = oracle::EnumerateActiveSets(prob);
    ASSERT_TRUE(ref.has_value());
    // The engine runs on the equilibrated problem, as in the pipeline.
    const PreparedProblem prep = Prepare(prob);
    AdmmSettings s = DefaultSettings(prep.scaled);
    s.eps_abs = s.eps_rel = 0.0;
    s.max_iter = 500;
    const SolveResult r = SolveExact(prep.scaled, s);
    const Residuals res = ComputeResiduals(prep.scaled, r.iterate);
    EXPECT_LT(res.primal_norm, 1e-6);
    EXPECT_LT(res.dual_norm, 1e-6);
    const Vector x = UnscaleSolution(r.iterate, prep.scaling).x;
    EXPECT_LE((x - *ref).cwiseAbs().maxCoeff(), 1e-5);
  }
}

TEST(Exact, OneFactorizationAndSoftFailure) {
  std::mt19937_64 gen(35);
  const BoxQp prob = oracle::RandomBoxQp(gen, 8, 6, 2);
  const long before = TotalFactorizations();
  const SolveResult r = SolveExact(prob, DefaultSettings(prob));
  EXPECT_EQ(TotalFactorizations() - before, 1);
  EXPECT_EQ(r.metrics.factorization_count, 1);

  AdmmSettings short_run = DefaultSettings(prob);
  short_run.max_iter = 3;
  const SolveResult cut = SolveExact(prob, short_run);
  EXPECT_EQ(cut.status, SolveStatus::kMaxIterExceeded);
  EXPECT_EQ(cut.metrics.iteration_count, 3);
  EXPECT_TRUE(cut.iterate.AllFinite());
}

TEST(Exact, MinSoFarResidualNeverIncreases) {
  std::mt19937_64 gen(36);
  const BoxQp prob = oracle::RandomBoxQp(gen, 12, 10, 3);
  AdmmSettings s = DefaultSettings(prob);
  s.eps_abs = s.eps_rel = 0.0;
  s.max_iter = 300;
  const SolveResult r = SolveExact(prob, s);
  ASSERT_EQ(r.residual_history.size(), 300u);
  double best = kInf, last_best = kInf;
  for (const auto& [p, d] : r.residual_history) {
    best = std::min(best, std::max(p, d));
    EXPECT_LE(best, last_best);
    last_best = best;
  }
}

TEST(Exact, WarmStartAtOptimumStopsImmediately) {
  std::mt19937_64 gen(37);
  const BoxQp prob = oracle::RandomBoxQp(gen, 6, 4, 1);
  AdmmSettings s = DefaultSettings(prob);
  s.eps_abs = s.eps_rel = 1e-10;
  const SolveResult first = SolveExact(prob, s);
  s.eps_abs = s.eps_rel = 1e-8;
  const SolveResult again = SolveExact(prob, s, first.iterate);
  EXPECT_EQ(again.metrics.iteration_count, 1);
}

TEST(Restore, OptimalStartAndZeroIterations) {
  std::mt19937_64 gen(38);
  const BoxQp prob = oracle::RandomBoxQp(gen, 6, 5, 2);
  AdmmSettings s = DefaultSettings(prob);
  s.eps_abs = s.eps_rel = 1e-12;
  s.max_iter = 100000;
  const SolveResult opt = SolveExact(prob, s);
  const SolveResult kept = RestoreFeasibility(prob, opt.iterate, s.rho);
  EXPECT_LE(MaxChange(kept.iterate, opt.iterate), 1e-7);
  EXPECT_EQ(kept.metrics.iteration_count, 20);

  const SolveResult none = RestoreFeasibility(prob, opt.iterate, s.rho, 0);
  EXPECT_EQ(none.iterate.x, opt.iterate.x);
  EXPECT_EQ(none.iterate.y, opt.iterate.y);
}

TEST(Restore, RepairsTruncatedRun) {
  GeneratorSpec spec;
  spec.family = Family::kConvexQpRhs;
  spec.n = 50;
  spec.m_ineq = spec.m_eq = 25;
  spec.seed = 39;
  const BoxQp prob = Generate(spec).front();
  AdmmSettings s = DefaultSettings(prob);
  // Stop the exact engine once the equality violation is near 1e-2.
  Iterate start;
  double eq = kInf;
  for (int iters = 1; iters < 200 && eq > 1e-2; ++iters) {
    s.max_iter = iters;
    s.eps_abs = s.eps_rel = 0.0;
    start = SolveExact(prob, s).iterate;
    eq = ConstraintViolations(prob, start.x).second;
  }
  ASSERT_GT(eq, 1e-3);
  const long before = TotalFactorizations();
  const SolveResult r = RestoreFeasibility(prob, start, s.rho);
  EXPECT_EQ(TotalFactorizations() - before, 1);
  EXPECT_EQ(r.metrics.factorization_count, 1);
  EXPECT_LE(r.metrics.mean_eq_violation, 1e-6);
}

}  // namespace
}  // namespace iadmm
