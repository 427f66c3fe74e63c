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

#include "iadmm/qp.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace iadmm {
namespace {

BoxQp Scalar(double q, double p, double a, double l, double u) {
  BoxQp prob;
  prob.Q = Matrix::Constant(1, 1, q);
  prob.p = Vector::Constant(1, p);
  prob.A = Matrix::Constant(1, 1, a);
  prob.l = Vector::Constant(1, l);
  prob.u = Vector::Constant(1, u);
  return prob;
}

TEST(Objective, HandValues) {
  BoxQp prob;
  prob.Q = Matrix::Identity(2, 2);
  prob.p = Vector::Zero(2);
  prob.A = Matrix::Zero(0, 2);
  prob.l = prob.u = Vector::Zero(0);
  EXPECT_EQ(EvalObjective(prob, Vector::Zero(2)), 0.0);
  prob.p = Vector::Ones(2);
  EXPECT_DOUBLE_EQ(EvalObjective(prob, Vector::Ones(2)), 3.0);
}

TEST(Objective, MatchesDoubleLoop) {
  std::mt19937_64 gen(1);
  const Matrix M = oracle::RandomMatrix(gen, 5, 5);
  BoxQp prob;
  prob.Q = M * M.transpose();
  prob.p = oracle::RandomVector(gen, 5);
  prob.A = Matrix::Zero(0, 5);
  prob.l = prob.u = Vector::Zero(0);
  const Vector x = oracle::RandomVector(gen, 5);
  double expected = 0.0;
  for (int i = 0; i < 5; ++i) {
    expected += prob.p[i] * x[i];
    for (int j = 0; j < 5; ++j) expected += 0.5 * x[i] * prob.Q(i, j) * x[j];
  }
  EXPECT_NEAR(EvalObjective(prob, x), expected, 1e-12 * (1 + std::abs(expected)));
}

TEST(Residuals, HandAndZeroIterate) {
  const BoxQp prob = Scalar(1, 0, 1, -kInf, kInf);
  Iterate it = Iterate::Zeros(1, 1);
  it.x[0] = 1;
  it.z[0] = 1;
  const Residuals r = ComputeResiduals(prob, it);
  EXPECT_EQ(r.r_primal[0], 0.0);
  EXPECT_EQ(r.r_dual[0], 1.0);

  std::mt19937_64 gen(2);
  const BoxQp rnd = oracle::RandomBoxQp(gen, 8, 10);
  const Residuals z = ComputeResiduals(rnd, Iterate::Zeros(8, 10));
  EXPECT_EQ(z.primal_norm, 0.0);
  EXPECT_TRUE(z.r_dual.isApprox(rnd.p));
}

TEST(Residuals, MatchesPerEntryLoops) {
  std::mt19937_64 gen(3);
  const BoxQp prob = oracle::RandomBoxQp(gen, 8, 10);
  Iterate it = Iterate::Zeros(8, 10);
  it.x = oracle::RandomVector(gen, 8);
  it.z = oracle::RandomVector(gen, 10);
  it.y = oracle::RandomVector(gen, 10);
  const Residuals r = ComputeResiduals(prob, it);
  for (int i = 0; i < 10; ++i) {
    double v = -it.z[i];
    for (int j = 0; j < 8; ++j) v += prob.A(i, j) * it.x[j];
    EXPECT_NEAR(r.r_primal[i], v, 1e-12);
  }
  for (int j = 0; j < 8; ++j) {
    double v = prob.p[j];
    for (int k = 0; k < 8; ++k) v += prob.Q(j, k) * it.x[k];
    for (int i = 0; i < 10; ++i) v += prob.A(i, j) * it.y[i];
    EXPECT_NEAR(r.r_dual[j], v, 1e-11);
  }
  EXPECT_DOUBLE_EQ(r.primal_norm, r.r_primal.norm());
  EXPECT_DOUBLE_EQ(r.dual_norm, r.r_dual.norm());
}

TEST(ProjectBox, CasesAndIdempotence) {
  auto one = [](double v, double l, double u) {
    return ProjectBox(Vector::Constant(1, v), Vector::Constant(1, l),
                      Vector::Constant(1, u))[0];
  };
  EXPECT_EQ(one(3, 0, 2), 2);
  EXPECT_EQ(one(5, -kInf, 2), 2);
  EXPECT_EQ(one(-5, -kInf, kInf), -5);
  EXPECT_EQ(one(1.5, 0, 2), 1.5);
  std::mt19937_64 gen(4);
  const Vector v = 3 * oracle::RandomVector(gen, 50);
  const Vector l = -Vector::Ones(50);
  Vector u = Vector::Ones(50);
  u[3] = kInf;
  const Vector once = ProjectBox(v, l, u);
  EXPECT_EQ(ProjectBox(once, l, u), once);
}

TEST(Violations, HandAndLoopOracle) {
  BoxQp eq = Scalar(1, 0, 1, 1, 1);
  EXPECT_EQ(ConstraintViolations(eq, Vector::Constant(1, 3)).second, 2.0);
  EXPECT_EQ(ConstraintViolations(eq, Vector::Constant(1, 1)),
            std::make_pair(0.0, 0.0));

  std::mt19937_64 gen(5);
  const BoxQp prob = oracle::RandomBoxQp(gen, 6, 12, 4);
  const Vector x = oracle::RandomVector(gen, 6);
  const Vector ax = prob.A * x;
  double ineq = 0, eqv = 0;
  int ni = 0, ne = 0;
  for (int i = 0; i < 12; ++i) {
    if (prob.l[i] == prob.u[i]) {
      eqv += std::abs(ax[i] - prob.u[i]);
      ++ne;
    } else {
      ineq += std::max(0.0, ax[i] - prob.u[i]) + std::max(0.0, prob.l[i] - ax[i]);
      ++ni;
    }
  }
  const auto [mi, me] = ConstraintViolations(prob, x);
  EXPECT_NEAR(mi, ineq / ni, 1e-12);
  EXPECT_NEAR(me, eqv / ne, 1e-12);
  EXPECT_EQ(prob.EqualityCount(), 4);
}

TEST(Stationarity, HandKktPoints) {
  BoxQp free_prob = Scalar(1, 0, 1, -kInf, kInf);
  EXPECT_EQ(StationarityViolation(free_prob, Iterate::Zeros(1, 1)), 0.0);

  BoxQp lower = Scalar(1, 0, 1, 1, kInf);
  Iterate it = Iterate::Zeros(1, 1);
  it.x[0] = 1;
  it.z[0] = 1;
  it.y[0] = -1;
  EXPECT_EQ(StationarityViolation(lower, it), 0.0);
  EXPECT_EQ(ComputeResiduals(lower, it).dual_norm, 0.0);

  // Interior constraint: y must vanish.
  BoxQp interior = Scalar(1, 0, 1, -5, 5);
  Iterate in = Iterate::Zeros(1, 1);
  in.y[0] = 0.1;
  in.x[0] = -0.1;
  EXPECT_NEAR(StationarityViolation(interior, in), 0.1, 1e-15);
}

TEST(Validate, RejectsBadProblems) {
  BoxQp asym;
  asym.Q = Matrix::Identity(2, 2);
  asym.Q(0, 1) = 1e-3;
  asym.p = Vector::Zero(2);
  asym.A = Matrix::Zero(0, 2);
  asym.l = asym.u = Vector::Zero(0);
  EXPECT_ERROR_KIND(asym.Validate(), ErrorKind::kInvalidProblem);

  BoxQp crossed = Scalar(1, 0, 1, 2, 1);
  EXPECT_ERROR_KIND(crossed.Validate(), ErrorKind::kInvalidProblem);

  BoxQp indefinite = Scalar(-1, 0, 1, 0, 1);
  EXPECT_ERROR_KIND(indefinite.Validate(), ErrorKind::kInvalidProblem);

  BoxQp shape = Scalar(1, 0, 1, 0, 1);
  shape.p = Vector::Zero(2);
  EXPECT_ERROR_KIND(shape.Validate(), ErrorKind::kDimensionMismatch);

  EXPECT_NO_THROW(Scalar(1, 0, 1, 0, 1).Validate());
}

TEST(MinEigenvalue, MatchesJacobiOracle) {
  std::mt19937_64 gen(6);
  const Matrix M = oracle::RandomMatrix(gen, 7, 7);
  const Matrix S = M + M.transpose();
  const double expected = oracle::JacobiEigenvalues(S).front();
  EXPECT_NEAR(EstimateMinEigenvalue(S, 2000), expected,
              1e-4 * (1 + std::abs(expected)));
}

TEST(Iterate, FiniteCheck) {
  Iterate it = Iterate::Zeros(2, 2);
  EXPECT_TRUE(it.AllFinite());
  it.y[1] = std::nan("");
  EXPECT_FALSE(it.AllFinite());
}

}  // namespace
}  // namespace iadmm
