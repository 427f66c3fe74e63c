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
#include "iadmm/precond.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace iadmm {
namespace {

double MaxRelDiff(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

// Entries with magnitudes spread over 1e-3 .. 1e3.
BoxQp WildProblem(std::mt19937_64& gen, int n, int m) {
  std::uniform_real_distribution<double> expo(-3.0, 3.0);
  BoxQp prob = oracle::RandomBoxQp(gen, n, m);
  Vector d(n);
  for (int i = 0; i < n; ++i) d[i] = std::pow(10.0, expo(gen));
  prob.Q = d.asDiagonal() * prob.Q * d.asDiagonal();
  prob.p = d.cwiseProduct(prob.p);
  for (int i = 0; i < m; ++i) {
    const double e = std::pow(10.0, expo(gen));
    prob.A.row(i) *= e;
    if (std::isfinite(prob.l[i])) prob.l[i] *= e;
    if (std::isfinite(prob.u[i])) prob.u[i] *= e;
  }
  return prob;
}

TEST(Scale, IdentityAndDirectFormula) {
  std::mt19937_64 gen(20);
  const BoxQp prob = oracle::RandomBoxQp(gen, 4, 3);
  const BoxQp same = ScaleProblem(prob, ScalingState::Identity(4, 3));
  EXPECT_EQ(same.Q, prob.Q);
  EXPECT_EQ(same.A, prob.A);
  EXPECT_EQ(same.u, prob.u);

  BoxQp eye = prob;
  eye.Q = Matrix::Identity(4, 4);
  ScalingState s = ScalingState::Identity(4, 3);
  s.D = Vector::Constant(4, 2.0);
  EXPECT_EQ(ScaleProblem(eye, s).Q, Matrix(4 * Matrix::Identity(4, 4)));
}

TEST(Ruiz, OneSweepScalarTrace) {
  BoxQp prob;
  prob.Q = Matrix::Constant(1, 1, 4.0);
  prob.p = Vector::Zero(1);
  prob.A = Matrix::Zero(0, 1);
  prob.l = prob.u = Vector::Zero(0);
  const ScalingState s = RuizEquilibrate(prob, 1);
  EXPECT_DOUBLE_EQ(s.D[0], 0.5);
  EXPECT_DOUBLE_EQ(ScaleProblem(prob, s).Q(0, 0), 1.0);
}

TEST(Ruiz, EquilibratedInputIsFixedPoint) {
  BoxQp prob;
  prob.Q = Matrix::Identity(3, 3);
  prob.p = Vector::Constant(3, 0.25);
  prob.A = Matrix::Identity(3, 3);
  prob.l = -Vector::Ones(3);
  prob.u = Vector::Ones(3);
  const ScalingState s = RuizEquilibrate(prob, 1);
  EXPECT_EQ(s.D, Vector::Ones(3));
  EXPECT_EQ(s.E, Vector::Ones(3));
  EXPECT_DOUBLE_EQ(s.c, 1.0);

  prob.p = Vector::Constant(3, 4.0);
  EXPECT_DOUBLE_EQ(RuizEquilibrate(prob, 1).c, 0.25);
}

TEST(Ruiz, RowNormSpreadShrinksEverySweep) {
  std::mt19937_64 gen(21);
  const BoxQp prob = WildProblem(gen, 20, 15);
  double last = kInf;
  for (int sweeps = 1; sweeps <= 10; ++sweeps) {
    ScalingState s = RuizEquilibrate(prob, sweeps);
    const Matrix M = KktMatrix(ScaleProblem(prob, s));
    const Vector rows = M.cwiseAbs().rowwise().maxCoeff();
    const double ratio = rows.maxCoeff() / rows.minCoeff();
    EXPECT_LE(ratio, last * (1 + 1e-12)) << "sweep " << sweeps;
    last = ratio;
  }
}

TEST(Ruiz, ZeroRowsAreLeftAlone) {
  std::mt19937_64 gen(22);
  BoxQp prob = oracle::RandomBoxQp(gen, 4, 3);
  prob.A.row(1).setZero();
  const ScalingState s = RuizEquilibrate(prob, 5);
  EXPECT_EQ(s.E[1], 1.0);
  EXPECT_TRUE(s.D.allFinite() && (s.D.array() > 0).all());
}

TEST(Scale, RoundTripAndInfiniteBounds) {
  std::mt19937_64 gen(23);
  const BoxQp prob = WildProblem(gen, 12, 9);
  const ScalingState s = RuizEquilibrate(prob, 10);
  const BoxQp scaled = ScaleProblem(prob, s);
  const BoxQp back = UnscaleProblem(scaled, s);
  EXPECT_LE(MaxRelDiff(back.Q, prob.Q), 1e-12);
  EXPECT_LE(MaxRelDiff(back.A, prob.A), 1e-12);
  EXPECT_LE(MaxRelDiff(back.p, prob.p), 1e-12);
  for (int i = 0; i < prob.m(); ++i) {
    EXPECT_EQ(std::isinf(scaled.l[i]), std::isinf(prob.l[i]));
    if (std::isfinite(prob.l[i]))
      EXPECT_NEAR(back.l[i], prob.l[i], 1e-12 * (1 + std::abs(prob.l[i])));
  }
  const Iterate it = UnscaleSolution(Iterate::Zeros(12, 9), s);
  EXPECT_EQ(it.x, Vector::Zero(12));
}

TEST(Scale, ResidualsTransformAlgebraically) {
  std::mt19937_64 gen(24);
  const BoxQp prob = WildProblem(gen, 8, 6);
  const ScalingState s = RuizEquilibrate(prob, 10);
  const BoxQp scaled = ScaleProblem(prob, s);
  Iterate it = Iterate::Zeros(8, 6);
  it.x = oracle::RandomVector(gen, 8);
  it.z = oracle::RandomVector(gen, 6);
  it.y = oracle::RandomVector(gen, 6);
  const Residuals rs = ComputeResiduals(scaled, it);
  const Residuals ru = ComputeResiduals(prob, UnscaleSolution(it, s));
  const Vector primal = rs.r_primal.cwiseQuotient(s.E);
  const Vector dual = rs.r_dual.cwiseQuotient(s.D) / s.c;
  EXPECT_LE((ru.r_primal - primal).cwiseAbs().maxCoeff(),
            1e-10 * (1 + primal.cwiseAbs().maxCoeff()));
  EXPECT_LE((ru.r_dual - dual).cwiseAbs().maxCoeff(),
            1e-10 * (1 + dual.cwiseAbs().maxCoeff()));
  const Iterate again = ScaleSolution(UnscaleSolution(it, s), s);
  EXPECT_LE((again.y - it.y).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Scale, PreservesMinimizer) {
  std::mt19937_64 gen(25);
  const BoxQp prob = oracle::RandomBoxQp(gen, 5, 4, 1);
  AdmmSettings settings = DefaultSettings(prob);
  settings.eps_abs = settings.eps_rel = 1e-10;
  const SolveResult direct = SolveExact(prob, settings);

  const PreparedProblem prep = Prepare(prob);
  AdmmSettings scaled_settings = DefaultSettings(prep.scaled);
  scaled_settings.eps_abs = scaled_settings.eps_rel = 1e-10;
  const SolveResult scaled = SolveExact(prep.scaled, scaled_settings);
  ASSERT_LE(StationarityViolation(prep.scaled, scaled.iterate), 1e-8);
  const Iterate unscaled = UnscaleSolution(scaled.iterate, prep.scaling);
  EXPECT_LE((unscaled.x - direct.iterate.x).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE(StationarityViolation(prob, unscaled), 1e-6);

  const std::optional<Vector> ref = oracle::EnumerateActiveSets(prob);
  ASSERT_TRUE(ref.has_value());
  EXPECT_LE((unscaled.x - *ref).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Ruiz, RejectsZeroSweeps) {
  std::mt19937_64 gen(26);
  EXPECT_ERROR_KIND(RuizEquilibrate(oracle::RandomBoxQp(gen, 2, 2), 0),
                    ErrorKind::kInvalidArgument);
}

}  // namespace
}  // namespace iadmm
