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

#include "iadmm/datasets.hpp"

#include <cmath>

#include "iadmm/error.hpp"
#include "iadmm/linalg.hpp"
#include "iadmm/rng.hpp"

namespace iadmm {

namespace {

constexpr std::uint64_t kSharedStream = ~0ULL;
constexpr int kMaxRedraws = 20;

Matrix GaussianMatrix(CounterRng& rng, int rows, int cols) {
  Matrix M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = rng.Gaussian();
  return M;
}

// Each entry is kept with probability 1/2 and then drawn from N(0, 1).
Matrix HalfDenseGaussian(CounterRng& rng, int rows, int cols) {
  Matrix M = Matrix::Zero(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      if (rng.Uniform() < 0.5) M(i, j) = rng.Gaussian();
  return M;
}

Vector GaussianVector(CounterRng& rng, int size) {
  Vector v(size);
  for (int i = 0; i < size; ++i) v[i] = rng.Gaussian();
  return v;
}

void CheckSizes(const GeneratorSpec& spec) {
  Require(spec.n > 0, ErrorKind::kInvalidArgument, "n must be positive");
  Require(spec.m_ineq >= 0 && spec.m_eq >= 0, ErrorKind::kInvalidArgument,
          "constraint counts must be non-negative");
  Require(spec.count >= 0, ErrorKind::kInvalidArgument,
          "count must be non-negative");
}

struct ConvexShared {
  Vector q_diag;
  Vector p;
  Matrix G;
  Matrix A;
  Matrix A_pinv;
  Vector c;
};

// Draws A until A A^+ reproduces the identity, i.e. A has full row rank.
void DrawEqualityMatrix(CounterRng& rng, const GeneratorSpec& spec,
                        ConvexShared& out) {
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    out.A = GaussianMatrix(rng, spec.m_eq, spec.n);
    out.A_pinv = PseudoInverse(out.A);
    const Matrix check =
        out.A * out.A_pinv - Matrix::Identity(spec.m_eq, spec.m_eq);
    if (spec.m_eq == 0 || check.cwiseAbs().maxCoeff() <= 1e-8) return;
  }
  Fail(ErrorKind::kRankDeficient,
       "could not draw a full-row-rank equality matrix");
}

ConvexShared DrawConvexShared(CounterRng& rng, const GeneratorSpec& spec) {
  ConvexShared s;
  s.q_diag.resize(spec.n);
  for (int i = 0; i < spec.n; ++i) s.q_diag[i] = rng.Uniform();
  s.p.resize(spec.n);
  for (int i = 0; i < spec.n; ++i) s.p[i] = rng.Uniform();
  s.G = GaussianMatrix(rng, spec.m_ineq, spec.n);
  DrawEqualityMatrix(rng, spec, s);
  // c_i = sum_j |(G A^+)_ij| makes x0 = A^+ b feasible for any |b_j| <= 1.
  s.c = (s.G * s.A_pinv).cwiseAbs().rowwise().sum();
  return s;
}

BoxQp AssembleConvex(const ConvexShared& s, const Vector& b) {
  const int n = static_cast<int>(s.p.size());
  const int mi = static_cast<int>(s.G.rows());
  const int me = static_cast<int>(s.A.rows());
  BoxQp prob;
  prob.Q = s.q_diag.asDiagonal();
  prob.p = s.p;
  prob.A.resize(mi + me, n);
  prob.A.topRows(mi) = s.G;
  prob.A.bottomRows(me) = s.A;
  prob.l.resize(mi + me);
  prob.u.resize(mi + me);
  prob.l.head(mi).setConstant(-kInf);
  prob.u.head(mi) = s.c;
  prob.l.tail(me) = b;
  prob.u.tail(me) = b;
  return prob;
}

Vector DrawRhs(CounterRng& rng, int m_eq) {
  Vector b(m_eq);
  for (int i = 0; i < m_eq; ++i) b[i] = rng.Uniform(-1.0, 1.0);
  return b;
}

}  // namespace

std::string ToString(Family family) {
  switch (family) {
    case Family::kConvexQpRhs: return "convex_qp_rhs";
    case Family::kConvexQpAll: return "convex_qp_all";
    case Family::kRandomQp: return "random_qp";
    case Family::kEqualityQp: return "equality_qp";
    case Family::kSvm: return "svm";
  }
  return "unknown";
}

Family ParseFamily(const std::string& name) {
  for (Family f : {Family::kConvexQpRhs, Family::kConvexQpAll,
                   Family::kRandomQp, Family::kEqualityQp, Family::kSvm}) {
    if (ToString(f) == name) return f;
  }
  Fail(ErrorKind::kInvalidArgument, "unknown family '" + name + "'");
}

std::vector<BoxQp> GenerateConvexQp(const GeneratorSpec& spec) {
  CheckSizes(spec);
  Require(spec.family == Family::kConvexQpRhs ||
              spec.family == Family::kConvexQpAll,
          ErrorKind::kInvalidArgument, "not a convex_qp family");
  std::vector<BoxQp> out;
  out.reserve(spec.count);
  if (spec.family == Family::kConvexQpRhs) {
    CounterRng shared_rng(CounterRng::DeriveKey(spec.seed, kSharedStream));
    const ConvexShared shared = DrawConvexShared(shared_rng, spec);
    for (int i = 0; i < spec.count; ++i) {
      CounterRng rng(CounterRng::DeriveKey(spec.seed, i));
      out.push_back(AssembleConvex(shared, DrawRhs(rng, spec.m_eq)));
    }
  } else {
    for (int i = 0; i < spec.count; ++i) {
      CounterRng rng(CounterRng::DeriveKey(spec.seed, i));
      const ConvexShared s = DrawConvexShared(rng, spec);
      out.push_back(AssembleConvex(s, DrawRhs(rng, spec.m_eq)));
    }
  }
  for (const BoxQp& prob : out) prob.Validate();
  return out;
}

std::vector<BoxQp> GenerateRandomQp(const GeneratorSpec& spec) {
  CheckSizes(spec);
  const int n = spec.n, m = spec.m_ineq;
  std::vector<BoxQp> out;
  out.reserve(spec.count);
  for (int i = 0; i < spec.count; ++i) {
    CounterRng rng(CounterRng::DeriveKey(spec.seed, i));
    const Matrix M = HalfDenseGaussian(rng, n, n);
    BoxQp prob;
    prob.Q = M * M.transpose();
    prob.Q.diagonal().array() += spec.alpha_reg;
    prob.A = HalfDenseGaussian(rng, m, n);
    prob.p = GaussianVector(rng, n);
    const Vector b = GaussianVector(rng, m);
    const Vector spread = GaussianVector(rng, m).cwiseAbs();
    prob.l = b - spread;
    prob.u = b + spread;
    prob.Validate();
    out.push_back(std::move(prob));
  }
  return out;
}

std::vector<BoxQp> GenerateEqualityQp(const GeneratorSpec& spec) {
  CheckSizes(spec);
  const int n = spec.n, m = spec.m_eq;
  std::vector<BoxQp> out;
  out.reserve(spec.count);
  for (int i = 0; i < spec.count; ++i) {
    CounterRng rng(CounterRng::DeriveKey(spec.seed, i));
    const Matrix M = HalfDenseGaussian(rng, n, n);
    BoxQp prob;
    prob.Q = M * M.transpose();
    prob.Q.diagonal().array() += spec.alpha_reg;
    prob.A = HalfDenseGaussian(rng, m, n);
    prob.p = GaussianVector(rng, n);
    prob.l = GaussianVector(rng, m);
    prob.u = prob.l;
    prob.Validate();
    out.push_back(std::move(prob));
  }
  return out;
}

std::vector<BoxQp> GenerateSvm(const GeneratorSpec& spec) {
  CheckSizes(spec);
  const int n = spec.n, m = spec.m_ineq;
  Require(m > 0, ErrorKind::kInvalidArgument, "svm needs m_ineq > 0 points");
  const double stddev = std::sqrt(1.0 / n);
  std::vector<BoxQp> out;
  out.reserve(spec.count);
  for (int k = 0; k < spec.count; ++k) {
    CounterRng rng(CounterRng::DeriveKey(spec.seed, k));
    Vector label(m);
    Matrix data = Matrix::Zero(m, n);
    for (int i = 0; i < m; ++i) {
      label[i] = (i < m / 2) ? 1.0 : -1.0;
      for (int j = 0; j < n; ++j)
        if (rng.Uniform() < 0.5) data(i, j) = rng.Gaussian(label[i] / n, stddev);
    }
    const double lambda = spec.lambda_svm
                              ? *spec.lambda_svm
                              : std::abs(rng.Gaussian()) + 1e-3;

    BoxQp prob;
    prob.Q = Matrix::Zero(n + m, n + m);
    prob.Q.topLeftCorner(n, n).diagonal().setConstant(2.0);
    prob.p = Vector::Zero(n + m);
    prob.p.tail(m).setConstant(lambda);
    // t - diag(b) A x >= 1 and t >= 0.
    prob.A = Matrix::Zero(2 * m, n + m);
    prob.A.topLeftCorner(m, n) = -(label.asDiagonal() * data);
    prob.A.topRightCorner(m, m).setIdentity();
    prob.A.bottomRightCorner(m, m).setIdentity();
    prob.l.resize(2 * m);
    prob.l.head(m).setOnes();
    prob.l.tail(m).setZero();
    prob.u = Vector::Constant(2 * m, kInf);
    prob.Validate();
    out.push_back(std::move(prob));
  }
  return out;
}

std::vector<BoxQp> Generate(const GeneratorSpec& spec) {
  switch (spec.family) {
    case Family::kConvexQpRhs:
    case Family::kConvexQpAll: return GenerateConvexQp(spec);
    case Family::kRandomQp: return GenerateRandomQp(spec);
    case Family::kEqualityQp: return GenerateEqualityQp(spec);
    case Family::kSvm: return GenerateSvm(spec);
  }
  Fail(ErrorKind::kInvalidArgument, "unknown family");
}

ConvexQpParts SplitConvexQp(const BoxQp& prob, int m_ineq) {
  Require(m_ineq >= 0 && m_ineq <= prob.m(), ErrorKind::kDimensionMismatch,
          "m_ineq out of range");
  const int m_eq = prob.m() - m_ineq;
  ConvexQpParts parts;
  parts.G = prob.A.topRows(m_ineq);
  parts.A = prob.A.bottomRows(m_eq);
  parts.c = prob.u.head(m_ineq);
  parts.b = prob.u.tail(m_eq);
  return parts;
}

DatasetSplit SplitIndices(int count) {
  Require(count >= 0, ErrorKind::kInvalidArgument, "count must be >= 0");
  int n_val = static_cast<int>(std::lround(0.01 * count));
  int n_test = static_cast<int>(std::lround(0.05 * count));
  if (count >= 3) {
    n_val = std::max(n_val, 1);
    n_test = std::max(n_test, 1);
  }
  const int n_train = count - n_val - n_test;
  DatasetSplit split;
  for (int i = 0; i < count; ++i) {
    if (i < n_train)
      split.train.push_back(i);
    else if (i < n_train + n_val)
      split.validation.push_back(i);
    else
      split.test.push_back(i);
  }
  return split;
}

}  // namespace iadmm
