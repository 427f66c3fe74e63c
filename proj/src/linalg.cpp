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

#include "iadmm/linalg.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "iadmm/error.hpp"

namespace iadmm {

namespace {

std::atomic<long> g_factorizations{0};

constexpr double kPivotRegularization = 1e-9;
constexpr double kPivotFloor = 1e-14;

}  // namespace

long TotalFactorizations() { return g_factorizations.load(); }

KktSystem BuildKkt(const BoxQp& prob, const Vector& rho, double sigma) {
  const int n = prob.n(), m = prob.m();
  Require(rho.size() == m, ErrorKind::kDimensionMismatch,
          "rho must have length m");
  Require(sigma > 0.0, ErrorKind::kInvalidArgument, "sigma must be positive");
  Require((rho.array() > 0.0).all(), ErrorKind::kInvalidArgument,
          "rho must be positive");
  KktSystem sys;
  sys.n = n;
  sys.m = m;
  sys.matrix = Matrix::Zero(n + m, n + m);
  sys.matrix.topLeftCorner(n, n) = prob.Q;
  sys.matrix.topLeftCorner(n, n).diagonal().array() += sigma;
  sys.matrix.bottomLeftCorner(m, n) = prob.A;
  sys.matrix.topRightCorner(n, m) = prob.A.transpose();
  sys.matrix.bottomRightCorner(m, m).diagonal() = -rho.cwiseInverse();
  sys.rhs = Vector::Zero(n + m);
  return sys;
}

Vector BuildKktRhs(const BoxQp& prob, const Vector& x, const Vector& z,
                   const Vector& y, const Vector& rho, double sigma) {
  const int n = prob.n(), m = prob.m();
  Vector rhs(n + m);
  rhs.head(n) = sigma * x - prob.p;
  rhs.tail(m) = z - y.cwiseQuotient(rho);
  return rhs;
}

LdlFactorization::LdlFactorization(const KktSystem& sys)
    : original_(sys.matrix) {
  const int dim = sys.dim();
  Require(sys.matrix.rows() == dim && sys.matrix.cols() == dim,
          ErrorKind::kDimensionMismatch, "KKT matrix has wrong shape");
  g_factorizations.fetch_add(1);

  // Right-looking LDL' on a working copy; the lower triangle accumulates L.
  Matrix work = sys.matrix;
  lower_ = Matrix::Identity(dim, dim);
  d_ = Vector::Zero(dim);
  for (int j = 0; j < dim; ++j) {
    double pivot = work(j, j);
    if (std::abs(pivot) < kPivotFloor) {
      pivot += (j < sys.n) ? kPivotRegularization : -kPivotRegularization;
      ++regularized_pivots_;
      if (std::abs(pivot) < kPivotFloor) {
        std::ostringstream os;
        os << "pivot " << j << " vanished after regularization";
        Fail(ErrorKind::kSingularMatrix, os.str());
      }
    }
    if (!std::isfinite(pivot)) Fail(ErrorKind::kNonFinite, "non-finite pivot");
    d_[j] = pivot;
    const int rest = dim - j - 1;
    if (rest == 0) break;
    Vector col = work.col(j).tail(rest) / pivot;
    lower_.col(j).tail(rest) = col;
    // Schur complement update of the trailing block (lower triangle suffices,
    // but the full update keeps the code short at desk scale).
    work.bottomRightCorner(rest, rest).noalias() -=
        pivot * col * col.transpose();
  }
}

Vector LdlFactorization::SolveFactors(const Vector& b) const {
  Vector w = lower_.triangularView<Eigen::UnitLower>().solve(b);
  w.array() /= d_.array();
  return lower_.transpose().triangularView<Eigen::UnitUpper>().solve(w);
}

Vector LdlFactorization::Solve(const Vector& b) const {
  Require(b.size() == d_.size(), ErrorKind::kDimensionMismatch,
          "rhs does not match factorization");
  Vector w = SolveFactors(b);
  const Vector r = b - original_ * w;
  w += SolveFactors(r);
  if (!w.allFinite()) Fail(ErrorKind::kNonFinite, "LDL solve produced NaN/Inf");
  return w;
}

LdlFactorization LdlFactorize(const KktSystem& sys) {
  return LdlFactorization(sys);
}

ConjugateGradient::ConjugateGradient(LinearOperator op, Vector b, Vector x0)
    : op_(std::move(op)), x_(std::move(x0)) {
  Require(b.size() == x_.size(), ErrorKind::kDimensionMismatch,
          "CG start vector does not match rhs");
  b_norm_ = b.norm();
  r_ = b - op_(x_);
  dir_ = r_;
  rr_ = r_.squaredNorm();
}

int ConjugateGradient::Run(int max_steps, double tol) {
  int steps = 0;
  while (steps < max_steps) {
    if (std::sqrt(rr_) <= tol * b_norm_ || rr_ == 0.0) break;
    const Vector q = op_(dir_);
    const double curvature = dir_.dot(q);
    if (!std::isfinite(curvature) || curvature <= 0.0) {
      if (!std::isfinite(curvature))
        Fail(ErrorKind::kNonFinite, "CG encountered a non-finite value");
      break;  // operator not positive definite along dir_
    }
    const double step = rr_ / curvature;
    x_.noalias() += step * dir_;
    r_.noalias() -= step * q;
    const double rr_next = r_.squaredNorm();
    if (!std::isfinite(rr_next))
      Fail(ErrorKind::kNonFinite, "CG encountered a non-finite value");
    dir_ = r_ + (rr_next / rr_) * dir_;
    rr_ = rr_next;
    ++steps;
    ++iterations_;
  }
  return steps;
}

CgResult CgSolve(const LinearOperator& op, const Vector& b, const Vector& x0,
                 double tol, int max_iter) {
  Require(tol > 0.0, ErrorKind::kInvalidArgument, "CG tolerance must be > 0");
  ConjugateGradient cg(op, b, x0);
  cg.Run(max_iter, tol);
  CgResult res;
  res.w = cg.solution();
  res.iterations = cg.total_iterations();
  res.converged = cg.residual_norm() <= tol * cg.rhs_norm();
  return res;
}

CgResult CgSolve(const LinearOperator& op, const Vector& b, double tol,
                 int max_iter) {
  return CgSolve(op, b, Vector::Zero(b.size()), tol, max_iter);
}

double PowerIterationMax(const Matrix& S, int max_iter, double tol) {
  const Eigen::Index n = S.rows();
  if (n == 0) return 0.0;
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = 1.0 + 0.1 * std::cos(0.5 + i);
  v.normalize();
  double lambda = 0.0;
  double change = kInf;
  for (int k = 0; k < max_iter; ++k) {
    const Vector w = S * v;
    const double next = v.dot(w);
    const double nrm = w.norm();
    change = std::abs(next - lambda) / std::max(std::abs(next), 1e-300);
    lambda = next;
    if (nrm == 0.0) return 0.0;
    v = w / nrm;
    if (k > 0 && change <= tol) return lambda;
  }
  if (change > 1e-4) {
    std::ostringstream os;
    os << "power iteration stalled (relative change " << change << ")";
    Fail(ErrorKind::kConvergenceFailure, os.str());
  }
  return lambda;
}

SpectralEstimates ComputeSpectralEstimates(const BoxQp& prob) {
  SpectralEstimates est;
  est.sigma_q_max = PowerIterationMax(prob.Q);
  const Matrix& A = prob.A;
  if (A.size() == 0) return est;
  // The nonzero spectrum of A'A equals that of AA'; use the smaller one.
  const Matrix gram = (A.rows() <= A.cols()) ? Matrix(A * A.transpose())
                                             : Matrix(A.transpose() * A);
  est.sigma_ata_max = PowerIterationMax(gram);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  const double cutoff = 1e-10 * est.sigma_ata_max;
  double smallest = est.sigma_ata_max;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    const double ev = eig.eigenvalues()[i];
    if (ev > cutoff) smallest = std::min(smallest, ev);
  }
  est.sigma_ata_min = smallest;
  est.kappa_ata = est.sigma_ata_min > 0.0
                      ? est.sigma_ata_max / est.sigma_ata_min
                      : 1.0;
  return est;
}

Matrix PseudoInverse(const Matrix& A) {
  const Eigen::Index m = A.rows(), n = A.cols();
  if (A.size() == 0) return Matrix::Zero(n, m);
  const bool wide = m <= n;
  const Matrix gram = wide ? Matrix(A * A.transpose())
                           : Matrix(A.transpose() * A);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  const Vector& ev = eig.eigenvalues();
  const double cutoff = 1e-10 * ev.maxCoeff();
  Vector inv = Vector::Zero(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev[i] > cutoff) inv[i] = 1.0 / ev[i];
  const Matrix& V = eig.eigenvectors();
  const Matrix gram_pinv = V * inv.asDiagonal() * V.transpose();
  return wide ? Matrix(A.transpose() * gram_pinv)
              : Matrix(gram_pinv * A.transpose());
}

}  // namespace iadmm
