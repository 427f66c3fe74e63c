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

#ifndef IADMM_LINALG_HPP_
#define IADMM_LINALG_HPP_

#include <functional>

#include "iadmm/qp.hpp"

namespace iadmm {

/**
 * Condensed quasi-definite KKT system
 *
 *   [ Q + sigma I    A'       ] [ x  ]   [ sigma x^k - p      ]
 *   [ A            -diag(1/rho)] [ nu ] = [ z^k - y^k / rho    ]
 *
 * The first `n` rows form the positive definite block, the remaining `m` rows
 * the negative definite block.
 */
struct KktSystem {
  int n = 0;
  int m = 0;
  Matrix matrix;
  Vector rhs;

  int dim() const { return n + m; }
};

KktSystem BuildKkt(const BoxQp& prob, const Vector& rho, double sigma);

// Right-hand side of the condensed system for the current (x, z, y).
Vector BuildKktRhs(const BoxQp& prob, const Vector& x, const Vector& z,
                   const Vector& y, const Vector& rho, double sigma);

// Dense LDL' factorization of a symmetric quasi-definite matrix. Pivots that
// underflow get +1e-9 (first block) or -1e-9 (second block) added; a pivot
// still below 1e-14 in magnitude is reported as SingularMatrix.
class LdlFactorization {
 public:
  explicit LdlFactorization(const KktSystem& sys);

  // One refinement pass is applied against the original matrix.
  Vector Solve(const Vector& b) const;

  int dim() const { return static_cast<int>(d_.size()); }
  int regularized_pivots() const { return regularized_pivots_; }

 private:
  Vector SolveFactors(const Vector& b) const;

  Matrix original_;
  Matrix lower_;  // unit lower triangular, stored dense
  Vector d_;
  int regularized_pivots_ = 0;
};

LdlFactorization LdlFactorize(const KktSystem& sys);

// Process-wide count of LdlFactorization constructions. Used to instrument
// the one-factorization guarantees.
long TotalFactorizations();

using LinearOperator = std::function<Vector(const Vector&)>;

struct CgResult {
  Vector w;
  int iterations = 0;
  bool converged = false;
};

/// Stepwise conjugate gradient, so callers can interleave their own checks.
class ConjugateGradient {
 public:
  ConjugateGradient(LinearOperator op, Vector b, Vector x0);

  // Runs up to `max_steps` iterations or until ||r|| <= tol * ||b||.
  // Returns the number of iterations performed.
  int Run(int max_steps, double tol);

  const Vector& solution() const { return x_; }
  double residual_norm() const { return std::sqrt(rr_); }
  double rhs_norm() const { return b_norm_; }
  int total_iterations() const { return iterations_; }

 private:
  LinearOperator op_;
  Vector x_, r_, dir_;
  double rr_ = 0.0;
  double b_norm_ = 0.0;
  int iterations_ = 0;
};

CgResult CgSolve(const LinearOperator& op, const Vector& b, double tol,
                 int max_iter);
CgResult CgSolve(const LinearOperator& op, const Vector& b, const Vector& x0,
                 double tol, int max_iter);

struct SpectralEstimates {
  double sigma_q_max = 0.0;
  double sigma_ata_min = 0.0;
  double sigma_ata_max = 0.0;
  double kappa_ata = 1.0;
};

// Largest eigenvalue of a symmetric PSD operator by power iteration.
// Throws ConvergenceFailure when the last relative change exceeds 1e-4.
double PowerIterationMax(const Matrix& S, int max_iter = 200,
                         double tol = 1e-8);

SpectralEstimates ComputeSpectralEstimates(const BoxQp& prob);

// Pseudo-inverse through the eigendecomposition of the smaller Gram matrix;
// eigenvalues below 1e-10 * max are treated as zero.
Matrix PseudoInverse(const Matrix& A);

}  // namespace iadmm

#endif  // IADMM_LINALG_HPP_
