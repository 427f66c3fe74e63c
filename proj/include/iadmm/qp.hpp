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

#ifndef IADMM_QP_HPP_
#define IADMM_QP_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <utility>

namespace iadmm {

using Vector = Eigen::VectorXd;
using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Tolerance used to decide whether a z entry sits on one of its bounds.
inline constexpr double kBoundTol = 1e-9;

/**
 * Convex QP in two-sided form
 *
 *   minimize    1/2 x'Qx + p'x
 *   subject to  l <= Ax <= u
 *
 * with l_i in R u {-inf} and u_i in R u {+inf}. Rows with finite l_i == u_i
 * are equality rows.
 */
struct BoxQp {
  Matrix Q;
  Vector p;
  Matrix A;
  Vector l;
  Vector u;

  int n() const { return static_cast<int>(p.size()); }
  int m() const { return static_cast<int>(l.size()); }

  bool IsEqualityRow(int i) const {
    return std::isfinite(l[i]) && l[i] == u[i];
  }
  int EqualityCount() const;

  // Checks shapes, finiteness of Q/p/A, symmetry (1e-10), l <= u and PSD-ness
  // (power-iteration estimate of the smallest eigenvalue >= -1e-8). Throws
  // Error(kInvalidProblem | kDimensionMismatch).
  void Validate() const;
};

/// Primal/dual ADMM state plus the auxiliaries carried between steps.
struct Iterate {
  Vector x;
  Vector z;
  Vector y;
  Vector x_tilde;
  Vector z_tilde;
  Vector nu;

  static Iterate Zeros(int n, int m);
  bool AllFinite() const;
};

struct Residuals {
  Vector r_primal;  // Ax - z
  Vector r_dual;    // Qx + p + A'y
  double primal_norm = 0.0;
  double dual_norm = 0.0;
};

struct SolveMetrics {
  double objective = 0.0;
  double mean_ineq_violation = 0.0;
  double mean_eq_violation = 0.0;
  int factorization_count = 0;
  int iteration_count = 0;
  double wall_time_seconds = 0.0;
};

double EvalObjective(const BoxQp& prob, const Vector& x);

Residuals ComputeResiduals(const BoxQp& prob, const Iterate& it);

Vector ProjectBox(const Vector& v, const Vector& l, const Vector& u);

// Mean violation over inequality rows and over equality rows (0 when a class
// is empty). Returned as (mean_ineq, mean_eq).
std::pair<double, double> ConstraintViolations(const BoxQp& prob,
                                               const Vector& x);

// Infinity-norm KKT violation of (x, z, y): dual residual, primal residual,
// and the normal-cone condition y in N_[l,u](z).
double StationarityViolation(const BoxQp& prob, const Iterate& it);

// Smallest eigenvalue estimate of a symmetric matrix by shifted power
// iteration. Never below the true smallest eigenvalue for exact arithmetic.
double EstimateMinEigenvalue(const Matrix& S, int iterations = 100);

}  // namespace iadmm

#endif  // IADMM_QP_HPP_
