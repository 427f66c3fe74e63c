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

#include "iadmm/qp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "iadmm/error.hpp"

namespace iadmm {

const char* ToString(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kInvalidProblem: return "InvalidProblem";
    case ErrorKind::kSingularMatrix: return "SingularMatrix";
    case ErrorKind::kNonFinite: return "NonFiniteEncountered";
    case ErrorKind::kConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::kInfeasibleConstants: return "InfeasibleConstants";
    case ErrorKind::kRankDeficient: return "RankDeficientA";
    case ErrorKind::kDatasetEmpty: return "DatasetEmpty";
    case ErrorKind::kIo: return "IoError";
    case ErrorKind::kFormat: return "FormatError";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

namespace {

void CheckIterateDims(const BoxQp& prob, const Iterate& it) {
  Require(it.x.size() == prob.n() && it.z.size() == prob.m() &&
              it.y.size() == prob.m(),
          ErrorKind::kDimensionMismatch, "iterate does not match problem");
}

}  // namespace

int BoxQp::EqualityCount() const {
  int count = 0;
  for (int i = 0; i < m(); ++i) count += IsEqualityRow(i) ? 1 : 0;
  return count;
}

void BoxQp::Validate() const {
  const int nv = n();
  const int mc = m();
  Require(Q.rows() == nv && Q.cols() == nv, ErrorKind::kDimensionMismatch,
          "Q must be n x n");
  Require(A.rows() == mc && A.cols() == nv, ErrorKind::kDimensionMismatch,
          "A must be m x n");
  Require(u.size() == mc, ErrorKind::kDimensionMismatch,
          "l and u must have length m");
  Require(Q.allFinite() && p.allFinite() && A.allFinite(),
          ErrorKind::kInvalidProblem, "Q, p and A must be finite");
  for (int i = 0; i < nv; ++i) {
    for (int j = i + 1; j < nv; ++j) {
      if (std::abs(Q(i, j) - Q(j, i)) > 1e-10) {
        std::ostringstream os;
        os << "Q is not symmetric at (" << i << "," << j << ")";
        Fail(ErrorKind::kInvalidProblem, os.str());
      }
    }
  }
  for (int i = 0; i < mc; ++i) {
    if (std::isnan(l[i]) || std::isnan(u[i]) || l[i] == kInf ||
        u[i] == -kInf || l[i] > u[i]) {
      std::ostringstream os;
      os << "invalid bounds on row " << i << ": [" << l[i] << ", " << u[i]
         << "]";
      Fail(ErrorKind::kInvalidProblem, os.str());
    }
  }
  if (nv > 0) {
    const double lambda_min = EstimateMinEigenvalue(Q, 100);
    if (lambda_min < -1e-8) {
      std::ostringstream os;
      os << "Q is not positive semidefinite (estimated eigenvalue "
         << lambda_min << ")";
      Fail(ErrorKind::kInvalidProblem, os.str());
    }
  }
}

Iterate Iterate::Zeros(int n, int m) {
  Iterate it;
  it.x = Vector::Zero(n);
  it.z = Vector::Zero(m);
  it.y = Vector::Zero(m);
  it.x_tilde = Vector::Zero(n);
  it.z_tilde = Vector::Zero(m);
  it.nu = Vector::Zero(m);
  return it;
}

bool Iterate::AllFinite() const {
  return x.allFinite() && z.allFinite() && y.allFinite() &&
         x_tilde.allFinite() && z_tilde.allFinite() && nu.allFinite();
}

double EvalObjective(const BoxQp& prob, const Vector& x) {
  Require(x.size() == prob.n(), ErrorKind::kDimensionMismatch,
          "x does not match problem");
  return 0.5 * x.dot(prob.Q * x) + prob.p.dot(x);
}

Residuals ComputeResiduals(const BoxQp& prob, const Iterate& it) {
  CheckIterateDims(prob, it);
  Residuals r;
  r.r_primal = prob.A * it.x - it.z;
  r.r_dual = prob.Q * it.x + prob.p + prob.A.transpose() * it.y;
  r.primal_norm = r.r_primal.norm();
  r.dual_norm = r.r_dual.norm();
  return r;
}

Vector ProjectBox(const Vector& v, const Vector& l, const Vector& u) {
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    // Infinite bounds are no-ops on their side.
    out[i] = std::min(std::max(v[i], l[i]), u[i]);
  }
  return out;
}

std::pair<double, double> ConstraintViolations(const BoxQp& prob,
                                               const Vector& x) {
  Require(x.size() == prob.n(), ErrorKind::kDimensionMismatch,
          "x does not match problem");
  const Vector ax = prob.A * x;
  double sum_ineq = 0.0, sum_eq = 0.0;
  int n_ineq = 0, n_eq = 0;
  for (int i = 0; i < prob.m(); ++i) {
    if (prob.IsEqualityRow(i)) {
      sum_eq += std::abs(ax[i] - prob.u[i]);
      ++n_eq;
    } else {
      double v = 0.0;
      if (std::isfinite(prob.u[i])) v += std::max(0.0, ax[i] - prob.u[i]);
      if (std::isfinite(prob.l[i])) v += std::max(0.0, prob.l[i] - ax[i]);
      sum_ineq += v;
      ++n_ineq;
    }
  }
  return {n_ineq ? sum_ineq / n_ineq : 0.0, n_eq ? sum_eq / n_eq : 0.0};
}

double StationarityViolation(const BoxQp& prob, const Iterate& it) {
  CheckIterateDims(prob, it);
  const Residuals r = ComputeResiduals(prob, it);
  double worst = 0.0;
  if (r.r_dual.size() > 0) worst = r.r_dual.lpNorm<Eigen::Infinity>();
  if (r.r_primal.size() > 0)
    worst = std::max(worst, r.r_primal.lpNorm<Eigen::Infinity>());
  for (int i = 0; i < prob.m(); ++i) {
    const double z = it.z[i], y = it.y[i];
    const double lo = prob.l[i], hi = prob.u[i];
    double v;
    if (prob.IsEqualityRow(i)) {
      v = 0.0;
    } else if (std::isfinite(lo) && std::abs(z - lo) <= kBoundTol) {
      v = std::max(0.0, y);
    } else if (std::isfinite(hi) && std::abs(z - hi) <= kBoundTol) {
      v = std::max(0.0, -y);
    } else {
      v = std::abs(y);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

double EstimateMinEigenvalue(const Matrix& S, int iterations) {
  const Eigen::Index n = S.rows();
  if (n == 0) return 0.0;
  // Deterministic, non-degenerate start vector.
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = 1.0 + 0.1 * std::sin(1.0 + i);
  v.normalize();

  auto rayleigh_power = [&](auto apply) {
    Vector w = v;
    double lambda = 0.0;
    for (int k = 0; k < iterations; ++k) {
      Vector next = apply(w);
      lambda = w.dot(next);
      const double nrm = next.norm();
      if (nrm == 0.0) break;
      w = next / nrm;
    }
    return lambda;
  };

  // Largest-magnitude bound first, then the top of (shift*I - S).
  const double shift =
      S.cwiseAbs().rowwise().sum().maxCoeff();  // Gershgorin bound
  const double top = rayleigh_power(
      [&](const Vector& w) -> Vector { return shift * w - S * w; });
  return shift - top;
}

}  // namespace iadmm
