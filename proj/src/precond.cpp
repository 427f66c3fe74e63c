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

#include "iadmm/precond.hpp"

#include <cmath>

#include "iadmm/error.hpp"

namespace iadmm {

namespace {

// Positive scalings keep +-inf bounds unchanged.
Vector ScaleBounds(const Vector& v, const Vector& e) {
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out[i] = std::isfinite(v[i]) ? e[i] * v[i] : v[i];
  return out;
}

double InvSqrtOrOne(double norm) {
  return norm > 0.0 ? 1.0 / std::sqrt(norm) : 1.0;
}

}  // namespace

ScalingState ScalingState::Identity(int n, int m) {
  ScalingState s;
  s.D = Vector::Ones(n);
  s.E = Vector::Ones(m);
  return s;
}

ScalingState RuizEquilibrate(const BoxQp& prob, int max_iter) {
  Require(max_iter >= 1, ErrorKind::kInvalidArgument,
          "Ruiz equilibration needs at least one sweep");
  const int n = prob.n(), m = prob.m();
  ScalingState s = ScalingState::Identity(n, m);
  Matrix Q = prob.Q;
  Vector p = prob.p;
  Matrix A = prob.A;

  for (int k = 0; k < max_iter; ++k) {
    // Row inf-norms of M = [[Q, A'], [A, 0]].
    Vector delta_d(n), delta_e(m);
    for (int i = 0; i < n; ++i) {
      double nrm = n > 0 ? Q.row(i).cwiseAbs().maxCoeff() : 0.0;
      if (m > 0) nrm = std::max(nrm, A.col(i).cwiseAbs().maxCoeff());
      delta_d[i] = InvSqrtOrOne(nrm);
    }
    for (int i = 0; i < m; ++i) {
      const double nrm = n > 0 ? A.row(i).cwiseAbs().maxCoeff() : 0.0;
      delta_e[i] = InvSqrtOrOne(nrm);
    }

    Q = delta_d.asDiagonal() * Q * delta_d.asDiagonal();
    p = delta_d.cwiseProduct(p);
    A = delta_e.asDiagonal() * A * delta_d.asDiagonal();

    double mean_col = 0.0;
    if (n > 0) mean_col = Q.cwiseAbs().colwise().maxCoeff().mean();
    const double p_inf = n > 0 ? p.lpNorm<Eigen::Infinity>() : 0.0;
    const double denom = std::max(mean_col, p_inf);
    const double gamma = denom > 0.0 ? 1.0 / denom : 1.0;
    Q *= gamma;
    p *= gamma;

    s.D = delta_d.cwiseProduct(s.D);
    s.E = delta_e.cwiseProduct(s.E);
    s.c *= gamma;
    s.iterations_run = k + 1;
  }
  return s;
}

BoxQp ScaleProblem(const BoxQp& prob, const ScalingState& s) {
  Require(s.D.size() == prob.n() && s.E.size() == prob.m(),
          ErrorKind::kDimensionMismatch, "scaling does not match problem");
  BoxQp out;
  out.Q = s.c * (s.D.asDiagonal() * prob.Q * s.D.asDiagonal());
  out.p = s.c * s.D.cwiseProduct(prob.p);
  out.A = s.E.asDiagonal() * prob.A * s.D.asDiagonal();
  out.l = ScaleBounds(prob.l, s.E);
  out.u = ScaleBounds(prob.u, s.E);
  return out;
}

BoxQp UnscaleProblem(const BoxQp& scaled, const ScalingState& s) {
  Require(s.D.size() == scaled.n() && s.E.size() == scaled.m(),
          ErrorKind::kDimensionMismatch, "scaling does not match problem");
  const Vector d_inv = s.D.cwiseInverse();
  const Vector e_inv = s.E.cwiseInverse();
  BoxQp out;
  out.Q = (d_inv.asDiagonal() * scaled.Q * d_inv.asDiagonal()) / s.c;
  out.p = d_inv.cwiseProduct(scaled.p) / s.c;
  out.A = e_inv.asDiagonal() * scaled.A * d_inv.asDiagonal();
  out.l = ScaleBounds(scaled.l, e_inv);
  out.u = ScaleBounds(scaled.u, e_inv);
  return out;
}

Iterate UnscaleSolution(const Iterate& it, const ScalingState& s) {
  Iterate out;
  out.x = s.D.cwiseProduct(it.x);
  out.x_tilde = s.D.cwiseProduct(it.x_tilde);
  out.z = it.z.cwiseQuotient(s.E);
  out.z_tilde = it.z_tilde.cwiseQuotient(s.E);
  out.y = s.E.cwiseProduct(it.y) / s.c;
  out.nu = s.E.cwiseProduct(it.nu) / s.c;
  return out;
}

Iterate ScaleSolution(const Iterate& it, const ScalingState& s) {
  Iterate out;
  out.x = it.x.cwiseQuotient(s.D);
  out.x_tilde = it.x_tilde.cwiseQuotient(s.D);
  out.z = s.E.cwiseProduct(it.z);
  out.z_tilde = s.E.cwiseProduct(it.z_tilde);
  out.y = s.c * it.y.cwiseQuotient(s.E);
  out.nu = s.c * it.nu.cwiseQuotient(s.E);
  return out;
}

Matrix KktMatrix(const BoxQp& prob) {
  const int n = prob.n(), m = prob.m();
  Matrix M = Matrix::Zero(n + m, n + m);
  M.topLeftCorner(n, n) = prob.Q;
  M.topRightCorner(n, m) = prob.A.transpose();
  M.bottomLeftCorner(m, n) = prob.A;
  return M;
}

PreparedProblem Prepare(const BoxQp& prob, int ruiz_iter) {
  PreparedProblem out;
  out.original = prob;
  out.scaling = RuizEquilibrate(prob, ruiz_iter);
  out.scaled = ScaleProblem(prob, out.scaling);
  return out;
}

}  // namespace iadmm
