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

#include "iadmm/admm.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

#include "iadmm/error.hpp"

namespace iadmm {

void AdmmSettings::Validate(int m) const {
  Require(rho.size() == m, ErrorKind::kDimensionMismatch,
          "rho must have one entry per constraint");
  Require((rho.array() > 0.0).all(), ErrorKind::kInvalidArgument,
          "rho must be positive");
  Require(sigma > 0.0, ErrorKind::kInvalidArgument, "sigma must be positive");
  Require(alpha > 0.0 && alpha < 2.0, ErrorKind::kInvalidArgument,
          "alpha must lie in (0, 2)");
  Require(eps_abs >= 0.0 && eps_rel >= 0.0, ErrorKind::kInvalidArgument,
          "tolerances must be non-negative");
  Require(max_iter >= 0, ErrorKind::kInvalidArgument,
          "max_iter must be non-negative");
}

Vector DefaultRho(const BoxQp& prob, double base) {
  Vector rho = Vector::Constant(prob.m(), base);
  for (int i = 0; i < prob.m(); ++i)
    if (prob.IsEqualityRow(i)) rho[i] *= kEqualityRhoBoost;
  return rho;
}

AdmmSettings DefaultSettings(const BoxQp& prob) {
  AdmmSettings s;
  s.rho = DefaultRho(prob);
  return s;
}

void FinishStep(const BoxQp& prob, const Vector& rho, double alpha,
                const Iterate& prev, Iterate& next) {
  next.z_tilde = prev.z + (next.nu - prev.y).cwiseQuotient(rho);
  next.z = ProjectBox(next.z_tilde + prev.y.cwiseQuotient(rho), prob.l,
                      prob.u);
  next.y = prev.y + rho.cwiseProduct(next.z_tilde - next.z);
  next.x = alpha * next.x_tilde + (1.0 - alpha) * prev.x;
}

Iterate AdmmStep(const BoxQp& prob, const Iterate& it,
                 const AdmmSettings& settings, const LdlFactorization& fact) {
  const int n = prob.n(), m = prob.m();
  Require(fact.dim() == n + m, ErrorKind::kDimensionMismatch,
          "factorization does not match problem");
  const Vector rhs =
      BuildKktRhs(prob, it.x, it.z, it.y, settings.rho, settings.sigma);
  const Vector sol = fact.Solve(rhs);
  Iterate next;
  next.x_tilde = sol.head(n);
  next.nu = sol.tail(m);
  FinishStep(prob, settings.rho, settings.alpha, it, next);
  if (!next.AllFinite())
    Fail(ErrorKind::kNonFinite, "ADMM step produced a non-finite iterate");
  return next;
}

bool ResidualsConverged(const BoxQp& prob, const Iterate& it,
                        const Residuals& r, double eps_abs, double eps_rel) {
  const double ax = (prob.A * it.x).norm();
  const double prim_scale = std::max(ax, it.z.norm());
  const double dual_scale =
      std::max({(prob.Q * it.x).norm(), (prob.A.transpose() * it.y).norm(),
                prob.p.norm()});
  return r.primal_norm <= eps_abs + eps_rel * prim_scale &&
         r.dual_norm <= eps_abs + eps_rel * dual_scale;
}

void FillMetrics(const BoxQp& prob, const Iterate& it, SolveMetrics& metrics) {
  metrics.objective = EvalObjective(prob, it.x);
  const auto [ineq, eq] = ConstraintViolations(prob, it.x);
  metrics.mean_ineq_violation = ineq;
  metrics.mean_eq_violation = eq;
}

namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Iterate CheckedWarmStart(const BoxQp& prob,
                         const std::optional<Iterate>& warm) {
  Iterate it = Iterate::Zeros(prob.n(), prob.m());
  if (!warm) return it;
  Require(warm->x.size() == prob.n() && warm->z.size() == prob.m() &&
              warm->y.size() == prob.m(),
          ErrorKind::kDimensionMismatch, "warm start does not match problem");
  it.x = warm->x;
  it.z = warm->z;
  it.y = warm->y;
  return it;
}

}  // namespace

SolveResult SolveExact(const BoxQp& prob, const AdmmSettings& settings,
                       const std::optional<Iterate>& warm) {
  settings.Validate(prob.m());
  const auto start = Clock::now();
  SolveResult result;
  Iterate it = CheckedWarmStart(prob, warm);

  const LdlFactorization fact(BuildKkt(prob, settings.rho, settings.sigma));
  result.metrics.factorization_count = 1;

  Iterate best = it;
  double best_score = kInf;
  result.status = SolveStatus::kMaxIterExceeded;
  int k = 0;
  while (k < settings.max_iter) {
    it = AdmmStep(prob, it, settings, fact);
    ++k;
    const Residuals r = ComputeResiduals(prob, it);
    result.residual_history.emplace_back(r.primal_norm, r.dual_norm);
    const double score = std::max(r.primal_norm, r.dual_norm);
    if (score < best_score) {
      best_score = score;
      best = it;
    }
    if (ResidualsConverged(prob, it, r, settings.eps_abs, settings.eps_rel)) {
      result.status = SolveStatus::kConverged;
      break;
    }
  }
  if (settings.max_iter == 0) result.status = SolveStatus::kConverged;
  result.iterate = result.status == SolveStatus::kConverged ? it : best;
  result.metrics.iteration_count = k;
  result.metrics.wall_time_seconds = Seconds(start);
  FillMetrics(prob, result.iterate, result.metrics);
  return result;
}

SolveResult RestoreFeasibility(const BoxQp& prob, const Iterate& start,
                               const Vector& rho_frozen, int iters,
                               double sigma, double alpha) {
  Require(iters >= 0, ErrorKind::kInvalidArgument,
          "restoration iterations must be non-negative");
  AdmmSettings settings;
  settings.rho = rho_frozen;
  settings.sigma = sigma;
  settings.alpha = alpha;
  settings.Validate(prob.m());

  const auto t0 = Clock::now();
  SolveResult result;
  Iterate it = CheckedWarmStart(prob, start);
  it.x_tilde = start.x_tilde.size() == prob.n() ? start.x_tilde : it.x;
  it.z_tilde = start.z_tilde.size() == prob.m() ? start.z_tilde : it.z;
  it.nu = start.nu.size() == prob.m() ? start.nu : it.y;
  if (iters > 0) {
    const LdlFactorization fact(BuildKkt(prob, rho_frozen, sigma));
    result.metrics.factorization_count = 1;
    for (int k = 0; k < iters; ++k) {
      it = AdmmStep(prob, it, settings, fact);
      const Residuals r = ComputeResiduals(prob, it);
      result.residual_history.emplace_back(r.primal_norm, r.dual_norm);
    }
  }
  result.iterate = it;
  result.metrics.iteration_count = iters;
  result.metrics.wall_time_seconds = Seconds(t0);
  FillMetrics(prob, it, result.metrics);
  return result;
}

}  // namespace iadmm
