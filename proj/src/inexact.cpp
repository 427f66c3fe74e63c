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

#include "iadmm/inexact.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

#include "iadmm/error.hpp"

namespace iadmm {

namespace {

constexpr double kConditionSlack = 1e-12;

void CheckConstantInputs(const SpectralEstimates& spec, double rho, double c_x,
                         double c_z, double delta, double tau) {
  Require(rho > 0.0 && c_x > 0.0 && c_z > 0.0, ErrorKind::kInvalidArgument,
          "rho, c_x and c_z must be positive");
  Require(0.0 < tau && tau < delta && delta < 1.0,
          ErrorKind::kInvalidArgument, "need 0 < tau < delta < 1");
  Require(spec.sigma_ata_min > 0.0, ErrorKind::kInvalidArgument,
          "sigma_min(A'A) must be positive");
}

}  // namespace

InexactConstants ComputeConstants(const SpectralEstimates& spec, double rho,
                                  double c_x, double c_z, double delta,
                                  double tau) {
  CheckConstantInputs(spec, rho, c_x, c_z, delta, tau);
  InexactConstants c;
  c.c_x = c_x;
  c.c_z = c_z;
  c.delta = delta;
  c.tau = tau;
  c.rho = rho;
  c.spectral = spec;
  const double q = spec.sigma_q_max / rho;
  const double bracket =
      (2.0 * (q + c_x) * (q + c_x) + 8.0 * c_x * c_x) / spec.sigma_ata_min;
  c.beta_x = 2.0 * (1.0 + tau) / (1.0 - tau) * bracket;
  c.beta_z = 32.0 * (1.0 + tau) * spec.kappa_ata / (1.0 - tau);
  c.margin_x_tilde = c.beta_x * (1.0 - tau) / (2.0 * (1.0 + tau)) - bracket;
  c.margin_x_hat =
      (delta - tau) / (1.0 + tau) - 8.0 * q * q / spec.sigma_ata_min;
  c.margin_z =
      c.beta_z * (1.0 - tau) / (2.0 * (1.0 + tau)) - 16.0 * spec.kappa_ata;
  return c;
}

InexactConstants DeriveConstants(const SpectralEstimates& spec, double rho,
                                 double c_x, double c_z, double delta,
                                 double tau) {
  InexactConstants c = ComputeConstants(spec, rho, c_x, c_z, delta, tau);
  if (c.margin_x_hat < 0.0)
    Fail(ErrorKind::kInfeasibleConstants,
         "rho too small for the descent requirement at this delta and tau");
  return c;
}

double EffectiveRho(const Vector& rho) {
  if (rho.size() == 0) return 1.0;
  return std::exp(rho.array().log().mean());
}

double AugmentedLagrangian(const BoxQp& prob, const Vector& x, const Vector& z,
                           const Vector& y, const Vector& rho) {
  for (int i = 0; i < prob.m(); ++i)
    if (z[i] < prob.l[i] - kBoundTol || z[i] > prob.u[i] + kBoundTol)
      return kInf;
  const Vector r = prob.A * x - z;
  return EvalObjective(prob, x) + y.dot(r) +
         0.5 * r.cwiseProduct(rho).dot(r);
}

double AugmentedLagrangian(const BoxQp& prob, const Vector& x, const Vector& z,
                           const Vector& y, double rho) {
  return AugmentedLagrangian(prob, x, z, y, Vector::Constant(prob.m(), rho));
}

Vector MinimalNormSubgradient(const BoxQp& prob, const Vector& z,
                              const Vector& s) {
  Vector out = s;
  for (int i = 0; i < prob.m(); ++i) {
    if (prob.IsEqualityRow(i)) {
      out[i] = 0.0;
      continue;
    }
    const bool at_lower =
        std::isfinite(prob.l[i]) && z[i] <= prob.l[i] + kBoundTol;
    const bool at_upper =
        std::isfinite(prob.u[i]) && z[i] >= prob.u[i] - kBoundTol;
    // N at the lower bound is (-inf, 0], at the upper bound [0, inf).
    if (at_lower && s[i] > 0.0) out[i] = 0.0;
    if (at_upper && s[i] < 0.0) out[i] = 0.0;
  }
  return out;
}

namespace {

bool Holds(double lhs, double rhs) {
  // An infinite left side (iterate outside the box) is a violation.
  return std::isfinite(lhs) && lhs <= rhs + kConditionSlack;
}

}  // namespace

ConditionReport CheckConditions(const BoxQp& prob, const Iterate& prev,
                                const Iterate& cur,
                                const InexactConstants& consts,
                                const Vector& rho) {
  const double rho_s = EffectiveRho(rho);
  const Vector dxt = cur.x_tilde - prev.x;
  const Vector dz = cur.z - prev.z;
  const Vector dxh = cur.x - cur.x_tilde;
  const Vector Axt = prob.A * cur.x_tilde;

  ConditionReport r;
  const double L_prev = AugmentedLagrangian(prob, prev.x, prev.z, prev.y, rho);
  const double L_xt = AugmentedLagrangian(prob, cur.x_tilde, prev.z, prev.y, rho);
  r.lhs11 = L_xt + 0.5 * rho_s * consts.beta_x * dxt.squaredNorm();
  r.rhs11 = L_prev;

  const Vector xi_x = prob.Q * cur.x_tilde + prob.p +
                      prob.A.transpose() *
                          (prev.y + rho.cwiseProduct(Axt - prev.z));
  r.lhs12 = xi_x.norm();
  r.rhs12 = consts.c_x * rho_s * dxt.norm();

  const double L_z = AugmentedLagrangian(prob, cur.x_tilde, cur.z, prev.y, rho);
  r.lhs13 = L_z + 0.5 * rho_s * consts.beta_z * dz.squaredNorm();
  r.rhs13 = L_xt;

  const Vector smooth = -prev.y - rho.cwiseProduct(Axt - cur.z);
  r.lhs14 = MinimalNormSubgradient(prob, cur.z, smooth).norm();
  r.rhs14 = consts.c_z * rho_s * (dz.norm() + dxt.norm());

  r.lhs15 = AugmentedLagrangian(prob, cur.x, cur.z, cur.y, rho);
  r.rhs15 = AugmentedLagrangian(prob, cur.x_tilde, cur.z, cur.y, rho) -
            consts.delta * rho_s * dxh.squaredNorm();

  r.composite_R = dxt.norm() + dz.norm() + (Axt - cur.z).norm();
  r.satisfied = {Holds(r.lhs11, r.rhs11), Holds(r.lhs12, r.rhs12),
                 Holds(r.lhs13, r.rhs13), Holds(r.lhs14, r.rhs14),
                 Holds(r.lhs15, r.rhs15)};
  return r;
}

EnergyState EnergyStep(const BoxQp& prob, const Iterate& prev,
                       const Iterate& cur, const InexactConstants& consts,
                       const Vector& rho) {
  const double rho_s = EffectiveRho(rho);
  const SpectralEstimates& sp = consts.spectral;
  const double tau = consts.tau;
  EnergyState e;
  e.d_x_tilde = cur.x_tilde - prev.x;
  e.d_x_hat = cur.x - cur.x_tilde;
  e.d_z = cur.z - prev.z;
  e.d_y = cur.y - prev.y;
  e.Gamma_tilde = 8.0 * (1.0 + tau) * consts.c_x * consts.c_x * rho_s /
                      sp.sigma_ata_min * e.d_x_tilde.squaredNorm() +
                  8.0 * (1.0 + tau) * rho_s * sp.kappa_ata *
                      e.d_z.squaredNorm();
  e.Gamma = e.Gamma_tilde + 8.0 * (1.0 + tau) * sp.sigma_q_max *
                                sp.sigma_q_max / (rho_s * sp.sigma_ata_min) *
                                e.d_x_hat.squaredNorm();
  e.L_rho = AugmentedLagrangian(prob, cur.x, cur.z, cur.y, rho);
  e.E = e.L_rho + e.Gamma;
  e.E_tilde =
      AugmentedLagrangian(prob, cur.x_tilde, cur.z, cur.y, rho) + e.Gamma_tilde;
  return e;
}

namespace {

using Clock = std::chrono::steady_clock;

// ||(I - A A^+) v|| <= 1e-8 ||v||.
bool InRange(const Matrix& projector, const Vector& v) {
  const double nv = v.norm();
  if (nv == 0.0) return true;
  return (v - projector * v).norm() <= 1e-8 * nv;
}

struct XStep {
  Vector x_tilde;
  int iterations = 0;
  bool capped = false;
};

}  // namespace

InexactResult RunInexactAdmm(const BoxQp& prob, const AdmmSettings& settings,
                             const InexactConstants& consts,
                             const InnerSolverConfig& inner, double eps_tol,
                             const std::optional<Iterate>& warm) {
  settings.Validate(prob.m());
  Require(eps_tol >= 0.0, ErrorKind::kInvalidArgument,
          "eps_tol must be non-negative");
  Require(inner.batch >= 1 && inner.cap_factor >= 1,
          ErrorKind::kInvalidArgument, "invalid inner solver configuration");
  const auto t0 = Clock::now();
  const int n = prob.n(), m = prob.m();
  const Vector& rho = settings.rho;
  const double rho_s = EffectiveRho(rho);
  const double sigma = settings.sigma;
  const int cap = inner.cap_factor * n;

  InexactResult result;
  result.constants = consts;
  Iterate it = Iterate::Zeros(n, m);
  if (warm) {
    Require(warm->x.size() == n && warm->z.size() == m && warm->y.size() == m,
            ErrorKind::kDimensionMismatch, "warm start does not match problem");
    it.x = warm->x;
    it.z = warm->z;
    it.y = warm->y;
  }
  // The indicator needs a feasible z.
  it.z = ProjectBox(it.z, prob.l, prob.u);

  Matrix projector;
  if (m > 0) projector = prob.A * PseudoInverse(prob.A);

  const LinearOperator op = [&](const Vector& v) {
    Vector out = prob.Q * v + sigma * v;
    out.noalias() += prob.A.transpose() * rho.cwiseProduct(prob.A * v);
    return out;
  };
  auto gradient_condition = [&](const Iterate& at, const Vector& xt) {
    const Vector xi = prob.Q * xt + prob.p +
                      prob.A.transpose() *
                          (at.y + rho.cwiseProduct(prob.A * xt - at.z));
    return xi.norm() <= consts.c_x * rho_s * (xt - at.x).norm();
  };

  result.status = SolveStatus::kMaxIterExceeded;
  int k = 0;
  while (k < settings.max_iter) {
    // x-subproblem.
    const Vector rhs = sigma * it.x - prob.p +
                       prob.A.transpose() * (rho.cwiseProduct(it.z) - it.y);
    ConjugateGradient cg(op, rhs, it.x);
    XStep xs;
    if (inner.fixed_tolerance > 0.0) {
      cg.Run(cap, inner.fixed_tolerance);
      xs.capped = cg.residual_norm() > inner.fixed_tolerance * cg.rhs_norm();
    } else {
      bool ok = false;
      while (cg.total_iterations() < cap) {
        const int ran =
            cg.Run(std::min(inner.batch, cap - cg.total_iterations()), 1e-15);
        if (gradient_condition(it, cg.solution())) {
          ok = true;
          break;
        }
        if (ran == 0 || cg.residual_norm() <= 1e-15 * cg.rhs_norm()) break;
      }
      xs.capped = !ok;
    }
    xs.x_tilde = cg.solution();
    xs.iterations = cg.total_iterations();
    result.total_cg_iterations += xs.iterations;

    Iterate next;
    next.x_tilde = xs.x_tilde;
    next.nu = rho.cwiseProduct(prob.A * next.x_tilde - it.z) + it.y;
    FinishStep(prob, rho, 1.0, it, next);

    double alpha = settings.alpha;
    if (inner.line_search) {
      for (double a : {1.6, 1.4, 1.2, 1.0}) {
        alpha = a;
        const Vector x_cand = a * next.x_tilde + (1.0 - a) * it.x;
        const double lhs =
            AugmentedLagrangian(prob, x_cand, next.z, next.y, rho);
        const double rhs =
            AugmentedLagrangian(prob, next.x_tilde, next.z, next.y, rho) -
            consts.delta * rho_s * (x_cand - next.x_tilde).squaredNorm();
        if (Holds(lhs, rhs)) break;
      }
    }
    next.x = alpha * next.x_tilde + (1.0 - alpha) * it.x;
    if (!next.AllFinite())
      Fail(ErrorKind::kNonFinite,
           "inexact step " + std::to_string(k + 1) + " is not finite");

    TraceRow row;
    row.k = k + 1;
    row.report = CheckConditions(prob, it, next, consts, rho);
    row.energy = EnergyStep(prob, it, next, consts, rho);
    row.alpha = alpha;
    row.cg_iterations = xs.iterations;
    row.cg_capped = xs.capped;
    if (xs.capped) row.report.satisfied[1] = false;
    if (m > 0 && k % 10 == 0 && !InRange(projector, next.y - it.y))
      ++result.range_violations;
    result.trace.push_back(std::move(row));

    it = std::move(next);
    ++k;
    if (result.trace.back().report.composite_R <= eps_tol) {
      result.status = SolveStatus::kConverged;
      break;
    }
  }
  result.iterate = it;
  result.metrics.iteration_count = k;
  result.metrics.factorization_count = 0;
  result.metrics.wall_time_seconds =
      std::chrono::duration<double>(Clock::now() - t0).count();
  FillMetrics(prob, it, result.metrics);
  return result;
}

void WriteTraceCsv(std::ostream& out, const std::vector<TraceRow>& trace,
                   const std::vector<std::string>& header_notes) {
  for (const std::string& note : header_notes) out << "# " << note << '\n';
  out << "k,lhs11,rhs11,lhs12,rhs12,lhs13,rhs13,lhs14,rhs14,lhs15,rhs15,R,E,"
         "E_tilde,L_rho\n";
  const auto old_precision = out.precision(17);
  for (const TraceRow& row : trace) {
    const ConditionReport& r = row.report;
    out << row.k << ',' << r.lhs11 << ',' << r.rhs11 << ',' << r.lhs12 << ','
        << r.rhs12 << ',' << r.lhs13 << ',' << r.rhs13 << ',' << r.lhs14 << ','
        << r.rhs14 << ',' << r.lhs15 << ',' << r.rhs15 << ',' << r.composite_R
        << ',' << row.energy.E << ',' << row.energy.E_tilde << ','
        << row.energy.L_rho << '\n';
  }
  out.precision(old_precision);
}

std::vector<TraceRow> MonitorTrajectory(const BoxQp& prob,
                                        const std::vector<Iterate>& trajectory,
                                        const std::vector<Vector>& rho,
                                        const InexactConstants& consts) {
  Require(trajectory.size() == rho.size() + 1, ErrorKind::kDimensionMismatch,
          "need one penalty vector per step");
  std::vector<TraceRow> trace;
  trace.reserve(rho.size());
  for (std::size_t k = 0; k < rho.size(); ++k) {
    const InexactConstants step_consts =
        ComputeConstants(consts.spectral, EffectiveRho(rho[k]), consts.c_x,
                         consts.c_z, consts.delta, consts.tau);
    TraceRow row;
    row.k = static_cast<int>(k) + 1;
    row.report = CheckConditions(prob, trajectory[k], trajectory[k + 1],
                                 step_consts, rho[k]);
    row.energy = EnergyStep(prob, trajectory[k], trajectory[k + 1],
                            step_consts, rho[k]);
    trace.push_back(std::move(row));
  }
  return trace;
}

}  // namespace iadmm
