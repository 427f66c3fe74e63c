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

#ifndef IADMM_INEXACT_HPP_
#define IADMM_INEXACT_HPP_

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "iadmm/admm.hpp"
#include "iadmm/linalg.hpp"
#include "iadmm/qp.hpp"

namespace iadmm {

struct InexactConstants {
  double c_x = 1.0;
  double c_z = 1.0;
  double delta = 0.9;
  double tau = 0.1;
  double beta_x = 0.0;
  double beta_z = 0.0;
  // Margins of the three descent requirements on beta_x, rho and beta_z;
  // the proposition applies when all three are >= 0.
  double margin_x_tilde = 0.0;
  double margin_x_hat = 0.0;
  double margin_z = 0.0;
  double rho = 0.0;
  SpectralEstimates spectral;

  bool MarginsHold(double slack = 1e-12) const {
    return margin_x_tilde >= -slack && margin_x_hat >= -slack &&
           margin_z >= -slack;
  }
};

// beta_x = 2(1+tau)/(1-tau) * (2 (sigma_Q/rho + c_x)^2 + 8 c_x^2) / sigma_min
// beta_z = 32 (1+tau) kappa / (1-tau), with the three margins recorded.
// Never throws on a negative margin.
InexactConstants ComputeConstants(const SpectralEstimates& spec, double rho,
                                  double c_x = 1.0, double c_z = 1.0,
                                  double delta = 0.9, double tau = 0.1);

// As ComputeConstants, but throws kInfeasibleConstants when the rho margin
// (delta - tau)/(1 + tau) - 8 (sigma_Q/rho)^2 / sigma_min is negative.
InexactConstants DeriveConstants(const SpectralEstimates& spec, double rho,
                                 double c_x = 1.0, double c_z = 1.0,
                                 double delta = 0.9, double tau = 0.1);

// Geometric mean of the diagonal penalties; 1 when there are no rows.
double EffectiveRho(const Vector& rho);

// f(x) + y'(Ax - z) + 1/2 ||Ax - z||^2_rho, or +inf when z leaves [l, u] by
// more than 1e-9.
double AugmentedLagrangian(const BoxQp& prob, const Vector& x, const Vector& z,
                           const Vector& y, const Vector& rho);
double AugmentedLagrangian(const BoxQp& prob, const Vector& x, const Vector& z,
                           const Vector& y, double rho);

struct ConditionReport {
  double lhs11 = 0.0, rhs11 = 0.0;
  double lhs12 = 0.0, rhs12 = 0.0;
  double lhs13 = 0.0, rhs13 = 0.0;
  double lhs14 = 0.0, rhs14 = 0.0;
  double lhs15 = 0.0, rhs15 = 0.0;
  double composite_R = 0.0;
  std::array<bool, 5> satisfied{};

  bool AllSatisfied() const {
    for (bool s : satisfied)
      if (!s) return false;
    return true;
  }
};

// Minimal-norm element of N_[l,u](z) + s, coordinate-wise.
Vector MinimalNormSubgradient(const BoxQp& prob, const Vector& z,
                              const Vector& s);

// Evaluates the five inexactness inequalities for the step prev -> cur.
// Diagonal rho enters the augmented Lagrangian and the gradients; the scalar
// bounds use EffectiveRho(rho).
ConditionReport CheckConditions(const BoxQp& prob, const Iterate& prev,
                                const Iterate& cur,
                                const InexactConstants& consts,
                                const Vector& rho);

struct EnergyState {
  double L_rho = 0.0;
  double E = 0.0;
  double E_tilde = 0.0;
  double Gamma = 0.0;
  double Gamma_tilde = 0.0;
  Vector d_x_tilde;  // x_tilde^{k+1} - x^k
  Vector d_x_hat;    // x^{k+1} - x_tilde^{k+1}
  Vector d_z;        // z^{k+1} - z^k
  Vector d_y;        // y^{k+1} - y^k
};

// Energies of step prev -> cur. Gamma terms come from the differences of this
// same step.
EnergyState EnergyStep(const BoxQp& prob, const Iterate& prev,
                       const Iterate& cur, const InexactConstants& consts,
                       const Vector& rho);

struct InnerSolverConfig {
  int batch = 10;
  // Cap on CG iterations per outer step, as a multiple of n.
  int cap_factor = 50;
  // When > 0, CG runs to this relative residual instead of being gated by
  // the gradient condition.
  double fixed_tolerance = 0.0;
  // Backtracking over {1.6, 1.4, 1.2, 1.0}; when false settings.alpha is used.
  bool line_search = true;
};

struct TraceRow {
  int k = 0;
  ConditionReport report;
  EnergyState energy;
  double alpha = 0.0;
  int cg_iterations = 0;
  bool cg_capped = false;
};

struct InexactResult {
  Iterate iterate;
  SolveMetrics metrics;
  SolveStatus status = SolveStatus::kConverged;
  std::vector<TraceRow> trace;
  InexactConstants constants;
  int range_violations = 0;
  long total_cg_iterations = 0;
};

// Inexact ADMM: the x-subproblem is solved by CG on the reduced system
// (Q + sigma I + A' diag(rho) A) x = sigma x^k - p + A'(rho z^k - y^k) until
// the gradient condition holds, then z, y and a line-searched relaxation
// follow. Stops when R^{k+1} <= eps_tol.
InexactResult RunInexactAdmm(const BoxQp& prob, const AdmmSettings& settings,
                             const InexactConstants& consts,
                             const InnerSolverConfig& inner, double eps_tol,
                             const std::optional<Iterate>& warm = std::nullopt);

// CSV with columns k, lhs11, rhs11, ..., lhs15, rhs15, R, E, E_tilde, L_rho,
// preceded by one '#' comment line per entry of `header_notes`.
void WriteTraceCsv(std::ostream& out, const std::vector<TraceRow>& trace,
                   const std::vector<std::string>& header_notes = {});

// Trace of an arbitrary trajectory (e.g. a learned unroll): rho[k] is the
// penalty used to produce trajectory[k + 1].
std::vector<TraceRow> MonitorTrajectory(const BoxQp& prob,
                                        const std::vector<Iterate>& trajectory,
                                        const std::vector<Vector>& rho,
                                        const InexactConstants& consts);

}  // namespace iadmm

#endif  // IADMM_INEXACT_HPP_
