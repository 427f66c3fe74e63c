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

#ifndef IADMM_ADMM_HPP_
#define IADMM_ADMM_HPP_

#include <optional>
#include <vector>

#include "iadmm/linalg.hpp"
#include "iadmm/qp.hpp"

namespace iadmm {

inline constexpr double kEqualityRhoBoost = 1e3;

struct AdmmSettings {
  /// per-row penalties, all > 0
  Vector rho;
  /// proximal weight on ||x - x^k||^2
  double sigma = 1e-6;
  /// relaxation of the x update, in (0, 2)
  double alpha = 1.6;
  double eps_abs = 1e-6;
  double eps_rel = 1e-6;
  int max_iter = 20000;

  void Validate(int m) const;
};

// rho_i = base on inequality rows and 1e3 * base on equality rows.
Vector DefaultRho(const BoxQp& prob, double base = 0.1);
AdmmSettings DefaultSettings(const BoxQp& prob);

enum class SolveStatus { kConverged, kMaxIterExceeded };

struct SolveResult {
  Iterate iterate;
  SolveMetrics metrics;
  SolveStatus status = SolveStatus::kConverged;
  // (primal_norm, dual_norm) after every iteration.
  std::vector<std::pair<double, double>> residual_history;
};

// One iteration through the condensed system: solve for (x_tilde, nu),
// z_tilde = z + (nu - y) / rho, z = P(z_tilde + y / rho),
// y += rho (z_tilde - z), x = alpha x_tilde + (1 - alpha) x.
Iterate AdmmStep(const BoxQp& prob, const Iterate& it,
                 const AdmmSettings& settings, const LdlFactorization& fact);

// The z/y/x updates shared by every engine once x_tilde and nu are known.
void FinishStep(const BoxQp& prob, const Vector& rho, double alpha,
                const Iterate& prev, Iterate& next);

bool ResidualsConverged(const BoxQp& prob, const Iterate& it,
                        const Residuals& r, double eps_abs, double eps_rel);

// Runs AdmmStep to the combined absolute/relative tolerance with a single
// factorization. On the iteration limit the best iterate seen (smallest
// max(primal_norm, dual_norm)) is returned with kMaxIterExceeded.
SolveResult SolveExact(const BoxQp& prob, const AdmmSettings& settings,
                       const std::optional<Iterate>& warm = std::nullopt);

// Stage-II restoration: exactly `iters` exact steps with frozen rho and one
// factorization.
SolveResult RestoreFeasibility(const BoxQp& prob, const Iterate& start,
                               const Vector& rho_frozen, int iters = 20,
                               double sigma = 1e-6, double alpha = 1.6);

void FillMetrics(const BoxQp& prob, const Iterate& it, SolveMetrics& metrics);

}  // namespace iadmm

#endif  // IADMM_ADMM_HPP_
