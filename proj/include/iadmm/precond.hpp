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

#ifndef IADMM_PRECOND_HPP_
#define IADMM_PRECOND_HPP_

#include "iadmm/qp.hpp"

namespace iadmm {

/**
 * Diagonal scaling of a QP. The scaled problem is
 *
 *   Qs = c D Q D,  ps = c D p,  As = E A D,  ls = E l,  us = E u,
 *
 * and a scaled primal point xs corresponds to x = D xs.
 */
struct ScalingState {
  Vector D;  // n diagonal entries
  Vector E;  // m diagonal entries
  double c = 1.0;
  int iterations_run = 0;

  static ScalingState Identity(int n, int m);
};

// Modified Ruiz equilibration. Each sweep scales the rows of
// M = [[Q, A'], [A, 0]] by 1/sqrt(||M_i||_inf) (1 for zero rows), then
// rescales the cost by 1 / max(mean column inf-norm of Q, ||p||_inf).
ScalingState RuizEquilibrate(const BoxQp& prob, int max_iter = 10);

BoxQp ScaleProblem(const BoxQp& prob, const ScalingState& s);
BoxQp UnscaleProblem(const BoxQp& scaled, const ScalingState& s);

// x = D xs, z = E^-1 zs, y = E ys / c (x_tilde, z_tilde, nu follow x, z, y).
Iterate UnscaleSolution(const Iterate& it, const ScalingState& s);
Iterate ScaleSolution(const Iterate& it, const ScalingState& s);

// KKT matrix [[Q, A'], [A, 0]] of a problem, used for equilibration checks.
Matrix KktMatrix(const BoxQp& prob);

/// A problem together with its equilibrated copy.
struct PreparedProblem {
  BoxQp original;
  BoxQp scaled;
  ScalingState scaling;
};

PreparedProblem Prepare(const BoxQp& prob, int ruiz_iter = 10);

}  // namespace iadmm

#endif  // IADMM_PRECOND_HPP_
