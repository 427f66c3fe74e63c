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

#ifndef IADMM_TRAINING_HPP_
#define IADMM_TRAINING_HPP_

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "iadmm/lstm.hpp"
#include "iadmm/precond.hpp"

namespace iadmm {

struct TrainConfig {
  double learning_rate = 5e-5;
  int batch_size = 2;
  int patience = 50;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int max_epochs = 300;
  /// early stopping is only allowed while validation violations stay below
  double violation_tolerance = std::numeric_limits<double>::infinity();
  double clip_norm = 10.0;
  std::uint64_t seed = 0;
  /// worker threads for per-instance gradients; 0 picks the hardware count
  int threads = 1;

  void Validate() const;
};

struct AdamState {
  LstmModel m;
  LstmModel v;
  long step = 0;

  static AdamState ZerosLike(const LstmModel& model);
};

// theta -= lr * m_hat / (sqrt(v_hat) + eps) for every tensor.
void AdamUpdate(const TrainConfig& cfg, const LstmModel& grad,
                LstmModel& model, AdamState& state);

double GlobalNorm(const LstmModel& grad);
// Scales `grad` in place so its global norm is at most `max_norm`. Returns
// the norm before clipping.
double ClipGlobalNorm(LstmModel& grad, double max_norm);

// (1/K) sum_{k=1..K} (||r_prim^k|| + ||r_dual^k||) where residuals[0] is the
// initial point.
double InstanceLoss(const std::vector<Residuals>& residuals);
double InstanceLoss(const std::vector<std::pair<double, double>>& norms);

struct GradientResult {
  double loss = 0.0;
  LstmModel grad;
};

// Mean loss and its gradient over a batch of preconditioned problems.
// Segments of length T are differentiated independently; the carried state
// crosses segment boundaries without gradient. `T_override` > 0 replaces
// model.config.T. Throws kNonFinite naming the offending tensor.
GradientResult BackwardTbptt(const std::vector<const BoxQp*>& batch,
                             const LstmModel& model, int T_override = 0,
                             int threads = 1);

// TBPTT with a single segment covering all K steps.
GradientResult FullBackprop(const std::vector<const BoxQp*>& batch,
                            const LstmModel& model);

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_obj = 0.0;
  double val_mean_ineq = 0.0;
  double val_mean_eq = 0.0;
  double wall_time = 0.0;
};

struct ValidationMetrics {
  double loss = 0.0;
  double objective = 0.0;
  double mean_ineq = 0.0;
  double mean_eq = 0.0;
};

// Unrolls every problem and averages loss (scaled) and unscaled final
// objective / violations.
ValidationMetrics Evaluate(const std::vector<PreparedProblem>& problems,
                           const LstmModel& model);

/// Everything needed to continue an interrupted run.
struct TrainState {
  LstmModel model;
  AdamState adam;
  LstmModel best;
  double best_val_loss = std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  int epochs_done = 0;
  int since_improvement = 0;
  std::vector<EpochLog> log;
};

TrainState InitialTrainState(const UnrollConfig& config, std::uint64_t seed);

using EpochCallback = std::function<void(const TrainState&)>;

// Epoch loop: seeded shuffle, Adam on clipped mini-batch gradients, then
// validation. The best model is the one with the lowest validation loss.
// Stops after max_epochs, or once `patience` epochs pass without a new best
// while validation violations are within the tolerance.
TrainState Train(const std::vector<PreparedProblem>& train_set,
                 const std::vector<PreparedProblem>& val_set,
                 const TrainConfig& cfg, TrainState state,
                 const EpochCallback& on_epoch = nullptr);

}  // namespace iadmm

#endif  // IADMM_TRAINING_HPP_
