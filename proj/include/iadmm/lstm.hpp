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

#ifndef IADMM_LSTM_HPP_
#define IADMM_LSTM_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "iadmm/linalg.hpp"
#include "iadmm/qp.hpp"

namespace iadmm {

/**
 * Weights of the coordinate-wise LSTM cell. Every coordinate j of the
 * (n+m)-dimensional least-squares variable feeds the pair
 * [x_hat_j, grad_j] through the same weights:
 *
 *   I  = sigmoid(X W_i + H U_i + b_i)      F = sigmoid(X W_f + H U_f + b_f)
 *   O  = sigmoid(X W_o + H U_o + b_o)      Ct = tanh(X W_c + H U_c + b_c)
 *   C' = I * Ct + F * C                    H' = O * tanh(C')
 *   x_hat' = x_hat - (H' W_g + b_g)
 *
 * Biases are stored as 1 x h rows and b_g as a 1 x 1 matrix so that every
 * tensor has the same type.
 */
struct LstmParams {
  int h = 0;
  Matrix W_i, W_f, W_o, W_c;  // 2 x h
  Matrix U_i, U_f, U_o, U_c;  // h x h
  Matrix b_i, b_f, b_o, b_c;  // 1 x h
  Matrix W_g;                 // h x 1
  Matrix b_g;                 // 1 x 1

  static LstmParams Zeros(int h);
  // Uniform(-1/sqrt(h), 1/sqrt(h)) weights, b_f = 1, remaining biases and
  // b_g zero.
  static LstmParams Initialize(int h, std::uint64_t seed);

  template <class F>
  void ForEachTensor(F&& f) {
    f("W_i", W_i); f("W_f", W_f); f("W_o", W_o); f("W_c", W_c);
    f("U_i", U_i); f("U_f", U_f); f("U_o", U_o); f("U_c", U_c);
    f("b_i", b_i); f("b_f", b_f); f("b_o", b_o); f("b_c", b_c);
    f("W_g", W_g); f("b_g", b_g);
  }
  template <class F>
  void ForEachTensor(F&& f) const {
    const_cast<LstmParams*>(this)->ForEachTensor(
        [&](const char* name, const Matrix& t) { f(name, t); });
  }

  bool AllFinite() const;
};

struct LstmState {
  Matrix H;  // (n+m) x h
  Matrix C;  // (n+m) x h

  static LstmState Zeros(int rows, int h);
};

/// Per-iteration raw (pre-sigmoid) relaxation and penalty parameters.
struct AdaptiveParams {
  Vector alpha_raw;  // K entries
  Vector rho_raw;    // K entries

  // alpha = 1.6 and sigmoid(rho_raw) = 0.1 for every iteration.
  static AdaptiveParams Initialize(int K);

  int K() const { return static_cast<int>(alpha_raw.size()); }
  // alpha^{k+1} = 2 sigmoid(alpha_raw[k]).
  double Alpha(int k) const;
  // rho^{k+1}_i = sigmoid(rho_raw[k]), times 1e3 on equality rows.
  Vector Rho(const BoxQp& prob, int k) const;
};

struct UnrollConfig {
  int K = 100;
  int T = 100;
  int h = 400;
  double sigma = 1e-6;

  void Validate() const;
};

/// Everything a trained solver needs; also the container for gradients.
struct LstmModel {
  UnrollConfig config;
  LstmParams lstm;
  AdaptiveParams adapt;

  static LstmModel Initialize(const UnrollConfig& config, std::uint64_t seed);
  // Zero tensors with this model's shapes.
  LstmModel ZerosLike() const;

  template <class F>
  void ForEachTensor(F&& f) {
    lstm.ForEachTensor(f);
    f("alpha_raw", adapt.alpha_raw);
    f("rho_raw", adapt.rho_raw);
  }
  template <class F>
  void ForEachTensor(F&& f) const {
    const_cast<LstmModel*>(this)->ForEachTensor(
        [&](const char* name, auto& t) { f(name, std::as_const(t)); });
  }
};

double Sigmoid(double v);
double Logit(double p);

/// Least-squares view of the condensed system: phi(w) = 1/2 ||A_hat w - b_hat||^2.
struct LeastSquaresView {
  KktSystem system;

  double Phi(const Vector& w) const;
  Vector Gradient(const Vector& w) const;
};

LeastSquaresView AssembleLeastSquares(const BoxQp& prob, const Iterate& it,
                                      const Vector& rho, double sigma);

struct LstmCellOutput {
  LstmState state;
  Vector x_hat;
};

// One application of the cell to every coordinate.
LstmCellOutput LstmCell(const LstmParams& params, const LstmState& state,
                        const Vector& x_hat, const Vector& grad);

// Gate activations of one cell application, used for range checks.
struct LstmGates {
  Matrix I, F, O, C_tilde;
};
LstmGates LstmCellGates(const LstmParams& params, const LstmState& state,
                        const Vector& x_hat, const Vector& grad);

// Reverse-mode pass through LstmCell: given adjoints of x_hat', H' and C',
// accumulates parameter adjoints into `grads` and returns the adjoints of
// (x_hat, grad, H, C).
struct LstmCellInputAdjoints {
  Vector x_hat;
  Vector grad;
  Matrix H;
  Matrix C;
};
LstmCellInputAdjoints LstmCellBackward(const LstmParams& params,
                                       const LstmState& state,
                                       const Vector& x_hat, const Vector& grad,
                                       const Vector& x_hat_next_adj,
                                       const Matrix& H_next_adj,
                                       const Matrix& C_next_adj,
                                       LstmParams& grads);

/// The four gates packed side by side (I | F | O | C~) for one matrix
/// product per step.
struct PackedLstm {
  int h = 0;
  Matrix W;    // 2 x 4h
  Matrix U;    // h x 4h
  Matrix b;    // 1 x 4h
  Matrix W_g;  // h x 1
  double b_g = 0.0;

  static PackedLstm Pack(const LstmParams& params);
  static PackedLstm ZerosLike(const PackedLstm& other);
  // Adds this (gradient) into the unpacked layout.
  void AddTo(LstmParams& out) const;
};

struct CellCache {
  Matrix X;       // N x 2
  Matrix H, C;    // incoming state
  Matrix gates;   // activated gates, N x 4h
  Matrix tanh_C;  // tanh(C')
  Matrix H_next;
};

LstmCellOutput CellForward(const PackedLstm& p, const LstmState& state,
                           const Vector& x_hat, const Vector& grad,
                           CellCache* cache);
LstmCellInputAdjoints CellBackward(const PackedLstm& p, const CellCache& cache,
                                   const Vector& x_hat_next_adj,
                                   const Matrix& H_next_adj,
                                   Matrix C_next_adj, PackedLstm& grads);

/// Carried state of the learned solver between iterations.
struct UnrollState {
  Iterate iterate;
  Vector x_hat;
  LstmState lstm;

  static UnrollState Initial(const BoxQp& prob, int h,
                             const Iterate* init = nullptr);
};

/// Fixed per-problem data reused by every step.
struct UnrollContext {
  const BoxQp* prob = nullptr;
  Matrix Q_sigma;     // Q + sigma I
  Vector row_scale;   // 1 on inequality rows, 1e3 on equality rows
  double sigma = 0.0;

  UnrollContext(const BoxQp& prob, double sigma);
  int n() const { return prob->n(); }
  int m() const { return prob->m(); }
  // A_hat w for the condensed matrix with penalties rho.
  Vector ApplyKkt(const Vector& w, const Vector& rho) const;
};

/// Intermediates of one learned step, kept for the reverse pass.
struct StepCache {
  double alpha_raw_sig = 0.0;  // sigmoid(alpha_raw[k])
  double rho_raw_sig = 0.0;    // sigmoid(rho_raw[k])
  double alpha = 0.0;
  Vector rho;
  Iterate prev;
  Vector x_hat;      // incoming
  Vector ls_res;     // A_hat x_hat - b_hat
  Vector ls_grad;    // A_hat ls_res
  CellCache cell;
  Vector x_hat_next;
  Vector z_tilde, clip_mask;
  Iterate next;
  Residuals residuals;
};

// One I-ADMM-LSTM iteration with index k (uses alpha_raw[k], rho_raw[k]).
UnrollState UnrollStep(const UnrollContext& ctx, const PackedLstm& packed,
                       const AdaptiveParams& adapt, int k,
                       const UnrollState& state, StepCache* cache);

struct UnrollResult {
  // trajectory[0] is the initial iterate, trajectory[k] the k-th.
  std::vector<Iterate> trajectory;
  // residuals[k] evaluated at trajectory[k], k = 0..K.
  std::vector<Residuals> residuals;
  // rho of every step; rho[k] produced trajectory[k + 1].
  std::vector<Vector> rho;
  UnrollState final_state;
};

// `prob` is the preconditioned problem. Throws kNonFinite naming the step.
UnrollResult Unroll(const BoxQp& prob, const LstmModel& model,
                    const Iterate* init = nullptr);
// Runs `steps` iterations starting at iteration index `first_step`.
UnrollResult UnrollFrom(const BoxQp& prob, const LstmModel& model,
                        const UnrollState& start, int first_step, int steps);

// Proposes (x_tilde, nu) for step k given the condensed system of that step.
using StepProposer =
    std::function<Vector(int k, const KktSystem& system, const Vector& x_hat)>;

// The Algorithm-2 plumbing with the cell replaced by `propose`.
UnrollResult UnrollWithProposer(const BoxQp& prob, const AdaptiveParams& adapt,
                                double sigma, const StepProposer& propose,
                                const Iterate* init = nullptr);

}  // namespace iadmm

#endif  // IADMM_LSTM_HPP_
