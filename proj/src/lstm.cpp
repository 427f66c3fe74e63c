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

#include "iadmm/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "iadmm/admm.hpp"
#include "iadmm/error.hpp"
#include "iadmm/rng.hpp"

namespace iadmm {

double Sigmoid(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

double Logit(double p) { return std::log(p / (1.0 - p)); }

namespace {

// Sigmoid kept inside the open unit interval after rounding, so that
// alpha < 2 and rho > 0 hold for any raw value.
double OpenUnitSigmoid(double v) {
  return std::clamp(Sigmoid(v), std::numeric_limits<double>::min(),
                    std::nextafter(1.0, 0.0));
}

}  // namespace

LstmParams LstmParams::Zeros(int h) {
  Require(h >= 1, ErrorKind::kInvalidArgument, "hidden width must be >= 1");
  LstmParams p;
  p.h = h;
  for (Matrix* W : {&p.W_i, &p.W_f, &p.W_o, &p.W_c}) *W = Matrix::Zero(2, h);
  for (Matrix* U : {&p.U_i, &p.U_f, &p.U_o, &p.U_c}) *U = Matrix::Zero(h, h);
  for (Matrix* b : {&p.b_i, &p.b_f, &p.b_o, &p.b_c}) *b = Matrix::Zero(1, h);
  p.W_g = Matrix::Zero(h, 1);
  p.b_g = Matrix::Zero(1, 1);
  return p;
}

LstmParams LstmParams::Initialize(int h, std::uint64_t seed) {
  LstmParams p = Zeros(h);
  CounterRng rng(CounterRng::DeriveKey(seed, 0x157D));
  const double bound = 1.0 / std::sqrt(static_cast<double>(h));
  auto fill = [&](Matrix& M) {
    for (Eigen::Index i = 0; i < M.size(); ++i)
      M.data()[i] = rng.Uniform(-bound, bound);
  };
  for (Matrix* W : {&p.W_i, &p.W_f, &p.W_o, &p.W_c}) fill(*W);
  for (Matrix* U : {&p.U_i, &p.U_f, &p.U_o, &p.U_c}) fill(*U);
  fill(p.W_g);
  p.b_f.setOnes();
  return p;
}

bool LstmParams::AllFinite() const {
  bool ok = true;
  ForEachTensor([&](const char*, const Matrix& t) { ok = ok && t.allFinite(); });
  return ok;
}

LstmState LstmState::Zeros(int rows, int h) {
  return {Matrix::Zero(rows, h), Matrix::Zero(rows, h)};
}

AdaptiveParams AdaptiveParams::Initialize(int K) {
  Require(K >= 0, ErrorKind::kInvalidArgument, "K must be >= 0");
  AdaptiveParams a;
  a.alpha_raw = Vector::Constant(K, Logit(0.8));
  a.rho_raw = Vector::Constant(K, Logit(0.1));
  return a;
}

double AdaptiveParams::Alpha(int k) const {
  return 2.0 * OpenUnitSigmoid(alpha_raw[k]);
}

Vector AdaptiveParams::Rho(const BoxQp& prob, int k) const {
  return DefaultRho(prob, OpenUnitSigmoid(rho_raw[k]));
}

void UnrollConfig::Validate() const {
  Require(K >= 0, ErrorKind::kInvalidArgument, "K must be >= 0");
  Require(h >= 1, ErrorKind::kInvalidArgument, "h must be >= 1");
  Require(T >= 1 && (K == 0 || T <= K), ErrorKind::kInvalidArgument,
          "T must satisfy 1 <= T <= K");
  Require(sigma > 0.0, ErrorKind::kInvalidArgument, "sigma must be positive");
}

LstmModel LstmModel::Initialize(const UnrollConfig& config,
                                std::uint64_t seed) {
  config.Validate();
  return {config, LstmParams::Initialize(config.h, seed),
          AdaptiveParams::Initialize(config.K)};
}

LstmModel LstmModel::ZerosLike() const {
  LstmModel z = *this;
  z.ForEachTensor([](const char*, auto& t) { t.setZero(); });
  return z;
}

double LeastSquaresView::Phi(const Vector& w) const {
  return 0.5 * (system.matrix * w - system.rhs).squaredNorm();
}

Vector LeastSquaresView::Gradient(const Vector& w) const {
  return system.matrix.transpose() * (system.matrix * w - system.rhs);
}

LeastSquaresView AssembleLeastSquares(const BoxQp& prob, const Iterate& it,
                                      const Vector& rho, double sigma) {
  LeastSquaresView view;
  view.system = BuildKkt(prob, rho, sigma);
  view.system.rhs = BuildKktRhs(prob, it.x, it.z, it.y, rho, sigma);
  return view;
}

// ---------------------------------------------------------------------------
// Cell

PackedLstm PackedLstm::Pack(const LstmParams& params) {
  const int h = params.h;
  PackedLstm p;
  p.h = h;
  p.W.resize(2, 4 * h);
  p.U.resize(h, 4 * h);
  p.b.resize(1, 4 * h);
  const Matrix* Ws[] = {&params.W_i, &params.W_f, &params.W_o, &params.W_c};
  const Matrix* Us[] = {&params.U_i, &params.U_f, &params.U_o, &params.U_c};
  const Matrix* bs[] = {&params.b_i, &params.b_f, &params.b_o, &params.b_c};
  for (int g = 0; g < 4; ++g) {
    p.W.middleCols(g * h, h) = *Ws[g];
    p.U.middleCols(g * h, h) = *Us[g];
    p.b.middleCols(g * h, h) = *bs[g];
  }
  p.W_g = params.W_g;
  p.b_g = params.b_g(0, 0);
  return p;
}

PackedLstm PackedLstm::ZerosLike(const PackedLstm& other) {
  PackedLstm p;
  p.h = other.h;
  p.W = Matrix::Zero(other.W.rows(), other.W.cols());
  p.U = Matrix::Zero(other.U.rows(), other.U.cols());
  p.b = Matrix::Zero(1, other.b.cols());
  p.W_g = Matrix::Zero(other.W_g.rows(), 1);
  return p;
}

void PackedLstm::AddTo(LstmParams& out) const {
  Matrix* Ws[] = {&out.W_i, &out.W_f, &out.W_o, &out.W_c};
  Matrix* Us[] = {&out.U_i, &out.U_f, &out.U_o, &out.U_c};
  Matrix* bs[] = {&out.b_i, &out.b_f, &out.b_o, &out.b_c};
  for (int g = 0; g < 4; ++g) {
    *Ws[g] += W.middleCols(g * h, h);
    *Us[g] += U.middleCols(g * h, h);
    *bs[g] += b.middleCols(g * h, h);
  }
  out.W_g += W_g;
  out.b_g(0, 0) += b_g;
}

namespace {

void CheckCellShapes(const PackedLstm& p, const LstmState& state,
                     const Vector& x_hat, const Vector& grad) {
  const Eigen::Index N = x_hat.size();
  Require(grad.size() == N && state.H.rows() == N && state.C.rows() == N &&
              state.H.cols() == p.h && state.C.cols() == p.h,
          ErrorKind::kDimensionMismatch, "LSTM cell input shapes disagree");
}

}  // namespace

LstmCellOutput CellForward(const PackedLstm& p, const LstmState& state,
                           const Vector& x_hat, const Vector& grad,
                           CellCache* cache) {
  CheckCellShapes(p, state, x_hat, grad);
  const Eigen::Index N = x_hat.size();
  const int h = p.h;
  Matrix X(N, 2);
  X.col(0) = x_hat;
  X.col(1) = grad;
  Matrix gates = X * p.W;
  gates.noalias() += state.H * p.U;
  gates.rowwise() += p.b.row(0);
  auto sig = [](double v) { return Sigmoid(v); };
  gates.leftCols(3 * h) = gates.leftCols(3 * h).unaryExpr(sig);
  gates.rightCols(h) = gates.rightCols(h).array().tanh().matrix();

  LstmCellOutput out;
  out.state.C = gates.leftCols(h).cwiseProduct(gates.rightCols(h)) +
                gates.middleCols(h, h).cwiseProduct(state.C);
  Matrix tanh_C = out.state.C.array().tanh().matrix();
  out.state.H = gates.middleCols(2 * h, h).cwiseProduct(tanh_C);
  out.x_hat = x_hat - (out.state.H * p.W_g).col(0) -
              Vector::Constant(N, p.b_g);
  if (cache) {
    cache->X = std::move(X);
    cache->H = state.H;
    cache->C = state.C;
    cache->gates = std::move(gates);
    cache->tanh_C = std::move(tanh_C);
    cache->H_next = out.state.H;
  }
  return out;
}

LstmCellInputAdjoints CellBackward(const PackedLstm& p, const CellCache& cache,
                                   const Vector& x_hat_next_adj,
                                   const Matrix& H_next_adj,
                                   Matrix C_next_adj, PackedLstm& grads) {
  const int h = p.h;
  const auto I = cache.gates.leftCols(h).array();
  const auto F = cache.gates.middleCols(h, h).array();
  const auto O = cache.gates.middleCols(2 * h, h).array();
  const auto Ct = cache.gates.rightCols(h).array();
  const auto tC = cache.tanh_C.array();

  // x_hat' = x_hat - (H' W_g + b_g)
  const Vector g_adj = -x_hat_next_adj;
  Matrix H_adj = H_next_adj;
  H_adj.noalias() += g_adj * p.W_g.transpose();
  grads.W_g.noalias() += cache.H_next.transpose() * g_adj;
  grads.b_g += g_adj.sum();

  // H' = O * tanh(C')
  C_next_adj.array() += H_adj.array() * O * (1.0 - tC.square());

  Matrix pre_adj(cache.gates.rows(), 4 * h);
  pre_adj.leftCols(h) = (C_next_adj.array() * Ct * I * (1.0 - I)).matrix();
  pre_adj.middleCols(h, h) =
      (C_next_adj.array() * cache.C.array() * F * (1.0 - F)).matrix();
  pre_adj.middleCols(2 * h, h) =
      (H_adj.array() * tC * O * (1.0 - O)).matrix();
  pre_adj.rightCols(h) =
      (C_next_adj.array() * I * (1.0 - Ct.square())).matrix();

  grads.W.noalias() += cache.X.transpose() * pre_adj;
  grads.U.noalias() += cache.H.transpose() * pre_adj;
  grads.b += pre_adj.colwise().sum();

  LstmCellInputAdjoints in;
  const Matrix X_adj = pre_adj * p.W.transpose();
  in.x_hat = x_hat_next_adj + X_adj.col(0);
  in.grad = X_adj.col(1);
  in.H = pre_adj * p.U.transpose();
  in.C = (C_next_adj.array() * F).matrix();
  return in;
}

LstmCellOutput LstmCell(const LstmParams& params, const LstmState& state,
                        const Vector& x_hat, const Vector& grad) {
  return CellForward(PackedLstm::Pack(params), state, x_hat, grad, nullptr);
}

LstmGates LstmCellGates(const LstmParams& params, const LstmState& state,
                        const Vector& x_hat, const Vector& grad) {
  CellCache cache;
  CellForward(PackedLstm::Pack(params), state, x_hat, grad, &cache);
  const int h = params.h;
  return {cache.gates.leftCols(h), cache.gates.middleCols(h, h),
          cache.gates.middleCols(2 * h, h), cache.gates.rightCols(h)};
}

LstmCellInputAdjoints LstmCellBackward(const LstmParams& params,
                                       const LstmState& state,
                                       const Vector& x_hat, const Vector& grad,
                                       const Vector& x_hat_next_adj,
                                       const Matrix& H_next_adj,
                                       const Matrix& C_next_adj,
                                       LstmParams& grads) {
  const PackedLstm packed = PackedLstm::Pack(params);
  CellCache cache;
  CellForward(packed, state, x_hat, grad, &cache);
  PackedLstm g = PackedLstm::ZerosLike(packed);
  LstmCellInputAdjoints in =
      CellBackward(packed, cache, x_hat_next_adj, H_next_adj, C_next_adj, g);
  g.AddTo(grads);
  return in;
}

// ---------------------------------------------------------------------------
// Unroll

UnrollState UnrollState::Initial(const BoxQp& prob, int h,
                                 const Iterate* init) {
  const int n = prob.n(), m = prob.m();
  UnrollState s;
  if (init) {
    Require(init->x.size() == n && init->z.size() == m && init->y.size() == m,
            ErrorKind::kDimensionMismatch, "initial iterate does not match");
    s.iterate = Iterate::Zeros(n, m);
    s.iterate.x = init->x;
    s.iterate.z = init->z;
    s.iterate.y = init->y;
  } else {
    s.iterate = Iterate::Zeros(n, m);
  }
  s.x_hat = Vector::Zero(n + m);
  s.lstm = LstmState::Zeros(n + m, h);
  return s;
}

UnrollContext::UnrollContext(const BoxQp& p, double s) : prob(&p), sigma(s) {
  Q_sigma = p.Q;
  Q_sigma.diagonal().array() += s;
  row_scale = DefaultRho(p, 1.0);
}

Vector UnrollContext::ApplyKkt(const Vector& w, const Vector& rho) const {
  const int n = this->n(), m = this->m();
  Vector out(n + m);
  out.head(n).noalias() = Q_sigma * w.head(n);
  out.head(n).noalias() += prob->A.transpose() * w.tail(m);
  out.tail(m).noalias() = prob->A * w.head(n);
  out.tail(m) -= w.tail(m).cwiseQuotient(rho);
  return out;
}

namespace {

void CheckFinite(const UnrollState& s, int k) {
  if (!s.iterate.AllFinite() || !s.x_hat.allFinite() ||
      !s.lstm.H.allFinite() || !s.lstm.C.allFinite())
    Fail(ErrorKind::kNonFinite,
         "non-finite value in learned iteration " + std::to_string(k + 1));
}

Vector ClipMask(const Vector& v, const Vector& l, const Vector& u) {
  Vector mask(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    mask[i] = (v[i] < l[i] || v[i] > u[i]) ? 0.0 : 1.0;
  return mask;
}

}  // namespace

UnrollState UnrollStep(const UnrollContext& ctx, const PackedLstm& packed,
                       const AdaptiveParams& adapt, int k,
                       const UnrollState& state, StepCache* cache) {
  const BoxQp& prob = *ctx.prob;
  const int n = ctx.n(), m = ctx.m();
  const Iterate& it = state.iterate;
  const double rho_sig = OpenUnitSigmoid(adapt.rho_raw[k]);
  const double alpha_sig = OpenUnitSigmoid(adapt.alpha_raw[k]);
  const Vector rho = ctx.row_scale * rho_sig;
  const double alpha = 2.0 * alpha_sig;

  Vector b_hat(n + m);
  b_hat.head(n) = ctx.sigma * it.x - prob.p;
  b_hat.tail(m) = it.z - it.y.cwiseQuotient(rho);
  Vector ls_res = ctx.ApplyKkt(state.x_hat, rho) - b_hat;
  Vector ls_grad = ctx.ApplyKkt(ls_res, rho);

  UnrollState out;
  LstmCellOutput cell = CellForward(packed, state.lstm, state.x_hat, ls_grad,
                                    cache ? &cache->cell : nullptr);
  out.x_hat = std::move(cell.x_hat);
  out.lstm = std::move(cell.state);
  out.iterate.x_tilde = out.x_hat.head(n);
  out.iterate.nu = out.x_hat.tail(m);
  FinishStep(prob, rho, alpha, it, out.iterate);

  if (cache) {
    cache->alpha_raw_sig = alpha_sig;
    cache->rho_raw_sig = rho_sig;
    cache->alpha = alpha;
    cache->rho = rho;
    cache->prev = it;
    cache->x_hat = state.x_hat;
    cache->ls_res = std::move(ls_res);
    cache->ls_grad = std::move(ls_grad);
    cache->x_hat_next = out.x_hat;
    cache->z_tilde = out.iterate.z_tilde;
    cache->clip_mask =
        ClipMask(out.iterate.z_tilde + it.y.cwiseQuotient(rho), prob.l, prob.u);
    cache->next = out.iterate;
    cache->residuals = ComputeResiduals(prob, out.iterate);
  }
  CheckFinite(out, k);
  return out;
}

UnrollResult UnrollFrom(const BoxQp& prob, const LstmModel& model,
                        const UnrollState& start, int first_step, int steps) {
  model.config.Validate();
  Require(first_step >= 0 && steps >= 0 &&
              first_step + steps <= model.adapt.K(),
          ErrorKind::kInvalidArgument, "unroll range exceeds K");
  const UnrollContext ctx(prob, model.config.sigma);
  const PackedLstm packed = PackedLstm::Pack(model.lstm);
  UnrollResult result;
  result.trajectory.push_back(start.iterate);
  result.residuals.push_back(ComputeResiduals(prob, start.iterate));
  UnrollState state = start;
  for (int k = first_step; k < first_step + steps; ++k) {
    state = UnrollStep(ctx, packed, model.adapt, k, state, nullptr);
    result.trajectory.push_back(state.iterate);
    result.residuals.push_back(ComputeResiduals(prob, state.iterate));
    result.rho.push_back(model.adapt.Rho(prob, k));
  }
  result.final_state = std::move(state);
  return result;
}

UnrollResult Unroll(const BoxQp& prob, const LstmModel& model,
                    const Iterate* init) {
  Require(model.adapt.K() >= model.config.K, ErrorKind::kInvalidArgument,
          "adaptive parameters shorter than K");
  return UnrollFrom(prob, model,
                    UnrollState::Initial(prob, model.config.h, init), 0,
                    model.config.K);
}

UnrollResult UnrollWithProposer(const BoxQp& prob, const AdaptiveParams& adapt,
                                double sigma, const StepProposer& propose,
                                const Iterate* init) {
  const int n = prob.n(), m = prob.m();
  UnrollResult result;
  UnrollState state = UnrollState::Initial(prob, 1, init);
  result.trajectory.push_back(state.iterate);
  result.residuals.push_back(ComputeResiduals(prob, state.iterate));
  for (int k = 0; k < adapt.K(); ++k) {
    const Vector rho = adapt.Rho(prob, k);
    const LeastSquaresView view =
        AssembleLeastSquares(prob, state.iterate, rho, sigma);
    state.x_hat = propose(k, view.system, state.x_hat);
    Iterate next;
    next.x_tilde = state.x_hat.head(n);
    next.nu = state.x_hat.tail(m);
    FinishStep(prob, rho, adapt.Alpha(k), state.iterate, next);
    state.iterate = std::move(next);
    CheckFinite(state, k);
    result.trajectory.push_back(state.iterate);
    result.residuals.push_back(ComputeResiduals(prob, state.iterate));
    result.rho.push_back(rho);
  }
  result.final_state = std::move(state);
  return result;
}

}  // namespace iadmm
