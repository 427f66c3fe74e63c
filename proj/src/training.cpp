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

#include "iadmm/training.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

#include "iadmm/error.hpp"
#include "iadmm/rng.hpp"

namespace iadmm {

void TrainConfig::Validate() const {
  Require(learning_rate > 0.0, ErrorKind::kInvalidArgument,
          "learning rate must be positive");
  Require(batch_size >= 1, ErrorKind::kInvalidArgument,
          "batch size must be >= 1");
  Require(patience >= 0, ErrorKind::kInvalidArgument,
          "patience must be >= 0");
  Require(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 &&
              adam_beta2 < 1.0 && adam_eps > 0.0,
          ErrorKind::kInvalidArgument, "invalid Adam constants");
  Require(max_epochs >= 1, ErrorKind::kInvalidArgument,
          "max_epochs must be >= 1");
  Require(violation_tolerance > 0.0, ErrorKind::kInvalidArgument,
          "violation tolerance must be positive");
  Require(clip_norm > 0.0, ErrorKind::kInvalidArgument,
          "clip norm must be positive");
  Require(threads >= 0, ErrorKind::kInvalidArgument,
          "threads must be >= 0");
}

AdamState AdamState::ZerosLike(const LstmModel& model) {
  return {model.ZerosLike(), model.ZerosLike(), 0};
}

namespace {

std::vector<double*> TensorData(LstmModel& model) {
  std::vector<double*> out;
  model.ForEachTensor([&](const char*, auto& t) { out.push_back(t.data()); });
  return out;
}

std::vector<Eigen::Index> TensorSizes(const LstmModel& model) {
  std::vector<Eigen::Index> out;
  model.ForEachTensor(
      [&](const char*, const auto& t) { out.push_back(t.size()); });
  return out;
}

}  // namespace

void AdamUpdate(const TrainConfig& cfg, const LstmModel& grad,
                LstmModel& model, AdamState& state) {
  ++state.step;
  const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  const std::vector<Eigen::Index> sizes = TensorSizes(model);
  LstmModel& g = const_cast<LstmModel&>(grad);
  const std::vector<double*> gd = TensorData(g);
  const std::vector<double*> pd = TensorData(model);
  const std::vector<double*> md = TensorData(state.m);
  const std::vector<double*> vd = TensorData(state.v);
  for (std::size_t t = 0; t < sizes.size(); ++t) {
    for (Eigen::Index i = 0; i < sizes[t]; ++i) {
      const double gi = gd[t][i];
      md[t][i] = b1 * md[t][i] + (1.0 - b1) * gi;
      vd[t][i] = b2 * vd[t][i] + (1.0 - b2) * gi * gi;
      const double m_hat = md[t][i] / c1;
      const double v_hat = vd[t][i] / c2;
      pd[t][i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
    }
  }
}

double GlobalNorm(const LstmModel& grad) {
  double sq = 0.0;
  grad.ForEachTensor(
      [&](const char*, const auto& t) { sq += t.squaredNorm(); });
  return std::sqrt(sq);
}

double ClipGlobalNorm(LstmModel& grad, double max_norm) {
  const double norm = GlobalNorm(grad);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    grad.ForEachTensor([&](const char*, auto& t) { t *= scale; });
  }
  return norm;
}

double InstanceLoss(const std::vector<std::pair<double, double>>& norms) {
  Require(norms.size() >= 2, ErrorKind::kInvalidArgument,
          "loss needs at least one iteration after the initial point");
  double sum = 0.0;
  for (std::size_t k = 1; k < norms.size(); ++k)
    sum += norms[k].first + norms[k].second;
  return sum / static_cast<double>(norms.size() - 1);
}

double InstanceLoss(const std::vector<Residuals>& residuals) {
  std::vector<std::pair<double, double>> norms;
  norms.reserve(residuals.size());
  for (const Residuals& r : residuals)
    norms.emplace_back(r.primal_norm, r.dual_norm);
  return InstanceLoss(norms);
}

namespace {

struct StateAdjoint {
  Vector x, z, y, x_hat;
  Matrix H, C;

  static StateAdjoint Zeros(int n, int m, int h) {
    return {Vector::Zero(n), Vector::Zero(m), Vector::Zero(m),
            Vector::Zero(n + m), Matrix::Zero(n + m, h),
            Matrix::Zero(n + m, h)};
  }
};

// Reverse pass of one learned step. `weight` multiplies this step's loss
// term ||r_prim|| + ||r_dual||.
StateAdjoint StepBackward(const UnrollContext& ctx, const PackedLstm& packed,
                          const StepCache& c, StateAdjoint a, double weight,
                          PackedLstm& g, double& alpha_raw_adj,
                          double& rho_raw_adj) {
  const BoxQp& prob = *ctx.prob;
  const int n = ctx.n(), m = ctx.m();
  const Vector& rho = c.rho;
  const Iterate& prev = c.prev;
  const Iterate& next = c.next;

  // Loss term at the new iterate.
  if (c.residuals.primal_norm > 0.0) {
    const Vector e = (weight / c.residuals.primal_norm) * c.residuals.r_primal;
    a.x.noalias() += prob.A.transpose() * e;
    a.z -= e;
  }
  if (c.residuals.dual_norm > 0.0) {
    const Vector e = (weight / c.residuals.dual_norm) * c.residuals.r_dual;
    a.x.noalias() += prob.Q * e;
    a.y.noalias() += prob.A * e;
  }

  // x' = alpha x_tilde + (1 - alpha) x
  const Vector x_tilde_adj = c.alpha * a.x;
  Vector x_adj = (1.0 - c.alpha) * a.x;
  const double alpha_adj = a.x.dot(next.x_tilde - prev.x);
  alpha_raw_adj += alpha_adj * 2.0 * c.alpha_raw_sig * (1.0 - c.alpha_raw_sig);

  // y' = y + rho (z_tilde - z')
  Vector y_adj = a.y;
  Vector z_tilde_adj = rho.cwiseProduct(a.y);
  const Vector z_next_adj = a.z - rho.cwiseProduct(a.y);
  Vector rho_adj = a.y.cwiseProduct(c.z_tilde - next.z);

  // z' = clip(v), v = z_tilde + y / rho
  const Vector v_adj = c.clip_mask.cwiseProduct(z_next_adj);
  const Vector rho_sq = rho.cwiseProduct(rho);
  z_tilde_adj += v_adj;
  y_adj += v_adj.cwiseQuotient(rho);
  rho_adj -= v_adj.cwiseProduct(prev.y).cwiseQuotient(rho_sq);

  // z_tilde = z + (nu - y) / rho
  Vector z_adj = z_tilde_adj;
  const Vector nu_adj = z_tilde_adj.cwiseQuotient(rho);
  y_adj -= nu_adj;
  rho_adj -= z_tilde_adj.cwiseProduct(next.nu - prev.y).cwiseQuotient(rho_sq);

  // Cell.
  Vector x_hat_next_adj = a.x_hat;
  x_hat_next_adj.head(n) += x_tilde_adj;
  x_hat_next_adj.tail(m) += nu_adj;
  LstmCellInputAdjoints in =
      CellBackward(packed, c.cell, x_hat_next_adj, a.H, std::move(a.C), g);

  // grad = A_hat res, res = A_hat x_hat - b_hat; A_hat is symmetric and its
  // lower-right block is -diag(1 / rho).
  const Vector res_adj = ctx.ApplyKkt(in.grad, rho);
  for (int i = 0; i < m; ++i) {
    const int j = n + i;
    rho_adj[i] += (in.grad[j] * c.ls_res[j] + res_adj[j] * c.x_hat[j]) /
                  rho_sq[i];
  }
  Vector x_hat_adj = std::move(in.x_hat);
  x_hat_adj += ctx.ApplyKkt(res_adj, rho);

  // b_hat = [sigma x - p; z - y / rho]
  x_adj -= ctx.sigma * res_adj.head(n);
  z_adj -= res_adj.tail(m);
  y_adj += res_adj.tail(m).cwiseQuotient(rho);
  rho_adj -= res_adj.tail(m).cwiseProduct(prev.y).cwiseQuotient(rho_sq);

  rho_raw_adj += rho_adj.dot(ctx.row_scale) * c.rho_raw_sig *
                 (1.0 - c.rho_raw_sig);

  return {std::move(x_adj), std::move(z_adj), std::move(y_adj),
          std::move(x_hat_adj), std::move(in.H), std::move(in.C)};
}

struct InstanceGradient {
  double loss = 0.0;
  PackedLstm cell;
  Vector alpha_raw;
  Vector rho_raw;
};

InstanceGradient InstanceBackward(const BoxQp& prob, const LstmModel& model,
                                  const PackedLstm& packed, int T) {
  const int K = model.config.K;
  const int n = prob.n(), m = prob.m(), h = model.config.h;
  const UnrollContext ctx(prob, model.config.sigma);
  const double weight = 1.0 / K;

  InstanceGradient out;
  out.cell = PackedLstm::ZerosLike(packed);
  out.alpha_raw = Vector::Zero(model.adapt.K());
  out.rho_raw = Vector::Zero(model.adapt.K());

  UnrollState state = UnrollState::Initial(prob, h);
  std::vector<StepCache> caches(std::min(T, K));
  for (int start = 0; start < K; start += T) {
    const int len = std::min(T, K - start);
    for (int s = 0; s < len; ++s) {
      state = UnrollStep(ctx, packed, model.adapt, start + s, state,
                         &caches[s]);
      out.loss += weight * (caches[s].residuals.primal_norm +
                            caches[s].residuals.dual_norm);
    }
    StateAdjoint adj = StateAdjoint::Zeros(n, m, h);
    for (int s = len - 1; s >= 0; --s) {
      const int k = start + s;
      adj = StepBackward(ctx, packed, caches[s], std::move(adj), weight,
                         out.cell, out.alpha_raw[k], out.rho_raw[k]);
    }
  }
  return out;
}

void CheckGradientFinite(const LstmModel& grad) {
  grad.ForEachTensor([](const char* name, const auto& t) {
    if (!t.allFinite())
      Fail(ErrorKind::kNonFinite,
           std::string("non-finite gradient in ") + name);
  });
}

int ResolveThreads(int threads, std::size_t work) {
  int t = threads > 0 ? threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  t = std::max(t, 1);
  return static_cast<int>(std::min<std::size_t>(t, std::max<std::size_t>(work, 1)));
}

}  // namespace

GradientResult BackwardTbptt(const std::vector<const BoxQp*>& batch,
                             const LstmModel& model, int T_override,
                             int threads) {
  model.config.Validate();
  Require(!batch.empty(), ErrorKind::kDatasetEmpty, "empty batch");
  Require(model.config.K >= 1, ErrorKind::kInvalidArgument,
          "training needs K >= 1");
  const int T = T_override > 0 ? T_override : model.config.T;
  Require(T >= 1 && T <= model.config.K, ErrorKind::kInvalidArgument,
          "T must satisfy 1 <= T <= K");
  const PackedLstm packed = PackedLstm::Pack(model.lstm);

  std::vector<InstanceGradient> parts(batch.size());
  std::vector<std::exception_ptr> errors(batch.size());
  const int workers = ResolveThreads(threads, batch.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < batch.size(); i = next++) {
      try {
        parts[i] = InstanceBackward(*batch[i], model, packed, T);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);

  // Ordered reduction keeps results independent of the thread count.
  GradientResult result;
  result.grad = model.ZerosLike();
  PackedLstm cell = PackedLstm::ZerosLike(packed);
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (const InstanceGradient& p : parts) {
    result.loss += p.loss;
    cell.W += p.cell.W;
    cell.U += p.cell.U;
    cell.b += p.cell.b;
    cell.W_g += p.cell.W_g;
    cell.b_g += p.cell.b_g;
    result.grad.adapt.alpha_raw += p.alpha_raw;
    result.grad.adapt.rho_raw += p.rho_raw;
  }
  result.loss *= inv;
  cell.W *= inv;
  cell.U *= inv;
  cell.b *= inv;
  cell.W_g *= inv;
  cell.b_g *= inv;
  result.grad.adapt.alpha_raw *= inv;
  result.grad.adapt.rho_raw *= inv;
  cell.AddTo(result.grad.lstm);
  CheckGradientFinite(result.grad);
  return result;
}

GradientResult FullBackprop(const std::vector<const BoxQp*>& batch,
                            const LstmModel& model) {
  return BackwardTbptt(batch, model, model.config.K);
}

ValidationMetrics Evaluate(const std::vector<PreparedProblem>& problems,
                           const LstmModel& model) {
  Require(!problems.empty(), ErrorKind::kDatasetEmpty,
          "nothing to evaluate");
  ValidationMetrics v;
  for (const PreparedProblem& p : problems) {
    const UnrollResult r = Unroll(p.scaled, model);
    v.loss += InstanceLoss(r.residuals);
    const Iterate x = UnscaleSolution(r.trajectory.back(), p.scaling);
    v.objective += EvalObjective(p.original, x.x);
    const auto [ineq, eq] = ConstraintViolations(p.original, x.x);
    v.mean_ineq += ineq;
    v.mean_eq += eq;
  }
  const double inv = 1.0 / static_cast<double>(problems.size());
  v.loss *= inv;
  v.objective *= inv;
  v.mean_ineq *= inv;
  v.mean_eq *= inv;
  return v;
}

TrainState InitialTrainState(const UnrollConfig& config, std::uint64_t seed) {
  TrainState s;
  s.model = LstmModel::Initialize(config, seed);
  s.adam = AdamState::ZerosLike(s.model);
  s.best = s.model;
  return s;
}

TrainState Train(const std::vector<PreparedProblem>& train_set,
                 const std::vector<PreparedProblem>& val_set,
                 const TrainConfig& cfg, TrainState state,
                 const EpochCallback& on_epoch) {
  cfg.Validate();
  state.model.config.Validate();
  Require(!train_set.empty(), ErrorKind::kDatasetEmpty,
          "training set is empty");
  Require(!val_set.empty(), ErrorKind::kDatasetEmpty,
          "validation set is empty");
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  const double time_offset = state.log.empty() ? 0.0 : state.log.back().wall_time;

  std::vector<int> order(train_set.size());
  while (state.epochs_done < cfg.max_epochs) {
    const int epoch = state.epochs_done + 1;
    std::iota(order.begin(), order.end(), 0);
    CounterRng rng(CounterRng::DeriveKey(cfg.seed, 0xE90C0000ULL + epoch));
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = rng.NextU64() % i;
      std::swap(order[i - 1], order[j]);
    }

    double loss_sum = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      std::vector<const BoxQp*> batch;
      for (std::size_t i = start;
           i < std::min(order.size(), start + cfg.batch_size); ++i)
        batch.push_back(&train_set[order[i]].scaled);
      GradientResult g = BackwardTbptt(batch, state.model, 0, cfg.threads);
      ClipGlobalNorm(g.grad, cfg.clip_norm);
      AdamUpdate(cfg, g.grad, state.model, state.adam);
      loss_sum += g.loss;
      ++batches;
    }

    const ValidationMetrics val = Evaluate(val_set, state.model);
    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = loss_sum / batches;
    entry.val_loss = val.loss;
    entry.val_obj = val.objective;
    entry.val_mean_ineq = val.mean_ineq;
    entry.val_mean_eq = val.mean_eq;
    entry.wall_time =
        time_offset + std::chrono::duration<double>(Clock::now() - t0).count();
    state.log.push_back(entry);
    state.epochs_done = epoch;

    if (val.loss < state.best_val_loss) {
      state.best_val_loss = val.loss;
      state.best = state.model;
      state.best_epoch = epoch;
      state.since_improvement = 0;
    } else {
      ++state.since_improvement;
    }
    if (on_epoch) on_epoch(state);
    const bool feasible = val.mean_ineq <= cfg.violation_tolerance &&
                          val.mean_eq <= cfg.violation_tolerance;
    if (state.since_improvement >= cfg.patience && feasible) break;
  }
  return state;
}

}  // namespace iadmm
