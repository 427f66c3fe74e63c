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

#include "iadmm/iadmm.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "iadmm/datasets.hpp"
#include "iadmm/error.hpp"
#include "iadmm/io.hpp"
#include "iadmm/pipeline.hpp"
#include "iadmm/training.hpp"

struct iadmm_problem {
  iadmm::BoxQp prob;
};

struct iadmm_model {
  iadmm::LstmModel model;
};

struct iadmm_result {
  iadmm::InstanceReport report;
};

namespace {

thread_local std::string g_last_error;

iadmm_status StatusOf(iadmm::ErrorKind kind) {
  using iadmm::ErrorKind;
  switch (kind) {
    case ErrorKind::kInvalidArgument:
      return IADMM_ERR_ARGUMENT;
    case ErrorKind::kDimensionMismatch:
    case ErrorKind::kInvalidProblem:
    case ErrorKind::kRankDeficient:
    case ErrorKind::kDatasetEmpty:
    case ErrorKind::kIo:
    case ErrorKind::kFormat:
      return IADMM_ERR_DATA;
    case ErrorKind::kSingularMatrix:
    case ErrorKind::kNonFinite:
    case ErrorKind::kConvergenceFailure:
    case ErrorKind::kInfeasibleConstants:
      return IADMM_ERR_NUMERICAL;
  }
  return IADMM_ERR_INTERNAL;
}

// Runs `body`, translating exceptions into status codes.
template <class F>
iadmm_status Guard(F&& body) {
  g_last_error.clear();
  try {
    body();
    return IADMM_OK;
  } catch (const iadmm::Error& e) {
    g_last_error = std::string(iadmm::ToString(e.kind())) + ": " + e.what();
    return StatusOf(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return IADMM_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return IADMM_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return IADMM_ERR_INTERNAL;
  }
}

void RequireArg(bool cond, const char* what) {
  iadmm::Require(cond, iadmm::ErrorKind::kInvalidArgument, what);
}

iadmm::GeneratorSpec ToSpec(const iadmm_generate_options& o) {
  RequireArg(o.family != nullptr, "family is required");
  iadmm::GeneratorSpec spec;
  spec.family = iadmm::ParseFamily(o.family);
  spec.n = o.n;
  spec.m_ineq = o.m_ineq;
  spec.m_eq = o.m_eq;
  // Families with a single row class ignore the other count.
  if (spec.family == iadmm::Family::kEqualityQp) spec.m_ineq = 0;
  if (spec.family == iadmm::Family::kRandomQp ||
      spec.family == iadmm::Family::kSvm)
    spec.m_eq = 0;
  spec.seed = o.seed;
  spec.count = o.count;
  if (o.alpha_reg > 0.0) spec.alpha_reg = o.alpha_reg;
  if (o.lambda_svm > 0.0) spec.lambda_svm = o.lambda_svm;
  return spec;
}

iadmm::PipelineOptions ToPipeline(const iadmm_solve_options& o,
                                  const iadmm_model* model) {
  iadmm::PipelineOptions p;
  switch (o.mode) {
    case IADMM_MODE_EXACT: p.mode = iadmm::SolveMode::kExact; break;
    case IADMM_MODE_INEXACT: p.mode = iadmm::SolveMode::kInexact; break;
    case IADMM_MODE_LSTM: p.mode = iadmm::SolveMode::kLstm; break;
    case IADMM_MODE_LSTM_FR: p.mode = iadmm::SolveMode::kLstmFr; break;
    default: RequireArg(false, "unknown solve mode");
  }
  RequireArg(o.eps_abs >= 0.0 && o.eps_rel >= 0.0 && o.eps_tol >= 0.0,
             "tolerances must be non-negative");
  RequireArg(o.max_iter >= 0 && o.restore_iters >= 0,
             "iteration counts must be non-negative");
  p.eps_abs = o.eps_abs;
  p.eps_rel = o.eps_rel;
  p.eps_tol = o.eps_tol;
  p.max_iter = o.max_iter;
  p.restore_iters = o.restore_iters;
  p.trace = o.trace != 0;
  p.model = model ? &model->model : nullptr;
  return p;
}

std::string InstanceName(int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "instance_%05d.qp", i);
  return buf;
}

}  // namespace

extern "C" {

const char* iadmm_last_error(void) { return g_last_error.c_str(); }

const char* iadmm_version(void) { return iadmm::GitRevision(); }

iadmm_status iadmm_problem_load(const char* path, iadmm_problem** out) {
  return Guard([&] {
    RequireArg(path && out, "null argument");
    *out = new iadmm_problem{iadmm::LoadProblem(path)};
  });
}

iadmm_status iadmm_problem_save(const iadmm_problem* problem, const char* path,
                                int sparse) {
  return Guard([&] {
    RequireArg(problem && path, "null argument");
    iadmm::SaveProblem(path, problem->prob, sparse != 0);
  });
}

void iadmm_problem_free(iadmm_problem* problem) { delete problem; }

iadmm_status iadmm_problem_dims(const iadmm_problem* problem, int* n, int* m) {
  return Guard([&] {
    RequireArg(problem && n && m, "null argument");
    *n = problem->prob.n();
    *m = problem->prob.m();
  });
}

void iadmm_generate_options_init(iadmm_generate_options* opts) {
  if (!opts) return;
  *opts = iadmm_generate_options{};
  opts->family = "convex_qp_rhs";
  opts->n = 20;
  opts->m_ineq = 10;
  opts->m_eq = 10;
  opts->count = 1;
}

iadmm_status iadmm_generate(const iadmm_generate_options* opts,
                            const char* out_dir) {
  return Guard([&] {
    RequireArg(opts && out_dir, "null argument");
    const iadmm::GeneratorSpec spec = ToSpec(*opts);
    const std::vector<iadmm::BoxQp> probs = iadmm::Generate(spec);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    iadmm::Require(!ec, iadmm::ErrorKind::kIo,
                   std::string("cannot create '") + out_dir + "'");
    const iadmm::DatasetSplit split = iadmm::SplitIndices(spec.count);
    std::vector<std::string> role(probs.size(), "train");
    for (int i : split.validation) role[i] = "validation";
    for (int i : split.test) role[i] = "test";
    std::vector<iadmm::ManifestEntry> entries;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      const std::string name = InstanceName(static_cast<int>(i));
      iadmm::SaveProblem((std::filesystem::path(out_dir) / name).string(),
                         probs[i]);
      entries.push_back({name, role[i]});
    }
    const std::string manifest =
        (std::filesystem::path(out_dir) / "manifest.json").string();
    std::ofstream out(manifest);
    iadmm::Require(static_cast<bool>(out), iadmm::ErrorKind::kIo,
                   "cannot write '" + manifest + "'");
    iadmm::WriteManifest(out, spec, entries);
  });
}

iadmm_status iadmm_model_load(const char* path, iadmm_model** out) {
  return Guard([&] {
    RequireArg(path && out, "null argument");
    *out = new iadmm_model{iadmm::LoadModel(path)};
  });
}

void iadmm_model_free(iadmm_model* model) { delete model; }

void iadmm_solve_options_init(iadmm_solve_options* opts) {
  if (!opts) return;
  const iadmm::PipelineOptions d;
  opts->mode = IADMM_MODE_EXACT;
  opts->eps_abs = d.eps_abs;
  opts->eps_rel = d.eps_rel;
  opts->eps_tol = d.eps_tol;
  opts->max_iter = d.max_iter;
  opts->restore_iters = d.restore_iters;
  opts->trace = 0;
}

iadmm_status iadmm_parse_mode(const char* name, iadmm_mode* out) {
  return Guard([&] {
    RequireArg(name && out, "null argument");
    switch (iadmm::ParseSolveMode(name)) {
      case iadmm::SolveMode::kExact: *out = IADMM_MODE_EXACT; break;
      case iadmm::SolveMode::kInexact: *out = IADMM_MODE_INEXACT; break;
      case iadmm::SolveMode::kLstm: *out = IADMM_MODE_LSTM; break;
      case iadmm::SolveMode::kLstmFr: *out = IADMM_MODE_LSTM_FR; break;
    }
  });
}

iadmm_status iadmm_solve(const iadmm_problem* problem,
                         const iadmm_model* model,
                         const iadmm_solve_options* opts, iadmm_result** out) {
  return Guard([&] {
    RequireArg(problem && opts && out, "null argument");
    const iadmm::PipelineOptions p = ToPipeline(*opts, model);
    auto result = std::make_unique<iadmm_result>();
    result->report = iadmm::SolveInstance(problem->prob, p);
    *out = result.release();
  });
}

iadmm_status iadmm_solve_batch(const iadmm_problem* const* problems, int count,
                               const iadmm_model* model,
                               const iadmm_solve_options* opts, int threads,
                               iadmm_result** out) {
  return Guard([&] {
    RequireArg(problems && opts && out && count >= 0, "invalid argument");
    RequireArg(count <= 100, "at most 100 instances per batch");
    const iadmm::PipelineOptions p = ToPipeline(*opts, model);
    std::vector<iadmm::BoxQp> probs;
    probs.reserve(count);
    for (int i = 0; i < count; ++i) {
      RequireArg(problems[i] != nullptr, "null problem in batch");
      probs.push_back(problems[i]->prob);
    }
    std::vector<iadmm::InstanceReport> reports =
        iadmm::SolveBatch(probs, p, threads);
    for (int i = 0; i < count; ++i)
      out[i] = new iadmm_result{std::move(reports[i])};
  });
}

void iadmm_result_free(iadmm_result* result) { delete result; }

iadmm_status iadmm_result_metrics(const iadmm_result* result,
                                  iadmm_metrics* out) {
  return Guard([&] {
    RequireArg(result && out, "null argument");
    const iadmm::SolveMetrics& m = result->report.metrics;
    out->objective = m.objective;
    out->mean_ineq_violation = m.mean_ineq_violation;
    out->mean_eq_violation = m.mean_eq_violation;
    out->factorization_count = m.factorization_count;
    out->iteration_count = m.iteration_count;
    out->wall_time_seconds = m.wall_time_seconds;
    out->converged = result->report.converged ? 1 : 0;
  });
}

iadmm_status iadmm_result_solution(const iadmm_result* result, double* x,
                                   int n) {
  return Guard([&] {
    RequireArg(result && x, "null argument");
    const iadmm::Vector& sol = result->report.solution.x;
    RequireArg(n >= sol.size(), "buffer too small for the solution");
    for (Eigen::Index i = 0; i < sol.size(); ++i) x[i] = sol[i];
  });
}

iadmm_status iadmm_result_write_trace(const iadmm_result* result,
                                      const char* path) {
  return Guard([&] {
    RequireArg(result && path, "null argument");
    std::ofstream out(path);
    iadmm::Require(static_cast<bool>(out), iadmm::ErrorKind::kIo,
                   std::string("cannot write '") + path + "'");
    iadmm::WriteTraceCsv(out, result->report.trace, result->report.trace_notes);
  });
}

iadmm_status iadmm_write_report(const char* path,
                                const iadmm_result* const* results,
                                const char* const* names, int count,
                                uint64_t seed, const char* config) {
  return Guard([&] {
    RequireArg(path && (results || count == 0) && count >= 0,
               "invalid argument");
    std::vector<iadmm::InstanceReport> rows;
    for (int i = 0; i < count; ++i) {
      RequireArg(results[i] != nullptr, "null result");
      rows.push_back(results[i]->report);
      rows.back().name = names && names[i] ? names[i] : InstanceName(i);
    }
    iadmm::ReportHeader header;
    header.seed = seed;
    header.config = config ? config : "";
    if (std::string(path) == "-") {
      iadmm::WriteRunReport(std::cout, rows, header);
      return;
    }
    std::ofstream out(path);
    iadmm::Require(static_cast<bool>(out), iadmm::ErrorKind::kIo,
                   std::string("cannot write '") + path + "'");
    iadmm::WriteRunReport(out, rows, header);
  });
}

void iadmm_train_options_init(iadmm_train_options* opts) {
  if (!opts) return;
  *opts = iadmm_train_options{};
  iadmm_generate_options_init(&opts->data);
  opts->data.count = 1000;
  const iadmm::UnrollConfig u;
  const iadmm::TrainConfig t;
  opts->K = u.K;
  opts->T = u.T;
  opts->hidden = u.h;
  opts->learning_rate = t.learning_rate;
  opts->batch_size = t.batch_size;
  opts->patience = t.patience;
  opts->max_epochs = t.max_epochs;
  opts->violation_tolerance = 0.0;
  opts->threads = 1;
}

iadmm_status iadmm_train(const iadmm_train_options* opts,
                         const char* checkpoint_path, const char* log_path,
                         int resume) {
  return Guard([&] {
    RequireArg(opts && checkpoint_path, "null argument");
    const iadmm::GeneratorSpec spec = ToSpec(opts->data);
    const std::vector<iadmm::BoxQp> probs = iadmm::Generate(spec);
    const iadmm::DatasetSplit split = iadmm::SplitIndices(spec.count);
    std::vector<iadmm::PreparedProblem> train_set, val_set;
    for (int i : split.train) train_set.push_back(iadmm::Prepare(probs[i]));
    for (int i : split.validation) val_set.push_back(iadmm::Prepare(probs[i]));

    iadmm::UnrollConfig ucfg;
    ucfg.K = opts->K;
    ucfg.T = opts->T;
    ucfg.h = opts->hidden;
    ucfg.Validate();
    iadmm::TrainConfig tcfg;
    tcfg.learning_rate = opts->learning_rate;
    tcfg.batch_size = opts->batch_size;
    tcfg.patience = opts->patience;
    tcfg.max_epochs = opts->max_epochs;
    if (opts->violation_tolerance > 0.0)
      tcfg.violation_tolerance = opts->violation_tolerance;
    tcfg.seed = spec.seed;
    tcfg.threads = opts->threads;
    tcfg.Validate();

    iadmm::TrainState state;
    if (resume && std::filesystem::exists(checkpoint_path)) {
      state = iadmm::LoadTrainState(checkpoint_path);
      const iadmm::UnrollConfig& c = state.model.config;
      RequireArg(c.K == ucfg.K && c.T == ucfg.T && c.h == ucfg.h,
                 "checkpoint configuration differs from the flags");
    } else {
      state = iadmm::InitialTrainState(ucfg, spec.seed);
    }
    const std::string ckpt = checkpoint_path;
    const std::string log = log_path ? log_path : "";
    const bool verbose = opts->verbose != 0;
    auto on_epoch = [&](const iadmm::TrainState& s) {
      iadmm::SaveCheckpoint(ckpt, s);
      if (!log.empty()) {
        std::ofstream out(log);
        iadmm::Require(static_cast<bool>(out), iadmm::ErrorKind::kIo,
                       "cannot write '" + log + "'");
        iadmm::WriteTrainingLog(out, s.log);
      }
      if (verbose) {
        const iadmm::EpochLog& e = s.log.back();
        std::fprintf(stderr,
                     "epoch %d train_loss %.6g val_loss %.6g val_obj %.6g "
                     "ineq %.3g eq %.3g (%.1f s)\n",
                     e.epoch, e.train_loss, e.val_loss, e.val_obj,
                     e.val_mean_ineq, e.val_mean_eq, e.wall_time);
      }
    };
    state = iadmm::Train(train_set, val_set, tcfg, std::move(state), on_epoch);
    iadmm::SaveCheckpoint(ckpt, state);
  });
}

}  // extern "C"
