/*
 * Copyright 2026 The iadmm Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef IADMM_IADMM_H_
#define IADMM_IADMM_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define IADMM_API __declspec(dllexport)
#else
#define IADMM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Every function returns one of these. */
typedef enum {
  IADMM_OK = 0,
  IADMM_ERR_ARGUMENT = 1,  /* bad option or flag value */
  IADMM_ERR_DATA = 2,      /* I/O, file format, invalid problem */
  IADMM_ERR_NUMERICAL = 3, /* singular matrix, non-finite values */
  IADMM_ERR_INTERNAL = 4
} iadmm_status;

/* Message of the last failure on the calling thread ("" if none). */
IADMM_API const char* iadmm_last_error(void);

typedef struct iadmm_problem iadmm_problem;
typedef struct iadmm_model iadmm_model;
typedef struct iadmm_result iadmm_result;

/* ---- problems ---------------------------------------------------------- */

IADMM_API iadmm_status iadmm_problem_load(const char* path,
                                          iadmm_problem** out);
IADMM_API iadmm_status iadmm_problem_save(const iadmm_problem* problem,
                                          const char* path, int sparse);
IADMM_API void iadmm_problem_free(iadmm_problem* problem);
IADMM_API iadmm_status iadmm_problem_dims(const iadmm_problem* problem,
                                          int* n, int* m);

/* ---- generation -------------------------------------------------------- */

typedef struct {
  const char* family; /* convex_qp_rhs | convex_qp_all | random_qp |
                         equality_qp | svm */
  int n;
  int m_ineq;
  int m_eq;
  uint64_t seed;
  int count;
  double alpha_reg;  /* <= 0 selects the default 1e-2 */
  double lambda_svm; /* <= 0 samples lambda per instance */
} iadmm_generate_options;

IADMM_API void iadmm_generate_options_init(iadmm_generate_options* opts);

/* Writes <out_dir>/instance_XXXXX.qp for every instance plus
   <out_dir>/manifest.json. */
IADMM_API iadmm_status iadmm_generate(const iadmm_generate_options* opts,
                                      const char* out_dir);

/* ---- models ------------------------------------------------------------ */

IADMM_API iadmm_status iadmm_model_load(const char* path, iadmm_model** out);
IADMM_API void iadmm_model_free(iadmm_model* model);

/* ---- solving ----------------------------------------------------------- */

typedef enum {
  IADMM_MODE_EXACT = 0,
  IADMM_MODE_INEXACT = 1,
  IADMM_MODE_LSTM = 2,
  IADMM_MODE_LSTM_FR = 3
} iadmm_mode;

typedef struct {
  iadmm_mode mode;
  double eps_abs;
  double eps_rel;
  double eps_tol; /* composite-residual stop of the inexact engine */
  int max_iter;
  int restore_iters;
  int trace; /* nonzero records the condition trace */
} iadmm_solve_options;

IADMM_API void iadmm_solve_options_init(iadmm_solve_options* opts);
IADMM_API iadmm_status iadmm_parse_mode(const char* name, iadmm_mode* out);

typedef struct {
  double objective;
  double mean_ineq_violation;
  double mean_eq_violation;
  int factorization_count;
  int iteration_count;
  double wall_time_seconds;
  int converged;
} iadmm_metrics;

/* `model` may be NULL for the exact and inexact modes. */
IADMM_API iadmm_status iadmm_solve(const iadmm_problem* problem,
                                   const iadmm_model* model,
                                   const iadmm_solve_options* opts,
                                   iadmm_result** out);

/* Solves `count` problems on `threads` workers. `out` receives `count`
   results in input order. */
IADMM_API iadmm_status iadmm_solve_batch(const iadmm_problem* const* problems,
                                         int count, const iadmm_model* model,
                                         const iadmm_solve_options* opts,
                                         int threads, iadmm_result** out);

IADMM_API void iadmm_result_free(iadmm_result* result);
IADMM_API iadmm_status iadmm_result_metrics(const iadmm_result* result,
                                            iadmm_metrics* out);
/* Copies the primal solution into x (capacity n). */
IADMM_API iadmm_status iadmm_result_solution(const iadmm_result* result,
                                             double* x, int n);
IADMM_API iadmm_status iadmm_result_write_trace(const iadmm_result* result,
                                                const char* path);

/* RunReport CSV over `count` results; `names` labels the rows. */
IADMM_API iadmm_status iadmm_write_report(const char* path,
                                          const iadmm_result* const* results,
                                          const char* const* names, int count,
                                          uint64_t seed, const char* config);

/* ---- training ---------------------------------------------------------- */

typedef struct {
  iadmm_generate_options data;
  int K;
  int T;
  int hidden;
  double learning_rate;
  int batch_size;
  int patience;
  int max_epochs;
  double violation_tolerance; /* <= 0 disables the early-stop gate */
  int threads;
  int verbose; /* nonzero prints one line per epoch to stderr */
} iadmm_train_options;

IADMM_API void iadmm_train_options_init(iadmm_train_options* opts);

/* Trains on the generated family and writes the checkpoint after every
   epoch. With `resume` nonzero and an existing checkpoint the run continues
   from it. `log_path` may be NULL. */
IADMM_API iadmm_status iadmm_train(const iadmm_train_options* opts,
                                   const char* checkpoint_path,
                                   const char* log_path, int resume);

IADMM_API const char* iadmm_version(void);

#ifdef __cplusplus
}
#endif

#endif /* IADMM_IADMM_H_ */
