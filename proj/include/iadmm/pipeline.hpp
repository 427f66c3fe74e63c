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

#ifndef IADMM_PIPELINE_HPP_
#define IADMM_PIPELINE_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "iadmm/inexact.hpp"
#include "iadmm/lstm.hpp"
#include "iadmm/qp.hpp"

namespace iadmm {

enum class SolveMode { kExact, kInexact, kLstm, kLstmFr };

std::string ToString(SolveMode mode);
// exact | inexact | lstm | lstm-fr
SolveMode ParseSolveMode(const std::string& name);

struct PipelineOptions {
  SolveMode mode = SolveMode::kExact;
  double eps_abs = 1e-6;
  double eps_rel = 1e-6;
  /// composite-residual stop for the inexact engine
  double eps_tol = 1e-4;
  int max_iter = 20000;
  int restore_iters = 20;
  int ruiz_iter = 10;
  bool trace = false;
  /// required by the learned modes
  const LstmModel* model = nullptr;
};

struct InstanceReport {
  std::string name;
  SolveMetrics metrics;
  bool converged = true;
  Iterate solution;  // unscaled
  std::vector<TraceRow> trace;
  std::vector<std::string> trace_notes;
};

// Equilibrates, runs the selected engine on the scaled problem and reports
// metrics of the unscaled solution. Wall time covers everything but I/O.
InstanceReport SolveInstance(const BoxQp& prob, const PipelineOptions& opts);

// Solves every problem on a pool of `threads` workers; results keep the input
// order.
std::vector<InstanceReport> SolveBatch(const std::vector<BoxQp>& problems,
                                       const PipelineOptions& opts,
                                       int threads);

// FNV-1a 64-bit hash.
std::uint64_t Fnv1a(const std::string& text);

struct ReportHeader {
  std::uint64_t seed = 0;
  std::string config;
};

// Per-instance rows followed by a "mean" row; columns
// instance,objective,mean_ineq,mean_eq,factorizations,iterations,time_s,status.
void WriteRunReport(std::ostream& out, const std::vector<InstanceReport>& rows,
                    const ReportHeader& header);

const char* GitRevision();

}  // namespace iadmm

#endif  // IADMM_PIPELINE_HPP_
