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

#include "iadmm/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <ostream>
#include <thread>

#include "iadmm/admm.hpp"
#include "iadmm/error.hpp"
#include "iadmm/precond.hpp"

#ifndef IADMM_GIT_REVISION
#define IADMM_GIT_REVISION "unknown"
#endif

namespace iadmm {

const char* GitRevision() { return IADMM_GIT_REVISION; }

std::string ToString(SolveMode mode) {
  switch (mode) {
    case SolveMode::kExact: return "exact";
    case SolveMode::kInexact: return "inexact";
    case SolveMode::kLstm: return "lstm";
    case SolveMode::kLstmFr: return "lstm-fr";
  }
  return "unknown";
}

SolveMode ParseSolveMode(const std::string& name) {
  for (SolveMode m : {SolveMode::kExact, SolveMode::kInexact, SolveMode::kLstm,
                      SolveMode::kLstmFr})
    if (ToString(m) == name) return m;
  Fail(ErrorKind::kInvalidArgument, "unknown mode '" + name + "'");
}

namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

InstanceReport SolveInstance(const BoxQp& prob, const PipelineOptions& opts) {
  const bool learned =
      opts.mode == SolveMode::kLstm || opts.mode == SolveMode::kLstmFr;
  Require(!learned || opts.model != nullptr, ErrorKind::kInvalidArgument,
          "learned modes need a checkpoint");
  const auto t0 = Clock::now();
  const PreparedProblem prep = Prepare(prob, opts.ruiz_iter);
  const BoxQp& scaled = prep.scaled;

  InstanceReport report;
  Iterate scaled_solution;
  switch (opts.mode) {
    case SolveMode::kExact: {
      AdmmSettings s = DefaultSettings(scaled);
      s.eps_abs = opts.eps_abs;
      s.eps_rel = opts.eps_rel;
      s.max_iter = opts.max_iter;
      const SolveResult r = SolveExact(scaled, s);
      scaled_solution = r.iterate;
      report.metrics = r.metrics;
      report.converged = r.status == SolveStatus::kConverged;
      break;
    }
    case SolveMode::kInexact: {
      AdmmSettings s = DefaultSettings(scaled);
      s.max_iter = opts.max_iter;
      const double rho_eff = EffectiveRho(s.rho);
      const InexactConstants consts =
          ComputeConstants(ComputeSpectralEstimates(scaled), rho_eff);
      InexactResult r =
          RunInexactAdmm(scaled, s, consts, InnerSolverConfig{}, opts.eps_tol);
      scaled_solution = r.iterate;
      report.metrics = r.metrics;
      report.converged = r.status == SolveStatus::kConverged;
      if (opts.trace) {
        report.trace = std::move(r.trace);
        char note[160];
        std::snprintf(note, sizeof note,
                      "rho_eff = %.17g (geometric mean of diag(rho)) used for "
                      "scalar rho terms",
                      rho_eff);
        report.trace_notes.push_back(note);
      }
      break;
    }
    case SolveMode::kLstm:
    case SolveMode::kLstmFr: {
      const UnrollResult u = Unroll(scaled, *opts.model);
      scaled_solution = u.trajectory.back();
      report.metrics.iteration_count = opts.model->config.K;
      if (opts.trace && !u.rho.empty()) {
        const InexactConstants consts = ComputeConstants(
            ComputeSpectralEstimates(scaled), EffectiveRho(u.rho.front()));
        report.trace = MonitorTrajectory(scaled, u.trajectory, u.rho, consts);
        report.trace_notes.push_back(
            "rho_eff = geometric mean of diag(rho^k), per iteration");
      }
      if (opts.mode == SolveMode::kLstmFr) {
        const Vector rho =
            u.rho.empty() ? DefaultRho(scaled) : u.rho.back();
        const SolveResult r = RestoreFeasibility(
            scaled, scaled_solution, rho, opts.restore_iters);
        scaled_solution = r.iterate;
        report.metrics.factorization_count = r.metrics.factorization_count;
        report.metrics.iteration_count += r.metrics.iteration_count;
      }
      break;
    }
  }
  report.solution = UnscaleSolution(scaled_solution, prep.scaling);
  FillMetrics(prob, report.solution, report.metrics);
  report.metrics.wall_time_seconds = Seconds(t0);
  return report;
}

std::vector<InstanceReport> SolveBatch(const std::vector<BoxQp>& problems,
                                       const PipelineOptions& opts,
                                       int threads) {
  std::vector<InstanceReport> out(problems.size());
  std::vector<std::exception_ptr> errors(problems.size());
  const int workers = static_cast<int>(std::max<std::size_t>(
      1, std::min<std::size_t>(std::max(threads, 1), problems.size())));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < problems.size(); i = next++) {
      try {
        out[i] = SolveInstance(problems[i], opts);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::uint64_t Fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void WriteRunReport(std::ostream& out, const std::vector<InstanceReport>& rows,
                    const ReportHeader& header) {
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(Fnv1a(header.config)));
  out << "# seed=" << header.seed << '\n';
  out << "# git_revision=" << GitRevision() << '\n';
  out << "# config_hash=" << hash << '\n';
  out << "instance,objective,mean_ineq,mean_eq,factorizations,iterations,"
         "time_s,status\n";
  const auto old_precision = out.precision(17);
  SolveMetrics mean;
  double fac = 0.0, iter = 0.0;
  for (const InstanceReport& r : rows) {
    const SolveMetrics& m = r.metrics;
    out << r.name << ',' << m.objective << ',' << m.mean_ineq_violation << ','
        << m.mean_eq_violation << ',' << m.factorization_count << ','
        << m.iteration_count << ',' << m.wall_time_seconds << ','
        << (r.converged ? "converged" : "max_iter") << '\n';
    mean.objective += m.objective;
    mean.mean_ineq_violation += m.mean_ineq_violation;
    mean.mean_eq_violation += m.mean_eq_violation;
    fac += m.factorization_count;
    iter += m.iteration_count;
    mean.wall_time_seconds += m.wall_time_seconds;
  }
  if (!rows.empty()) {
    const double inv = 1.0 / static_cast<double>(rows.size());
    out << "mean," << mean.objective * inv << ','
        << mean.mean_ineq_violation * inv << ','
        << mean.mean_eq_violation * inv << ',' << fac * inv << ','
        << iter * inv << ',' << mean.wall_time_seconds * inv << ",\n";
  }
  out.precision(old_precision);
}

}  // namespace iadmm
