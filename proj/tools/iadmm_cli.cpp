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

// Command-line front end. Links only the C API.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "iadmm/iadmm.h"

namespace {

namespace fs = std::filesystem;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

int ExitCode(iadmm_status s) {
  switch (s) {
    case IADMM_OK: return 0;
    case IADMM_ERR_ARGUMENT: return kExitUsage;
    case IADMM_ERR_DATA: return kExitData;
    case IADMM_ERR_NUMERICAL:
    case IADMM_ERR_INTERNAL: return kExitNumerical;
  }
  return kExitNumerical;
}

// Thrown to unwind with a status after the message has been printed.
struct Abort {
  int code;
};

void Check(iadmm_status s, const std::string& context) {
  if (s == IADMM_OK) return;
  std::fprintf(stderr, "iadmm: %s: %s\n", context.c_str(), iadmm_last_error());
  throw Abort{ExitCode(s)};
}

int ThreadsFromEnv() {
  const char* v = std::getenv("IADMM_THREADS");
  if (!v || !*v) return 1;
  const int t = std::atoi(v);
  return t > 0 ? t : 1;
}

bool WildcardMatch(const char* pattern, const char* text) {
  if (*pattern == '\0') return *text == '\0';
  if (*pattern == '*')
    return WildcardMatch(pattern + 1, text) ||
           (*text != '\0' && WildcardMatch(pattern, text + 1));
  if (*text == '\0') return false;
  return (*pattern == '?' || *pattern == *text) &&
         WildcardMatch(pattern + 1, text + 1);
}

// Expands file-name wildcards (* and ?) in the last path component.
std::vector<std::string> ExpandInputs(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  for (const std::string& a : args) {
    const fs::path p(a);
    const std::string name = p.filename().string();
    if (name.find_first_of("*?") == std::string::npos) {
      out.push_back(a);
      continue;
    }
    const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
    std::vector<std::string> matches;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(dir, ec))
      if (entry.is_regular_file() &&
          WildcardMatch(name.c_str(), entry.path().filename().string().c_str()))
        matches.push_back(entry.path().string());
    std::sort(matches.begin(), matches.end());
    out.insert(out.end(), matches.begin(), matches.end());
  }
  if (out.empty()) {
    std::fprintf(stderr, "iadmm: no input problems\n");
    throw Abort{kExitUsage};
  }
  return out;
}

struct Problems {
  std::vector<iadmm_problem*> items;
  std::vector<std::string> names;
  ~Problems() {
    for (iadmm_problem* p : items) iadmm_problem_free(p);
  }
};

void LoadProblems(const std::vector<std::string>& paths, Problems& out) {
  for (const std::string& path : paths) {
    iadmm_problem* p = nullptr;
    Check(iadmm_problem_load(path.c_str(), &p), path);
    out.items.push_back(p);
    out.names.push_back(fs::path(path).filename().string());
  }
}

struct Results {
  std::vector<iadmm_result*> items;
  ~Results() {
    for (iadmm_result* r : items) iadmm_result_free(r);
  }
};

struct ModelHandle {
  iadmm_model* model = nullptr;
  ~ModelHandle() { iadmm_model_free(model); }
};

struct SolveFlags {
  std::vector<std::string> inputs;
  std::string mode = "exact";
  std::string checkpoint;
  std::string out = "-";
  std::string trace_dir;
  double eps_tol = 1e-4;
  double eps = 1e-6;
  int max_iter = 20000;
  std::uint64_t seed = 0;
  int count = 0;
};

void PrepareSolve(const SolveFlags& f, iadmm_solve_options& opts,
                  ModelHandle& model) {
  iadmm_solve_options_init(&opts);
  Check(iadmm_parse_mode(f.mode.c_str(), &opts.mode), "--mode");
  opts.eps_tol = f.eps_tol;
  opts.eps_abs = f.eps;
  opts.eps_rel = f.eps;
  opts.max_iter = f.max_iter;
  opts.trace = f.trace_dir.empty() ? 0 : 1;
  const bool learned =
      opts.mode == IADMM_MODE_LSTM || opts.mode == IADMM_MODE_LSTM_FR;
  if (learned && f.checkpoint.empty()) {
    std::fprintf(stderr, "iadmm: mode %s requires --checkpoint\n",
                 f.mode.c_str());
    throw Abort{kExitUsage};
  }
  if (learned)
    Check(iadmm_model_load(f.checkpoint.c_str(), &model.model),
          f.checkpoint);
}

std::string ConfigString(const SolveFlags& f, const char* command) {
  std::ostringstream s;
  s << command << " mode=" << f.mode << " eps=" << f.eps
    << " eps_tol=" << f.eps_tol << " max_iter=" << f.max_iter
    << " checkpoint=" << f.checkpoint;
  return s.str();
}

void WriteOutputs(const SolveFlags& f, const Problems& probs,
                  const Results& results, const char* command) {
  if (!f.trace_dir.empty()) {
    std::error_code ec;
    fs::create_directories(f.trace_dir, ec);
    for (std::size_t i = 0; i < results.items.size(); ++i) {
      const std::string path =
          (fs::path(f.trace_dir) /
           (fs::path(probs.names[i]).stem().string() + ".trace.csv"))
              .string();
      Check(iadmm_result_write_trace(results.items[i], path.c_str()), path);
    }
  }
  std::vector<const char*> names;
  for (const std::string& n : probs.names) names.push_back(n.c_str());
  const std::string config = ConfigString(f, command);
  Check(iadmm_write_report(f.out.c_str(), results.items.data(), names.data(),
                           static_cast<int>(results.items.size()), f.seed,
                           config.c_str()),
        f.out);
}

int RunSolve(const SolveFlags& f) {
  iadmm_solve_options opts;
  ModelHandle model;
  PrepareSolve(f, opts, model);
  Problems probs;
  LoadProblems(ExpandInputs(f.inputs), probs);
  Results results;
  for (std::size_t i = 0; i < probs.items.size(); ++i) {
    iadmm_result* r = nullptr;
    Check(iadmm_solve(probs.items[i], model.model, &opts, &r), probs.names[i]);
    results.items.push_back(r);
  }
  WriteOutputs(f, probs, results, "solve");
  return 0;
}

int RunBench(const SolveFlags& f) {
  iadmm_solve_options opts;
  ModelHandle model;
  PrepareSolve(f, opts, model);
  std::vector<std::string> paths = ExpandInputs(f.inputs);
  if (f.count > 0 && static_cast<std::size_t>(f.count) < paths.size())
    paths.resize(static_cast<std::size_t>(f.count));
  if (paths.size() > 100) {
    std::fprintf(stderr, "iadmm: bench takes at most 100 instances\n");
    return kExitUsage;
  }
  Problems probs;
  LoadProblems(paths, probs);
  Results results;
  results.items.assign(probs.items.size(), nullptr);
  const int threads = ThreadsFromEnv();
  const auto t0 = std::chrono::steady_clock::now();
  Check(iadmm_solve_batch(probs.items.data(),
                          static_cast<int>(probs.items.size()), model.model,
                          &opts, threads, results.items.data()),
        "bench");
  const double total =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  WriteOutputs(f, probs, results, "bench");
  std::fprintf(stderr, "bench: %zu instances, %d threads, total %.6f s\n",
               probs.items.size(), threads, total);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inexact ADMM and learned LSTM solvers for convex QPs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(iadmm_version()));

  // generate
  iadmm_generate_options gen;
  iadmm_generate_options_init(&gen);
  std::string family = gen.family;
  std::string gen_out = "data";
  double lambda_svm = 0.0;
  auto* cmd_gen = app.add_subcommand("generate", "Write seeded instances");
  cmd_gen->add_option("--family", family,
                      "convex_qp_rhs|convex_qp_all|random_qp|equality_qp|svm")
      ->check(CLI::IsMember({"convex_qp_rhs", "convex_qp_all", "random_qp",
                             "equality_qp", "svm"}));
  cmd_gen->add_option("--n", gen.n, "variables")->check(CLI::PositiveNumber);
  cmd_gen->add_option("--m-ineq", gen.m_ineq, "inequality rows")
      ->check(CLI::NonNegativeNumber);
  cmd_gen->add_option("--m-eq", gen.m_eq, "equality rows")
      ->check(CLI::NonNegativeNumber);
  cmd_gen->add_option("--count", gen.count, "instances")
      ->check(CLI::NonNegativeNumber);
  cmd_gen->add_option("--seed", gen.seed, "random seed");
  cmd_gen->add_option("--lambda", lambda_svm, "fixed SVM weight");
  cmd_gen->add_option("--out", gen_out, "output directory");

  // solve / bench share flags
  SolveFlags solve;
  auto add_solve_flags = [](CLI::App* cmd, SolveFlags& f) {
    cmd->add_option("inputs", f.inputs, "problem files (wildcards allowed)")
        ->required();
    cmd->add_option("--mode", f.mode, "exact|inexact|lstm|lstm-fr")
        ->check(CLI::IsMember({"exact", "inexact", "lstm", "lstm-fr"}));
    cmd->add_option("--checkpoint", f.checkpoint, "trained model");
    cmd->add_option("--out", f.out, "report path, - for stdout");
    cmd->add_option("--trace", f.trace_dir,
                    "directory for per-instance condition traces");
    cmd->add_option("--eps-tol", f.eps_tol, "composite residual tolerance")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--eps", f.eps, "exact-mode tolerance")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--max-iter", f.max_iter, "iteration limit")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--seed", f.seed, "recorded in the report");
  };
  auto* cmd_solve = app.add_subcommand("solve", "Solve problems");
  add_solve_flags(cmd_solve, solve);
  SolveFlags bench;
  auto* cmd_bench =
      app.add_subcommand("bench", "Solve a batch concurrently (IADMM_THREADS)");
  add_solve_flags(cmd_bench, bench);
  cmd_bench->add_option("--count", bench.count, "batch size, at most 100")
      ->check(CLI::Range(1, 100));

  // train
  iadmm_train_options tr;
  iadmm_train_options_init(&tr);
  std::string tr_family = tr.data.family;
  std::string checkpoint = "model.ckpt";
  std::string log_path;
  bool resume = false;
  bool quiet = false;
  double violation_tol = 0.0;
  auto* cmd_train = app.add_subcommand("train", "Train the learned solver");
  cmd_train->add_option("--family", tr_family, "instance family")
      ->check(CLI::IsMember({"convex_qp_rhs", "convex_qp_all", "random_qp",
                             "equality_qp", "svm"}));
  cmd_train->add_option("--n", tr.data.n)->check(CLI::PositiveNumber);
  cmd_train->add_option("--m-ineq", tr.data.m_ineq)
      ->check(CLI::NonNegativeNumber);
  cmd_train->add_option("--m-eq", tr.data.m_eq)->check(CLI::NonNegativeNumber);
  cmd_train->add_option("--count", tr.data.count, "dataset size")
      ->check(CLI::PositiveNumber);
  cmd_train->add_option("--seed", tr.data.seed);
  cmd_train->add_option("--K", tr.K, "unroll length")
      ->check(CLI::PositiveNumber);
  cmd_train->add_option("--T", tr.T, "truncation length")
      ->check(CLI::PositiveNumber);
  cmd_train->add_option("--hidden", tr.hidden, "LSTM width")
      ->check(CLI::PositiveNumber);
  cmd_train->add_option("--lr", tr.learning_rate)->check(CLI::PositiveNumber);
  cmd_train->add_option("--batch", tr.batch_size)->check(CLI::PositiveNumber);
  cmd_train->add_option("--patience", tr.patience)
      ->check(CLI::NonNegativeNumber);
  cmd_train->add_option("--max-epochs", tr.max_epochs)
      ->check(CLI::PositiveNumber);
  cmd_train->add_option("--violation-tol", violation_tol,
                        "early stopping needs violations below this");
  cmd_train->add_option("--checkpoint", checkpoint, "checkpoint path");
  cmd_train->add_option("--out", log_path, "training log CSV");
  cmd_train->add_flag("--resume", resume, "continue from --checkpoint");
  cmd_train->add_flag("--quiet", quiet, "no per-epoch progress");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*cmd_gen) {
      gen.family = family.c_str();
      gen.lambda_svm = lambda_svm;
      Check(iadmm_generate(&gen, gen_out.c_str()), "generate");
      std::printf("wrote %d instances to %s\n", gen.count, gen_out.c_str());
      return 0;
    }
    if (*cmd_solve) return RunSolve(solve);
    if (*cmd_bench) return RunBench(bench);
    if (*cmd_train) {
      tr.data.family = tr_family.c_str();
      tr.violation_tolerance = violation_tol;
      tr.threads = ThreadsFromEnv();
      tr.verbose = quiet ? 0 : 1;
      Check(iadmm_train(&tr, checkpoint.c_str(),
                        log_path.empty() ? nullptr : log_path.c_str(),
                        resume ? 1 : 0),
            "train");
      return 0;
    }
  } catch (const Abort& a) {
    return a.code;
  }
  return kExitUsage;
}
