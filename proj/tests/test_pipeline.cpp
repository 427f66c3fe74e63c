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

#include <cstdio>
#include <sstream>

#include "iadmm/datasets.hpp"
#include "iadmm/pipeline.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace iadmm {
namespace {

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> Fields(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, ',');) out.push_back(f);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

std::vector<BoxQp> SmallConvex(int count) {
  GeneratorSpec s;
  s.family = Family::kConvexQpRhs;
  s.n = 10;
  s.m_ineq = 5;
  s.m_eq = 5;
  s.seed = 21;
  s.count = count;
  return Generate(s);
}

LstmModel SmallModel() {
  UnrollConfig cfg;
  cfg.K = 8;
  cfg.T = 8;
  cfg.h = 4;
  return LstmModel::Initialize(cfg, 3);
}

TEST(Fnv1a, ReferenceVectors) {
  EXPECT_EQ(Fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(Fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(Fnv1a("foobar"), 0x85944171f73967e8ULL);
}

TEST(Modes, NamesRoundTrip) {
  for (SolveMode m : {SolveMode::kExact, SolveMode::kInexact, SolveMode::kLstm,
                      SolveMode::kLstmFr})
    EXPECT_EQ(ParseSolveMode(ToString(m)), m);
  EXPECT_EQ(ToString(SolveMode::kLstmFr), "lstm-fr");
  EXPECT_ERROR_KIND(ParseSolveMode("osqp"), ErrorKind::kInvalidArgument);
}

TEST(Report, SchemaAndMeans) {
  std::vector<InstanceReport> rows(2);
  rows[0].name = "a.qp";
  rows[0].metrics = {-2.0, 0.5, 0.25, 1, 10, 0.5};
  rows[1].name = "b.qp";
  rows[1].metrics = {-4.0, 0.0, 0.75, 0, 30, 1.5};
  rows[1].converged = false;
  std::ostringstream out;
  WriteRunReport(out, rows, {7, "mode=exact"});
  const std::vector<std::string> lines = Lines(out.str());
  ASSERT_EQ(lines.size(), 7u);
  EXPECT_EQ(lines[0], "# seed=7");
  EXPECT_EQ(lines[1].rfind("# git_revision=", 0), 0u);
  char hash[40];
  std::snprintf(hash, sizeof hash, "# config_hash=%016llx",
                static_cast<unsigned long long>(Fnv1a("mode=exact")));
  EXPECT_EQ(lines[2], hash);
  EXPECT_EQ(lines[3],
            "instance,objective,mean_ineq,mean_eq,factorizations,iterations,"
            "time_s,status");
  EXPECT_EQ(lines[4], "a.qp,-2,0.5,0.25,1,10,0.5,converged");
  EXPECT_EQ(lines[5], "b.qp,-4,0,0.75,0,30,1.5,max_iter");
  EXPECT_EQ(lines[6], "mean,-3,0.25,0.5,0.5,20,1,");
}

// Aggregates are recomputed from the printed rows.
TEST(Report, MeanRowMatchesRecomputedMeans) {
  PipelineOptions opts;
  opts.mode = SolveMode::kExact;
  const auto reports = SolveBatch(SmallConvex(5), opts, 1);
  std::ostringstream out;
  WriteRunReport(out, reports, {});
  const std::vector<std::string> lines = Lines(out.str());
  std::vector<double> sums(6, 0.0);
  int rows = 0;
  std::vector<double> mean;
  for (std::size_t i = 4; i < lines.size(); ++i) {
    const auto f = Fields(lines[i]);
    ASSERT_EQ(f.size(), 8u) << lines[i];
    if (f[0] == "mean") {
      for (int c = 1; c <= 6; ++c) mean.push_back(std::stod(f[c]));
      continue;
    }
    for (int c = 1; c <= 6; ++c) sums[c - 1] += std::stod(f[c]);
    ++rows;
  }
  ASSERT_EQ(rows, 5);
  ASSERT_EQ(mean.size(), 6u);
  for (int c = 0; c < 6; ++c)
    EXPECT_NEAR(mean[c], sums[c] / rows, 1e-12 * (1 + std::abs(mean[c])));
}

TEST(SolveInstance, ExactModeOnTinyEqualityQp) {
  GeneratorSpec s;
  s.family = Family::kEqualityQp;
  s.n = 6;
  s.m_eq = 3;
  s.seed = 2;
  const BoxQp prob = Generate(s)[0];
  PipelineOptions opts;
  const InstanceReport r = SolveInstance(prob, opts);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.metrics.factorization_count, 1);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.3f", r.metrics.mean_eq_violation);
  EXPECT_STREQ(buf, "0.000");

  // Against the KKT system solved directly.
  const auto [x, lambda] =
      oracle::EqualityQp(prob.Q, prob.p, prob.A, prob.l);
  EXPECT_LE((r.solution.x - x).cwiseAbs().maxCoeff(), 1e-4);
  EXPECT_NEAR(r.metrics.objective, EvalObjective(prob, x),
              1e-5 * (1 + std::abs(r.metrics.objective)));
}

TEST(SolveInstance, FactorizationCountsPerMode) {
  const BoxQp prob = SmallConvex(1)[0];
  const LstmModel model = SmallModel();
  PipelineOptions opts;
  opts.model = &model;
  opts.mode = SolveMode::kLstm;
  const InstanceReport lstm = SolveInstance(prob, opts);
  EXPECT_EQ(lstm.metrics.factorization_count, 0);
  EXPECT_EQ(lstm.metrics.iteration_count, 8);
  opts.mode = SolveMode::kLstmFr;
  const InstanceReport fr = SolveInstance(prob, opts);
  EXPECT_EQ(fr.metrics.factorization_count, 1);
  EXPECT_EQ(fr.metrics.iteration_count, 8 + 20);
  EXPECT_LE(fr.metrics.mean_eq_violation, lstm.metrics.mean_eq_violation);
  opts.mode = SolveMode::kInexact;
  EXPECT_EQ(SolveInstance(prob, opts).metrics.factorization_count, 0);
}

TEST(SolveInstance, LearnedModesNeedAModel) {
  const BoxQp prob = SmallConvex(1)[0];
  PipelineOptions opts;
  opts.mode = SolveMode::kLstm;
  EXPECT_ERROR_KIND(SolveInstance(prob, opts), ErrorKind::kInvalidArgument);
}

TEST(SolveInstance, InexactTraceHasOneRowPerIteration) {
  const BoxQp prob = SmallConvex(1)[0];
  PipelineOptions opts;
  opts.mode = SolveMode::kInexact;
  opts.trace = true;
  opts.max_iter = 50;
  const InstanceReport r = SolveInstance(prob, opts);
  EXPECT_EQ(static_cast<int>(r.trace.size()), r.metrics.iteration_count);
  EXPECT_FALSE(r.trace_notes.empty());
}

TEST(SolveBatch, IndependentOfThreadCount) {
  const std::vector<BoxQp> probs = SmallConvex(6);
  const LstmModel model = SmallModel();
  for (SolveMode mode : {SolveMode::kExact, SolveMode::kLstmFr}) {
    PipelineOptions opts;
    opts.mode = mode;
    opts.model = &model;
    const auto one = SolveBatch(probs, opts, 1);
    const auto four = SolveBatch(probs, opts, 4);
    ASSERT_EQ(one.size(), four.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
      EXPECT_EQ(one[i].solution.x, four[i].solution.x);
      EXPECT_EQ(one[i].metrics.objective, four[i].metrics.objective);
      EXPECT_EQ(one[i].metrics.iteration_count,
                four[i].metrics.iteration_count);
    }
  }
}

}  // namespace
}  // namespace iadmm
