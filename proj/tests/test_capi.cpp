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

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "iadmm/iadmm.h"

namespace {

namespace fs = std::filesystem;

class Workspace : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("iadmm_capi_" +
            std::string(::testing::UnitTest::GetInstance()
                            ->current_test_info()
                            ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Path(const std::string& name) const {
    return (dir_ / name).string();
  }

  // Runs the CLI and returns its exit code.
  int Cli(const std::string& args, const std::string& env = "") const {
    const std::string cmd = env + (env.empty() ? "" : " ") + IADMM_CLI_PATH +
                            " " + args + " >" + Path("stdout.txt") + " 2>" +
                            Path("stderr.txt");
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  }

  std::string Read(const std::string& name) const {
    std::ifstream in(Path(name));
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  // Report body without the timing column.
  std::string StripTimes(const std::string& report) const {
    std::istringstream in(report);
    std::string out;
    for (std::string line; std::getline(in, line);) {
      if (line.rfind("#", 0) == 0) continue;
      std::vector<std::string> f;
      std::istringstream ls(line);
      for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
      if (f.size() >= 7) f[6] = "";
      for (const auto& x : f) out += x + ",";
      out += "\n";
    }
    return out;
  }

  fs::path dir_;
};

void GenerateSmall(const std::string& dir, int count, const char* family,
                   int n, int mi, int me) {
  iadmm_generate_options g;
  iadmm_generate_options_init(&g);
  g.family = family;
  g.n = n;
  g.m_ineq = mi;
  g.m_eq = me;
  g.count = count;
  g.seed = 7;
  ASSERT_EQ(iadmm_generate(&g, dir.c_str()), IADMM_OK) << iadmm_last_error();
}

TEST_F(Workspace, GenerateLoadSolve) {
  GenerateSmall(dir_.string(), 3, "convex_qp_rhs", 8, 4, 3);
  EXPECT_TRUE(fs::exists(Path("manifest.json")));
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir_))
    if (e.path().extension() == ".qp") files.push_back(e.path().string());
  ASSERT_EQ(files.size(), 3u);

  iadmm_problem* prob = nullptr;
  ASSERT_EQ(iadmm_problem_load(files[0].c_str(), &prob), IADMM_OK);
  int n = 0, m = 0;
  ASSERT_EQ(iadmm_problem_dims(prob, &n, &m), IADMM_OK);
  EXPECT_EQ(n, 8);
  EXPECT_EQ(m, 7);

  iadmm_solve_options opts;
  iadmm_solve_options_init(&opts);
  EXPECT_EQ(opts.mode, IADMM_MODE_EXACT);
  iadmm_result* result = nullptr;
  ASSERT_EQ(iadmm_solve(prob, nullptr, &opts, &result), IADMM_OK);
  iadmm_metrics metrics;
  ASSERT_EQ(iadmm_result_metrics(result, &metrics), IADMM_OK);
  EXPECT_EQ(metrics.factorization_count, 1);
  EXPECT_EQ(metrics.converged, 1);
  EXPECT_LE(metrics.mean_eq_violation, 1e-4);
  std::vector<double> x(8);
  EXPECT_EQ(iadmm_result_solution(result, x.data(), 8), IADMM_OK);
  EXPECT_EQ(iadmm_result_solution(result, x.data(), 5), IADMM_ERR_ARGUMENT);

  const char* name = "p";
  const iadmm_result* rs[] = {result};
  ASSERT_EQ(iadmm_write_report(Path("r.csv").c_str(), rs, &name, 1, 1, "c"),
            IADMM_OK);
  EXPECT_NE(Read("r.csv").find("\nmean,"), std::string::npos);

  ASSERT_EQ(iadmm_problem_save(prob, Path("copy.qp").c_str(), 1), IADMM_OK);
  iadmm_result_free(result);
  iadmm_problem_free(prob);
}

TEST_F(Workspace, ErrorsMapToStatusCodes) {
  iadmm_problem* prob = nullptr;
  EXPECT_EQ(iadmm_problem_load(Path("missing.qp").c_str(), &prob),
            IADMM_ERR_DATA);
  EXPECT_EQ(prob, nullptr);
  EXPECT_NE(std::string(iadmm_last_error()).find("missing.qp"),
            std::string::npos);
  EXPECT_EQ(iadmm_problem_load(nullptr, &prob), IADMM_ERR_ARGUMENT);
  iadmm_mode mode;
  EXPECT_EQ(iadmm_parse_mode("lstm-fr", &mode), IADMM_OK);
  EXPECT_EQ(mode, IADMM_MODE_LSTM_FR);
  EXPECT_EQ(iadmm_parse_mode("nope", &mode), IADMM_ERR_ARGUMENT);

  iadmm_generate_options g;
  iadmm_generate_options_init(&g);
  g.family = "lp";
  EXPECT_EQ(iadmm_generate(&g, dir_.c_str()), IADMM_ERR_ARGUMENT);

  GenerateSmall(dir_.string(), 1, "random_qp", 4, 3, 0);
  for (const auto& e : fs::directory_iterator(dir_))
    if (e.path().extension() == ".qp")
      ASSERT_EQ(iadmm_problem_load(e.path().c_str(), &prob), IADMM_OK);
  iadmm_solve_options opts;
  iadmm_solve_options_init(&opts);
  opts.mode = IADMM_MODE_LSTM;
  iadmm_result* r = nullptr;
  EXPECT_EQ(iadmm_solve(prob, nullptr, &opts, &r), IADMM_ERR_ARGUMENT);
  iadmm_problem_free(prob);
  EXPECT_STRNE(iadmm_version(), "");
}

TEST_F(Workspace, CliGenerateWritesFilesAndManifest) {
  ASSERT_EQ(Cli("generate --family equality_qp --n 6 --m-eq 3 --count 3 "
                "--seed 4 --out " + Path("data")),
            0)
      << Read("stderr.txt");
  int qp = 0;
  for (const auto& e : fs::directory_iterator(Path("data")))
    qp += e.path().extension() == ".qp";
  EXPECT_EQ(qp, 3);
  const std::string manifest = Read("data/manifest.json");
  EXPECT_NE(manifest.find("\"equality_qp\""), std::string::npos);
  EXPECT_NE(manifest.find("\"m_ineq\": 0"), std::string::npos);

  ASSERT_EQ(Cli("solve " + Path("data/*.qp") + " --mode exact --out " +
                Path("report.csv")),
            0)
      << Read("stderr.txt");
  const std::string report = Read("report.csv");
  EXPECT_NE(report.find("# config_hash="), std::string::npos);
  EXPECT_NE(report.find("\nmean,"), std::string::npos);
}

TEST_F(Workspace, CliExitCodes) {
  EXPECT_EQ(Cli("generate --family lp --n 3 --out " + Path("x")), 2);
  EXPECT_EQ(Cli("frobnicate"), 2);
  EXPECT_EQ(Cli("solve " + Path("none.qp")), 3);
  {
    std::ofstream junk(Path("junk.qp"));
    junk << "not a problem";
  }
  EXPECT_EQ(Cli("solve " + Path("junk.qp")), 3);
  ASSERT_EQ(Cli("generate --family random_qp --n 4 --m-ineq 2 --count 1 "
                "--out " + Path("d")),
            0);
  EXPECT_EQ(Cli("solve " + Path("d/*.qp") + " --mode lstm"), 2);
  EXPECT_EQ(Cli("solve " + Path("d/*.qp") + " --mode lstm --checkpoint " +
                Path("missing.ckpt")),
            3);
  EXPECT_EQ(Cli("bench " + Path("d/*.qp") + " --count 101"), 2);
}

TEST_F(Workspace, CliTraceFile) {
  ASSERT_EQ(Cli("generate --family convex_qp_rhs --n 6 --m-ineq 3 --m-eq 2 "
                "--count 1 --out " + Path("d")),
            0);
  ASSERT_EQ(Cli("solve " + Path("d/*.qp") + " --mode inexact --max-iter 30 "
                "--trace " + Path("tr") + " --out " + Path("r.csv")),
            0)
      << Read("stderr.txt");
  int traces = 0;
  for (const auto& e : fs::directory_iterator(Path("tr"))) {
    ++traces;
    std::ifstream in(e.path());
    std::string line;
    while (std::getline(in, line) && line.rfind("#", 0) == 0) {
    }
    EXPECT_EQ(line,
              "k,lhs11,rhs11,lhs12,rhs12,lhs13,rhs13,lhs14,rhs14,lhs15,rhs15,"
              "R,E,E_tilde,L_rho");
  }
  EXPECT_EQ(traces, 1);
}

const char* kTrainArgs =
    "train --family convex_qp_rhs --n 5 --m-ineq 2 --m-eq 2 --count 40 "
    "--seed 3 --K 4 --T 2 --hidden 3 --lr 1e-2 --batch 4 --quiet ";

TEST_F(Workspace, CliTrainIsDeterministicAndResumable) {
  ASSERT_EQ(Cli(std::string(kTrainArgs) + "--max-epochs 3 --checkpoint " +
                Path("a.ckpt") + " --out " + Path("a.csv")),
            0)
      << Read("stderr.txt");
  ASSERT_EQ(Cli(std::string(kTrainArgs) + "--max-epochs 3 --checkpoint " +
                Path("b.ckpt") + " --out " + Path("b.csv")),
            0);
  auto drop_time = [](const std::string& csv) {
    std::istringstream in(csv);
    std::string out;
    for (std::string line; std::getline(in, line);)
      out += line.substr(0, line.rfind(',')) + "\n";
    return out;
  };
  const std::string a = drop_time(Read("a.csv"));
  EXPECT_EQ(a, drop_time(Read("b.csv")));
  EXPECT_EQ(a.rfind("epoch,train_loss,val_loss,val_obj,val_mean_ineq,"
                    "val_mean_eq\n", 0),
            0u);

  ASSERT_EQ(Cli(std::string(kTrainArgs) + "--max-epochs 1 --checkpoint " +
                Path("c.ckpt") + " --out " + Path("c.csv")),
            0);
  const std::string one_epoch = Read("c.csv");
  EXPECT_EQ(std::count(one_epoch.begin(), one_epoch.end(), '\n'), 2);
  ASSERT_EQ(Cli(std::string(kTrainArgs) + "--max-epochs 3 --resume "
                "--checkpoint " + Path("c.ckpt") + " --out " + Path("c.csv")),
            0)
      << Read("stderr.txt");
  EXPECT_EQ(drop_time(Read("c.csv")), a);

  iadmm_model* model = nullptr;
  ASSERT_EQ(iadmm_model_load(Path("a.ckpt").c_str(), &model), IADMM_OK);
  iadmm_model_free(model);

  // A trained checkpoint drives both learned modes.
  ASSERT_EQ(Cli("generate --family convex_qp_rhs --n 5 --m-ineq 2 --m-eq 2 "
                "--count 2 --seed 3 --out " + Path("d")),
            0);
  ASSERT_EQ(Cli("solve " + Path("d/*.qp") + " --mode lstm-fr --checkpoint " +
                Path("a.ckpt") + " --out " + Path("fr.csv")),
            0)
      << Read("stderr.txt");
  const std::string fr = Read("fr.csv");
  EXPECT_NE(fr.find("\nmean,"), std::string::npos);
  EXPECT_NE(fr.find(",1,24,"), std::string::npos) << fr;
}

TEST_F(Workspace, CliBenchIsDeterministicAcrossBatchSizes) {
  ASSERT_EQ(Cli("generate --family random_qp --n 8 --m-ineq 5 --count 16 "
                "--seed 2 --out " + Path("d")),
            0);
  ASSERT_EQ(Cli("bench " + Path("d/*.qp") + " --count 1 --out " +
                    Path("b1.csv"),
                "IADMM_THREADS=1"),
            0)
      << Read("stderr.txt");
  ASSERT_EQ(Cli("bench " + Path("d/*.qp") + " --count 16 --out " +
                    Path("b16.csv"),
                "IADMM_THREADS=4"),
            0)
      << Read("stderr.txt");
  EXPECT_NE(Read("stderr.txt").find("16 instances"), std::string::npos);
  ASSERT_EQ(Cli("bench " + Path("d/*.qp") + " --count 16 --out " +
                    Path("b16b.csv"),
                "IADMM_THREADS=1"),
            0);
  EXPECT_EQ(StripTimes(Read("b16.csv")), StripTimes(Read("b16b.csv")));

  // The single-instance batch reproduces the first row of the larger one.
  auto first_row = [&](const std::string& csv) {
    const std::string body = StripTimes(csv);
    const auto a = body.find('\n') + 1;
    return body.substr(a, body.find('\n', a) - a);
  };
  EXPECT_EQ(first_row(Read("b1.csv")), first_row(Read("b16.csv")));
}

}  // namespace
