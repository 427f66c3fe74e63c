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

#ifndef IADMM_DATASETS_HPP_
#define IADMM_DATASETS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "iadmm/qp.hpp"

namespace iadmm {

enum class Family { kConvexQpRhs, kConvexQpAll, kRandomQp, kEqualityQp, kSvm };

std::string ToString(Family family);
// Accepts convex_qp_rhs, convex_qp_all, random_qp, equality_qp, svm.
Family ParseFamily(const std::string& name);

struct GeneratorSpec {
  Family family = Family::kConvexQpRhs;
  int n = 0;
  int m_ineq = 0;
  int m_eq = 0;
  std::uint64_t seed = 0;
  int count = 1;
  /// shift in Q = M M' + alpha I
  double alpha_reg = 1e-2;
  /// SVM weight; sampled per instance as |N(0,1)| + 1e-3 when empty
  std::optional<double> lambda_svm;
};

// Convex QP: diagonal Q, stacked rows G x <= c (l = -inf) and A x = b.
// `convex_qp_rhs` shares everything but b across instances.
std::vector<BoxQp> GenerateConvexQp(const GeneratorSpec& spec);
std::vector<BoxQp> GenerateRandomQp(const GeneratorSpec& spec);
std::vector<BoxQp> GenerateEqualityQp(const GeneratorSpec& spec);
// Variables (x, t) with x in R^n and t in R^m_ineq.
std::vector<BoxQp> GenerateSvm(const GeneratorSpec& spec);

std::vector<BoxQp> Generate(const GeneratorSpec& spec);

// Data behind one convex-QP instance, exposed for feasibility checks.
struct ConvexQpParts {
  Matrix G;
  Matrix A;
  Vector b;
  Vector c;
};
ConvexQpParts SplitConvexQp(const BoxQp& prob, int m_ineq);

struct DatasetSplit {
  std::vector<int> train;
  std::vector<int> validation;
  std::vector<int> test;
};

// Contiguous 94% / 1% / 5% split (940 / 10 / 50 for 1000 instances).
DatasetSplit SplitIndices(int count);

}  // namespace iadmm

#endif  // IADMM_DATASETS_HPP_
