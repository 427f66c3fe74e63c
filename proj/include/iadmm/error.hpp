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

#ifndef IADMM_ERROR_HPP_
#define IADMM_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace iadmm {

enum class ErrorKind {
  kDimensionMismatch,
  kInvalidProblem,
  kSingularMatrix,
  kNonFinite,
  kConvergenceFailure,
  kInfeasibleConstants,
  kRankDeficient,
  kDatasetEmpty,
  kIo,
  kFormat,
  kInvalidArgument,
};

const char* ToString(ErrorKind kind);

// Every hard failure in the library is an Error. Soft failures (iteration
// limits) are reported through status fields instead.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void Require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) Fail(kind, what);
}

}  // namespace iadmm

#endif  // IADMM_ERROR_HPP_
