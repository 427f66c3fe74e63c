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

#ifndef IADMM_TESTS_TEST_UTIL_HPP_
#define IADMM_TESTS_TEST_UTIL_HPP_

#include <gtest/gtest.h>

#include "iadmm/error.hpp"

#define EXPECT_ERROR_KIND(stmt, expected_kind)                     \
  do {                                                             \
    try {                                                          \
      stmt;                                                        \
      ADD_FAILURE() << "expected " #expected_kind;                 \
    } catch (const ::iadmm::Error& e) {                            \
      EXPECT_EQ(e.kind(), expected_kind) << e.what();              \
    }                                                              \
  } while (0)

#endif  // IADMM_TESTS_TEST_UTIL_HPP_
