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

#ifndef IADMM_IO_HPP_
#define IADMM_IO_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "iadmm/datasets.hpp"
#include "iadmm/qp.hpp"
#include "iadmm/training.hpp"

namespace iadmm {

// Binary problem file; see docs/formats.md. The loader validates the problem.
void WriteProblem(std::ostream& out, const BoxQp& prob, bool sparse = false);
BoxQp ReadProblem(std::istream& in);
void SaveProblem(const std::string& path, const BoxQp& prob,
                 bool sparse = false);
BoxQp LoadProblem(const std::string& path);

/// One named array of a checkpoint.
struct TensorEntry {
  std::string name;
  std::vector<std::uint64_t> dims;
  std::vector<double> data;
};

void WriteTensors(std::ostream& out, const std::vector<TensorEntry>& entries);
std::vector<TensorEntry> ReadTensors(std::istream& in);

// The checkpoint holds the best model under the plain tensor names, the
// unroll configuration, and the resume state (current model, Adam moments,
// counters and the epoch log).
void SaveCheckpoint(const std::string& path, const TrainState& state);
TrainState LoadTrainState(const std::string& path);
LstmModel LoadModel(const std::string& path);
// A bare model (no training state), e.g. a hand-built one.
void SaveModel(const std::string& path, const LstmModel& model);

void WriteTrainingLog(std::ostream& out, const std::vector<EpochLog>& log);

struct ManifestEntry {
  std::string file;
  std::string split;  // train | validation | test
};

void WriteManifest(std::ostream& out, const GeneratorSpec& spec,
                   const std::vector<ManifestEntry>& entries);

}  // namespace iadmm

#endif  // IADMM_IO_HPP_
