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

#include "iadmm/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <ostream>

#include <json.hpp>

#include "iadmm/error.hpp"

namespace iadmm {

static_assert(std::endian::native == std::endian::little,
              "file formats assume a little-endian host");

namespace {

constexpr char kProblemMagic[8] = {'I', 'A', 'D', 'M', 'M', 'Q', 'P', '\0'};
constexpr char kCheckpointMagic[8] = {'I', 'A', 'D', 'M', 'M', 'C', 'K', '\0'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::uint32_t kSparseFlag = 1;

template <class T>
void Put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T Get(std::istream& in) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) Fail(ErrorKind::kFormat, "unexpected end of file");
  return value;
}

void PutDoubles(std::ostream& out, const double* data, std::size_t count) {
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(count * sizeof(double)));
}

void GetDoubles(std::istream& in, double* data, std::size_t count) {
  in.read(reinterpret_cast<char*>(data),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) Fail(ErrorKind::kFormat, "unexpected end of file");
}

void CheckMagic(std::istream& in, const char (&magic)[8], const char* what) {
  char buf[8];
  in.read(buf, 8);
  if (!in || std::memcmp(buf, magic, 8) != 0)
    Fail(ErrorKind::kFormat, std::string("not a ") + what + " file");
  const auto version = Get<std::uint32_t>(in);
  if (version != kFormatVersion)
    Fail(ErrorKind::kFormat, std::string("unsupported ") + what +
                                 " version " + std::to_string(version));
}

void WriteMatrix(std::ostream& out, const Matrix& M, bool sparse) {
  if (!sparse) {
    PutDoubles(out, M.data(), static_cast<std::size_t>(M.size()));
    return;
  }
  std::uint64_t nnz = 0;
  for (Eigen::Index i = 0; i < M.size(); ++i) nnz += M.data()[i] != 0.0;
  Put<std::uint64_t>(out, nnz);
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      if (M(i, j) != 0.0) {
        Put<std::uint64_t>(out, static_cast<std::uint64_t>(i));
        Put<std::uint64_t>(out, static_cast<std::uint64_t>(j));
        Put<double>(out, M(i, j));
      }
}

Matrix ReadMatrix(std::istream& in, std::uint64_t rows, std::uint64_t cols,
                  bool sparse) {
  Matrix M = Matrix::Zero(static_cast<Eigen::Index>(rows),
                          static_cast<Eigen::Index>(cols));
  if (!sparse) {
    GetDoubles(in, M.data(), static_cast<std::size_t>(M.size()));
    return M;
  }
  const auto nnz = Get<std::uint64_t>(in);
  Require(nnz <= rows * cols, ErrorKind::kFormat, "too many triplets");
  for (std::uint64_t t = 0; t < nnz; ++t) {
    const auto i = Get<std::uint64_t>(in);
    const auto j = Get<std::uint64_t>(in);
    const auto v = Get<double>(in);
    Require(i < rows && j < cols, ErrorKind::kFormat,
            "triplet index out of range");
    M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
  }
  return M;
}

Vector ReadVector(std::istream& in, std::uint64_t size) {
  Vector v(static_cast<Eigen::Index>(size));
  GetDoubles(in, v.data(), size);
  return v;
}

constexpr std::uint64_t kMaxDim = 1ULL << 24;

}  // namespace

void WriteProblem(std::ostream& out, const BoxQp& prob, bool sparse) {
  out.write(kProblemMagic, 8);
  Put<std::uint32_t>(out, kFormatVersion);
  Put<std::uint32_t>(out, sparse ? kSparseFlag : 0u);
  Put<std::uint64_t>(out, static_cast<std::uint64_t>(prob.n()));
  Put<std::uint64_t>(out, static_cast<std::uint64_t>(prob.m()));
  WriteMatrix(out, prob.Q, sparse);
  WriteMatrix(out, prob.A, sparse);
  PutDoubles(out, prob.p.data(), static_cast<std::size_t>(prob.n()));
  PutDoubles(out, prob.l.data(), static_cast<std::size_t>(prob.m()));
  PutDoubles(out, prob.u.data(), static_cast<std::size_t>(prob.m()));
  if (!out) Fail(ErrorKind::kIo, "failed to write problem");
}

BoxQp ReadProblem(std::istream& in) {
  CheckMagic(in, kProblemMagic, "problem");
  const auto flags = Get<std::uint32_t>(in);
  Require((flags & ~kSparseFlag) == 0, ErrorKind::kFormat,
          "unknown problem flags");
  const bool sparse = flags & kSparseFlag;
  const auto n = Get<std::uint64_t>(in);
  const auto m = Get<std::uint64_t>(in);
  Require(n >= 1 && n < kMaxDim && m < kMaxDim, ErrorKind::kFormat,
          "implausible problem dimensions");
  BoxQp prob;
  prob.Q = ReadMatrix(in, n, n, sparse);
  prob.A = ReadMatrix(in, m, n, sparse);
  prob.p = ReadVector(in, n);
  prob.l = ReadVector(in, m);
  prob.u = ReadVector(in, m);
  prob.Validate();
  return prob;
}

void SaveProblem(const std::string& path, const BoxQp& prob, bool sparse) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorKind::kIo, "cannot open '" + path + "' for writing");
  WriteProblem(out, prob, sparse);
}

BoxQp LoadProblem(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open '" + path + "'");
  return ReadProblem(in);
}

void WriteTensors(std::ostream& out, const std::vector<TensorEntry>& entries) {
  out.write(kCheckpointMagic, 8);
  Put<std::uint32_t>(out, kFormatVersion);
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(entries.size()));
  for (const TensorEntry& e : entries) {
    std::uint64_t count = 1;
    for (std::uint64_t d : e.dims) count *= d;
    Require(count == e.data.size(), ErrorKind::kInvalidArgument,
            "tensor '" + e.name + "' shape does not match its data");
    Put<std::uint32_t>(out, static_cast<std::uint32_t>(e.name.size()));
    out.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    Put<std::uint32_t>(out, static_cast<std::uint32_t>(e.dims.size()));
    for (std::uint64_t d : e.dims) Put<std::uint64_t>(out, d);
    PutDoubles(out, e.data.data(), e.data.size());
  }
  if (!out) Fail(ErrorKind::kIo, "failed to write checkpoint");
}

std::vector<TensorEntry> ReadTensors(std::istream& in) {
  CheckMagic(in, kCheckpointMagic, "checkpoint");
  const auto count = Get<std::uint32_t>(in);
  std::vector<TensorEntry> entries;
  for (std::uint32_t t = 0; t < count; ++t) {
    TensorEntry e;
    const auto len = Get<std::uint32_t>(in);
    Require(len < 4096, ErrorKind::kFormat, "tensor name too long");
    e.name.resize(len);
    in.read(e.name.data(), len);
    const auto ndim = Get<std::uint32_t>(in);
    Require(ndim <= 8, ErrorKind::kFormat, "too many tensor dimensions");
    std::uint64_t size = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      e.dims.push_back(Get<std::uint64_t>(in));
      size *= e.dims.back();
      Require(size < (1ULL << 32), ErrorKind::kFormat, "tensor too large");
    }
    e.data.resize(size);
    GetDoubles(in, e.data.data(), size);
    entries.push_back(std::move(e));
  }
  return entries;
}

namespace {

TensorEntry Scalar(const std::string& name, double v) {
  return {name, {1}, {v}};
}

template <class M>
TensorEntry FromEigen(const std::string& name, const M& t) {
  TensorEntry e;
  e.name = name;
  if constexpr (M::ColsAtCompileTime == 1) {
    e.dims = {static_cast<std::uint64_t>(t.size())};
  } else {
    e.dims = {static_cast<std::uint64_t>(t.rows()),
              static_cast<std::uint64_t>(t.cols())};
  }
  e.data.assign(t.data(), t.data() + t.size());
  return e;
}

void AppendModel(std::vector<TensorEntry>& out, const LstmModel& model,
                 const std::string& prefix) {
  model.ForEachTensor([&](const char* name, const auto& t) {
    out.push_back(FromEigen(prefix + name, t));
  });
}

void AppendConfig(std::vector<TensorEntry>& out, const UnrollConfig& cfg) {
  out.push_back(Scalar("config.K", cfg.K));
  out.push_back(Scalar("config.T", cfg.T));
  out.push_back(Scalar("config.h", cfg.h));
  out.push_back(Scalar("config.sigma", cfg.sigma));
  out.push_back(Scalar("meta.residuals_scaled", 1.0));
}

using EntryMap = std::map<std::string, const TensorEntry*>;

EntryMap Index(const std::vector<TensorEntry>& entries) {
  EntryMap map;
  for (const TensorEntry& e : entries) map[e.name] = &e;
  return map;
}

const TensorEntry& Find(const EntryMap& map, const std::string& name) {
  const auto it = map.find(name);
  if (it == map.end())
    Fail(ErrorKind::kFormat, "checkpoint lacks '" + name + "'");
  return *it->second;
}

double GetScalar(const EntryMap& map, const std::string& name) {
  const TensorEntry& e = Find(map, name);
  Require(e.data.size() == 1, ErrorKind::kFormat, name + " is not a scalar");
  return e.data[0];
}

UnrollConfig ReadConfig(const EntryMap& map) {
  UnrollConfig cfg;
  cfg.K = static_cast<int>(GetScalar(map, "config.K"));
  cfg.T = static_cast<int>(GetScalar(map, "config.T"));
  cfg.h = static_cast<int>(GetScalar(map, "config.h"));
  cfg.sigma = GetScalar(map, "config.sigma");
  cfg.Validate();
  return cfg;
}

LstmModel ReadModel(const EntryMap& map, const UnrollConfig& cfg,
                    const std::string& prefix) {
  LstmModel model;
  model.config = cfg;
  model.lstm = LstmParams::Zeros(cfg.h);
  model.adapt = AdaptiveParams::Initialize(cfg.K);
  model.ForEachTensor([&](const char* name, auto& t) {
    const TensorEntry& e = Find(map, prefix + name);
    Require(e.data.size() == static_cast<std::size_t>(t.size()),
            ErrorKind::kFormat,
            "tensor '" + prefix + name + "' has the wrong shape");
    std::memcpy(t.data(), e.data.data(), e.data.size() * sizeof(double));
  });
  Require(model.lstm.AllFinite() && model.adapt.alpha_raw.allFinite() &&
              model.adapt.rho_raw.allFinite(),
          ErrorKind::kFormat, "checkpoint holds non-finite parameters");
  return model;
}

const char* kLogColumns[] = {"epoch",     "train_loss",    "val_loss",
                             "val_obj",   "val_mean_ineq", "val_mean_eq",
                             "wall_time"};

}  // namespace

void SaveModel(const std::string& path, const LstmModel& model) {
  std::vector<TensorEntry> entries;
  AppendConfig(entries, model.config);
  AppendModel(entries, model, "");
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorKind::kIo, "cannot open '" + path + "' for writing");
  WriteTensors(out, entries);
}

void SaveCheckpoint(const std::string& path, const TrainState& state) {
  std::vector<TensorEntry> entries;
  AppendConfig(entries, state.best.config);
  AppendModel(entries, state.best, "");
  AppendModel(entries, state.model, "train.current.");
  AppendModel(entries, state.adam.m, "adam.m.");
  AppendModel(entries, state.adam.v, "adam.v.");
  entries.push_back(Scalar("adam.step", static_cast<double>(state.adam.step)));
  entries.push_back(Scalar("train.epochs_done", state.epochs_done));
  entries.push_back(Scalar("train.since_improvement", state.since_improvement));
  entries.push_back(Scalar("train.best_epoch", state.best_epoch));
  entries.push_back(Scalar("train.best_val_loss", state.best_val_loss));
  const std::size_t rows = state.log.size();
  std::vector<double> log_data;
  log_data.reserve(rows * 7);
  for (const EpochLog& e : state.log) {
    log_data.insert(log_data.end(),
                    {static_cast<double>(e.epoch), e.train_loss, e.val_loss,
                     e.val_obj, e.val_mean_ineq, e.val_mean_eq, e.wall_time});
  }
  entries.push_back({"train.log", {rows, 7}, std::move(log_data)});

  // Write then rename so an interrupted run never leaves a torn file.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) Fail(ErrorKind::kIo, "cannot open '" + tmp + "' for writing");
    WriteTensors(out, entries);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    Fail(ErrorKind::kIo, "cannot move checkpoint into '" + path + "'");
}

LstmModel LoadModel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open '" + path + "'");
  const std::vector<TensorEntry> entries = ReadTensors(in);
  const EntryMap map = Index(entries);
  return ReadModel(map, ReadConfig(map), "");
}

TrainState LoadTrainState(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open '" + path + "'");
  const std::vector<TensorEntry> entries = ReadTensors(in);
  const EntryMap map = Index(entries);
  const UnrollConfig cfg = ReadConfig(map);
  TrainState s;
  s.best = ReadModel(map, cfg, "");
  s.model = ReadModel(map, cfg, "train.current.");
  s.adam.m = ReadModel(map, cfg, "adam.m.");
  s.adam.v = ReadModel(map, cfg, "adam.v.");
  s.adam.step = static_cast<long>(GetScalar(map, "adam.step"));
  s.epochs_done = static_cast<int>(GetScalar(map, "train.epochs_done"));
  s.since_improvement =
      static_cast<int>(GetScalar(map, "train.since_improvement"));
  s.best_epoch = static_cast<int>(GetScalar(map, "train.best_epoch"));
  s.best_val_loss = GetScalar(map, "train.best_val_loss");
  const TensorEntry& log = Find(map, "train.log");
  Require(log.dims.size() == 2 && log.dims[1] == 7, ErrorKind::kFormat,
          "malformed training log");
  for (std::uint64_t r = 0; r < log.dims[0]; ++r) {
    const double* row = log.data.data() + r * 7;
    s.log.push_back({static_cast<int>(row[0]), row[1], row[2], row[3], row[4],
                     row[5], row[6]});
  }
  return s;
}

void WriteTrainingLog(std::ostream& out, const std::vector<EpochLog>& log) {
  for (int c = 0; c < 7; ++c) out << (c ? "," : "") << kLogColumns[c];
  out << '\n';
  const auto old_precision = out.precision(17);
  for (const EpochLog& e : log) {
    out << e.epoch << ',' << e.train_loss << ',' << e.val_loss << ','
        << e.val_obj << ',' << e.val_mean_ineq << ',' << e.val_mean_eq << ','
        << e.wall_time << '\n';
  }
  out.precision(old_precision);
}

void WriteManifest(std::ostream& out, const GeneratorSpec& spec,
                   const std::vector<ManifestEntry>& entries) {
  nlohmann::ordered_json j;
  j["family"] = ToString(spec.family);
  j["seed"] = spec.seed;
  j["n"] = spec.n;
  j["m_ineq"] = spec.m_ineq;
  j["m_eq"] = spec.m_eq;
  j["count"] = spec.count;
  j["alpha_reg"] = spec.alpha_reg;
  if (spec.lambda_svm)
    j["lambda_svm"] = *spec.lambda_svm;
  else
    j["lambda_svm"] = "sampled";
  if (spec.family == Family::kRandomQp)
    j["note"] =
        "bounds are l = b - |s|, u = b + |s| with s ~ N(0,1) drawn per row";
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (const ManifestEntry& e : entries)
    files.push_back({{"file", e.file}, {"split", e.split}});
  j["instances"] = files;
  out << j.dump(2) << '\n';
}

}  // namespace iadmm
