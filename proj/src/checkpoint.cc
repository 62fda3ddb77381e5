// src/checkpoint.cc

// Copyright 2026  The rcnnctc Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "rcnnctc/checkpoint.h"

#include <fstream>
#include <vector>

#include "binio.h"
#include "rcnnctc/error.h"

namespace rcnnctc {

namespace {
constexpr char kMagic[] = "RCNNCK01";
constexpr size_t kMagicLen = 8;
constexpr uint32_t kMaxRank = 16;
constexpr int64_t kMaxElements = 1LL << 30;
}  // namespace

void WriteCheckpoint(const std::string &path,
                     const std::map<std::string, Tensor> &state) {
  std::ofstream os(path, std::ios::binary);
  if (!os) RC_ERR << "cannot open '" << path << "' for writing";
  os.write(kMagic, kMagicLen);
  binio::WriteU64(os, state.size());
  for (const auto &kv : state) {
    const std::string &name = kv.first;
    const Tensor &t = kv.second;
    if (name.empty()) RC_ERR << "checkpoint record has an empty name";
    if (t.Rank() == 0) RC_ERR << "tensor '" << name << "' has rank 0";
    binio::WriteU32(os, static_cast<uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    binio::WriteU32(os, static_cast<uint32_t>(t.Rank()));
    for (int d = 0; d < t.Rank(); ++d)
      binio::WriteU64(os, static_cast<uint64_t>(t.Dim(d)));
    for (int64_t i = 0; i < t.NumElements(); ++i)
      binio::WriteF32(os, static_cast<float>(t[i]));
  }
  os.flush();
  if (!os) RC_ERR << "failed writing '" << path << "'";
}

std::map<std::string, Tensor> ReadCheckpoint(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) RC_ERR << "cannot open checkpoint '" << path << "'";
  char magic[kMagicLen];
  binio::ReadBytes(is, magic, kMagicLen, "checkpoint magic");
  if (std::string(magic, kMagicLen) != kMagic)
    RC_ERR << "'" << path << "' is not a checkpoint file (bad magic)";
  uint64_t count = binio::ReadU64(is, "checkpoint record count");
  std::map<std::string, Tensor> state;
  for (uint64_t r = 0; r < count; ++r) {
    uint32_t name_len = binio::ReadU32(is, "record name length");
    std::string name = binio::ReadString(is, name_len, "record name");
    if (name.empty()) RC_ERR << "checkpoint record " << r << " has an empty "
                             << "name";
    uint32_t rank = binio::ReadU32(is, "record rank");
    if (rank == 0 || rank > kMaxRank)
      RC_ERR << "tensor '" << name << "' has bad rank " << rank;
    std::vector<int64_t> shape(rank);
    int64_t numel = 1;
    for (uint32_t d = 0; d < rank; ++d) {
      uint64_t e = binio::ReadU64(is, "record extent");
      if (e == 0 || e > static_cast<uint64_t>(kMaxElements))
        RC_ERR << "tensor '" << name << "' has bad extent " << e;
      shape[d] = static_cast<int64_t>(e);
      numel *= shape[d];
      if (numel > kMaxElements)
        RC_ERR << "tensor '" << name << "' is implausibly large";
    }
    Tensor t(shape);
    for (int64_t i = 0; i < numel; ++i)
      t[i] = static_cast<double>(binio::ReadF32(is, "record data"));
    if (!state.emplace(std::move(name), std::move(t)).second)
      RC_ERR << "checkpoint repeats a record name";
  }
  binio::RequireEof(is, "checkpoint record");
  return state;
}

}  // namespace rcnnctc
