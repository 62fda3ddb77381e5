// src/features.cc

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

#include "rcnnctc/features.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "binio.h"
#include "rcnnctc/error.h"

namespace rcnnctc {

namespace {
constexpr char kMagic[] = "FBNK0001";
constexpr size_t kMagicLen = 8;
constexpr uint32_t kMaxExtent = 1u << 24;
}  // namespace

void WriteFeatureFile(const std::string &path, const FeatureMap &features,
                      double frame_shift_s) {
  if (!(frame_shift_s > 0.0))
    RC_ERR << "frame shift must be positive, got " << frame_shift_s;
  std::ofstream os(path, std::ios::binary);
  if (!os) RC_ERR << "cannot open '" << path << "' for writing";
  os.write(kMagic, kMagicLen);
  binio::WriteF64(os, frame_shift_s);
  binio::WriteU64(os, features.size());
  for (const auto &kv : features) {
    const std::string &id = kv.first;
    const Tensor &t = kv.second;
    if (id.empty()) RC_ERR << "feature record has an empty utterance id";
    if (t.Rank() != 3)
      RC_SHAPE_ERR << "features for '" << id
                   << "' must be [channels, bins, frames], got "
                   << ShapeToString(t.shape());
    binio::WriteU32(os, static_cast<uint32_t>(id.size()));
    os.write(id.data(), static_cast<std::streamsize>(id.size()));
    binio::WriteU32(os, static_cast<uint32_t>(t.Dim(0)));
    binio::WriteU32(os, static_cast<uint32_t>(t.Dim(1)));
    binio::WriteU32(os, static_cast<uint32_t>(t.Dim(2)));
    for (int64_t i = 0; i < t.NumElements(); ++i)
      binio::WriteF32(os, static_cast<float>(t[i]));
  }
  os.flush();
  if (!os) RC_ERR << "failed writing '" << path << "'";
}

FeatureMap ReadFeatureFile(const std::string &path, double *frame_shift_s) {
  std::ifstream is(path, std::ios::binary);
  if (!is) RC_ERR << "cannot open feature file '" << path << "'";
  char magic[kMagicLen];
  binio::ReadBytes(is, magic, kMagicLen, "feature file magic");
  if (std::string(magic, kMagicLen) != kMagic)
    RC_ERR << "'" << path << "' is not a feature file (bad magic)";
  double shift = binio::ReadF64(is, "frame shift");
  if (!(shift > 0.0)) RC_ERR << "feature file has bad frame shift " << shift;
  if (frame_shift_s) *frame_shift_s = shift;
  uint64_t count = binio::ReadU64(is, "utterance count");
  FeatureMap features;
  for (uint64_t r = 0; r < count; ++r) {
    uint32_t id_len = binio::ReadU32(is, "utterance id length");
    std::string id = binio::ReadString(is, id_len, "utterance id");
    if (id.empty()) RC_ERR << "feature record " << r << " has an empty id";
    uint32_t channels = binio::ReadU32(is, "channel count");
    uint32_t bins = binio::ReadU32(is, "bin count");
    uint32_t frames = binio::ReadU32(is, "frame count");
    if (channels == 0 || bins == 0 || frames == 0 || channels > kMaxExtent ||
        bins > kMaxExtent || frames > kMaxExtent)
      RC_ERR << "features for '" << id << "' have bad extents [" << channels
             << ", " << bins << ", " << frames << "]";
    Tensor t({static_cast<int64_t>(channels), static_cast<int64_t>(bins),
              static_cast<int64_t>(frames)});
    for (int64_t i = 0; i < t.NumElements(); ++i)
      t[i] = static_cast<double>(binio::ReadF32(is, "feature data"));
    if (!features.emplace(std::move(id), std::move(t)).second)
      RC_ERR << "feature file repeats an utterance id";
  }
  binio::RequireEof(is, "feature record");
  return features;
}

FeatureMap ReadFeatureCsv(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) RC_ERR << "cannot open feature CSV '" << path << "'";
  // id -> frame -> bin values
  std::map<std::string, std::map<int64_t, std::vector<double>>> rows;
  int64_t bins = -1;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() < 3)
      RC_ERR << "feature CSV line " << lineno
             << " needs utt_id, frame_index and at least one bin";
    const std::string &id = cells[0];
    if (id.empty()) RC_ERR << "feature CSV line " << lineno << " has an "
                           << "empty utterance id";
    int64_t frame = 0;
    try {
      size_t pos = 0;
      frame = std::stoll(cells[1], &pos);
      if (pos != cells[1].size()) throw std::invalid_argument(cells[1]);
    } catch (const std::exception &) {
      RC_ERR << "feature CSV line " << lineno << " has bad frame index '"
             << cells[1] << "'";
    }
    if (frame < 0)
      RC_ERR << "feature CSV line " << lineno << " has negative frame index";
    std::vector<double> values;
    values.reserve(cells.size() - 2);
    for (size_t c = 2; c < cells.size(); ++c) {
      try {
        size_t pos = 0;
        values.push_back(std::stod(cells[c], &pos));
        if (pos != cells[c].size()) throw std::invalid_argument(cells[c]);
      } catch (const std::exception &) {
        RC_ERR << "feature CSV line " << lineno << " has bad value '"
               << cells[c] << "'";
      }
    }
    if (bins < 0) bins = static_cast<int64_t>(values.size());
    if (static_cast<int64_t>(values.size()) != bins)
      RC_ERR << "feature CSV line " << lineno << " has "
             << values.size() << " bins, expected " << bins;
    if (!rows[id].emplace(frame, std::move(values)).second)
      RC_ERR << "feature CSV repeats frame " << frame << " of utterance '"
             << id << "'";
  }
  if (rows.empty()) RC_ERR << "feature CSV '" << path << "' is empty";

  FeatureMap features;
  for (const auto &kv : rows) {
    const auto &frames = kv.second;
    int64_t n = static_cast<int64_t>(frames.size());
    int64_t expect = 0;
    for (const auto &fk : frames) {
      if (fk.first != expect)
        RC_ERR << "utterance '" << kv.first << "' is missing frame "
               << expect;
      ++expect;
    }
    Tensor t = Tensor::Zeros({1, bins, n});
    for (const auto &fk : frames)
      for (int64_t b = 0; b < bins; ++b)
        t.At(0, b, fk.first) = fk.second[static_cast<size_t>(b)];
    features.emplace(kv.first, std::move(t));
  }
  return features;
}

namespace {

// delta[t] = (x[min(t+1, T-1)] - x[max(t-1, 0)]) / 2 per bin.
void FillDeltas(const Tensor &src, int64_t src_ch, Tensor *dst,
                int64_t dst_ch) {
  int64_t bins = dst->Dim(1);
  int64_t frames = dst->Dim(2);
  for (int64_t b = 0; b < bins; ++b) {
    for (int64_t t = 0; t < frames; ++t) {
      int64_t prev = t > 0 ? t - 1 : 0;
      int64_t next = t + 1 < frames ? t + 1 : frames - 1;
      dst->At(dst_ch, b, t) =
          0.5 * (src.At(src_ch, b, next) - src.At(src_ch, b, prev));
    }
  }
}

}  // namespace

Tensor StackDeltas(const Tensor &fbank) {
  if (fbank.Rank() != 2)
    RC_SHAPE_ERR << "deltas expect [bins, frames], got "
                 << ShapeToString(fbank.shape());
  int64_t bins = fbank.Dim(0);
  int64_t frames = fbank.Dim(1);
  Tensor out = Tensor::Zeros({3, bins, frames});
  for (int64_t b = 0; b < bins; ++b)
    for (int64_t t = 0; t < frames; ++t) out.At(0, b, t) = fbank.At(b, t);
  FillDeltas(out, 0, &out, 1);
  FillDeltas(out, 1, &out, 2);
  return out;
}

}  // namespace rcnnctc
