// include/rcnnctc/features.h

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

#ifndef RCNNCTC_FEATURES_H_
#define RCNNCTC_FEATURES_H_

#include <map>
#include <string>
#include <vector>

#include "rcnnctc/ctc.h"
#include "rcnnctc/tensor.h"

namespace rcnnctc {

// Feature tensors are [channels, bins, frames].
using FeatureMap = std::map<std::string, Tensor>;

// One labeled utterance.
struct Utterance {
  Tensor features;
  std::vector<std::string> transcript;
};

struct Corpus {
  std::map<std::string, Utterance> utterances;
  Alphabet alphabet;
  double frame_shift_s = 0.01;
};

// Binary feature format, little-endian throughout:
//   magic "FBNK0001" (8 bytes)
//   float64 frame shift in seconds
//   uint64 utterance count
//   per utterance: uint32 id length, id bytes, uint32 channels, uint32 bins,
//                  uint32 frames, float32 data (row-major [ch, bin, frame])
// Utterances are written in id order; values store as 32-bit floats.
void WriteFeatureFile(const std::string &path, const FeatureMap &features,
                      double frame_shift_s);

FeatureMap ReadFeatureFile(const std::string &path, double *frame_shift_s);

// CSV interchange: header-free rows "utt_id,frame_index,bin_0,...,bin_K-1".
// Frames of an utterance must cover 0..F-1 exactly once; all rows must agree
// on the bin count. Yields single-channel tensors [1, bins, frames].
FeatureMap ReadFeatureCsv(const std::string &path);

// First differences with clamped edges, zero for constant input:
// delta[t] = (x[min(t+1, T-1)] - x[max(t-1, 0)]) / 2.
// fbank is [bins, frames]; the result stacks [fbank, delta, delta-delta] as
// [3, bins, frames].
Tensor StackDeltas(const Tensor &fbank);

}  // namespace rcnnctc

#endif  // RCNNCTC_FEATURES_H_
