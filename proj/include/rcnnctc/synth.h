// include/rcnnctc/synth.h

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

#ifndef RCNNCTC_SYNTH_H_
#define RCNNCTC_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "rcnnctc/features.h"

namespace rcnnctc {

// Synthetic filterbank corpus: each character of a word renders as a fixed
// Gaussian-in-frequency template held for char_frames frames, words are
// separated by silent gaps, white noise sits on top, and channels 2 and 3
// carry deltas. Fully determined by the seed.
struct SynthConfig {
  int vocab_size = 10;
  int n_utterances = 250;
  int words_min = 1;
  int words_max = 3;
  int freq_bins = 40;
  int char_frames = 8;
  int gap_frames = 8;
  int pad_frames = 4;
  double noise_sigma = 0.05;
  double frame_shift_s = 0.01;
  double train_fraction = 0.8;
  double dev_fraction = 0.1;  // remainder is the test split
  uint64_t seed = 1;

  void Validate() const;
};

struct SynthCorpus {
  std::vector<std::string> vocabulary;
  Corpus train, dev, test;
};

// Deterministic: equal configs give bit-identical corpora. Splits are
// disjoint by utterance id.
SynthCorpus SynthesizeCorpus(const SynthConfig &config);

}  // namespace rcnnctc

#endif  // RCNNCTC_SYNTH_H_
