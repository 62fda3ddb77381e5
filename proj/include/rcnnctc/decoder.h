// include/rcnnctc/decoder.h

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

#ifndef RCNNCTC_DECODER_H_
#define RCNNCTC_DECODER_H_

#include <string>
#include <vector>

#include "rcnnctc/ctc.h"
#include "rcnnctc/hypothesis.h"
#include "rcnnctc/tensor.h"

namespace rcnnctc {

// Maps downsampled frame indices back to seconds: one output frame covers
// time_downsample input frames of frame_shift_s each.
struct DecodeTiming {
  double frame_shift_s = 0.01;
  int time_downsample = 1;

  void Validate() const;
  double FrameToSeconds(int frame) const {
    return frame * time_downsample * frame_shift_s;
  }
};

// Best-path decoding: per-frame argmax, collapse, then words split at the
// delimiter label. Each emitted label's time is its run's highest-posterior
// frame (ties to the earliest); a word runs from its first peak to one frame
// past its last, and its confidence is the minimum of its labels' peak
// posteriors.
Hypothesis GreedyDecode(const Tensor &logprobs, const Alphabet &alphabet,
                        const DecodeTiming &timing,
                        const std::string &utterance_id,
                        const std::string &system_id);

// Prefix beam search over collapsed label sequences, tracking blank and
// non-blank path mass per prefix in log space. Returns up to nbest distinct
// prefixes ranked by total probability; each carries its log-probability and
// rank, with word timing from a Viterbi forced alignment of the prefix.
std::vector<NBestEntry> PrefixBeamDecode(const Tensor &logprobs,
                                         const Alphabet &alphabet,
                                         int beam_width, int nbest,
                                         const DecodeTiming &timing,
                                         const std::string &utterance_id,
                                         const std::string &system_id);

}  // namespace rcnnctc

#endif  // RCNNCTC_DECODER_H_
