// include/rcnnctc/ctc.h

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

#ifndef RCNNCTC_CTC_H_
#define RCNNCTC_CTC_H_

#include <string>
#include <vector>

#include "rcnnctc/autodiff.h"
#include "rcnnctc/tensor.h"

namespace rcnnctc {

// Label inventory. Index 0 is always the blank; index 1, when the alphabet
// carries words, is the word delimiter.
struct Alphabet {
  std::vector<std::string> labels;
  static constexpr int kBlankIndex = 0;
  static constexpr int kDelimiterIndex = 1;

  int Size() const { return static_cast<int>(labels.size()); }
  const std::string &LabelOf(int index) const;
  // Index of a label string; -1 if absent.
  int IndexOf(const std::string &label) const;
  void Validate() const;

  // blank, delimiter, then one label per distinct character (sorted).
  static Alphabet ForCharacters(const std::vector<std::string> &words);
};

// Compact form for configs: the single-character labels after the blank,
// concatenated (the delimiter is the first character). Throws if any label
// is not a single character.
std::string AlphabetToString(const Alphabet &alphabet);
Alphabet AlphabetFromString(const std::string &chars);

// A non-blank target label sequence.
struct LabelSeq {
  std::vector<int> symbols;

  int Length() const { return static_cast<int>(symbols.size()); }
  // Number of adjacent equal pairs; each needs a separating blank frame.
  int AdjacentRepeats() const;
  // Shortest frame count that admits this sequence.
  int MinFrames() const { return Length() + AdjacentRepeats(); }
  void Validate(int n_labels) const;
};

// A frame-level label assignment of length T'.
using CtcPath = std::vector<int>;

// Merge adjacent repeats, then delete blanks.
LabelSeq CollapsePath(const CtcPath &path, const Alphabet &alphabet);

// ln P(z|X) by the forward recursion over the blank-interleaved state
// sequence, entirely in log space. logprobs is [T', n_labels] of per-frame
// log-probabilities. Throws if T' < z.MinFrames().
double CtcLogLikelihood(const Tensor &logprobs, const LabelSeq &z);

// Reference oracle: enumerates every path of length T' and sums the
// probabilities of those that collapse to z. Throws if n_labels^T' > 1e7.
// Returns -inf when no path collapses to z.
double BruteForceLogLikelihood(const Tensor &logprobs, const LabelSeq &z);

// Forward/backward state lattices, both including the frame emission, so
// logsumexp_s(alpha[t][s] + beta[t][s] - logprob(t, label(s))) == ln P for
// every t.
struct CtcLattice {
  std::vector<std::vector<double>> log_alpha;  // [T'][2|z|+1]
  std::vector<std::vector<double>> log_beta;
  double log_likelihood;
};
CtcLattice CtcForwardBackward(const Tensor &logprobs, const LabelSeq &z);

// Posterior label occupancy per frame: gamma[t][k] = P(frame t emits label k
// | paths collapse to z). Rows sum to 1.
Tensor CtcLabelPosteriors(const Tensor &logprobs, const LabelSeq &z);

// Gradient of -ln P(z|X) with respect to the logits feeding log_softmax:
// softmax(logits) - posteriors. Rows sum to 0.
Tensor CtcLogitGradient(const Tensor &logprobs, const LabelSeq &z);

// Graph op: scalar -ln P(z|X) from a [T', n_labels] log-probability node.
Var CtcLoss(const Var &logprobs, const LabelSeq &z);

enum class LossReduction { kMean, kSum };

// Mean (default) or sum of per-utterance -ln P over a batch. Any
// inadmissible member is a hard error listing the offending utterance ids.
Var CtcBatchLoss(const std::vector<Var> &logprob_batch,
                 const std::vector<LabelSeq> &label_batch,
                 const std::vector<std::string> &utterance_ids,
                 LossReduction reduction = LossReduction::kMean);

// Best single path through the state lattice for z (forced alignment).
// Returns, per label occurrence, the frame span [first, last] the Viterbi
// path spends in that state and the in-span frame with the highest emission
// log-probability.
struct AlignedLabel {
  int label;
  int first_frame;
  int last_frame;
  int peak_frame;
  double peak_logprob;
};
std::vector<AlignedLabel> ViterbiAlign(const Tensor &logprobs,
                                       const LabelSeq &z);

}  // namespace rcnnctc

#endif  // RCNNCTC_CTC_H_
