// include/rcnnctc/hypothesis.h

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

#ifndef RCNNCTC_HYPOTHESIS_H_
#define RCNNCTC_HYPOTHESIS_H_

#include <map>
#include <string>
#include <vector>

namespace rcnnctc {

struct TimedWord {
  std::string word;
  double confidence = 0.0;  // in [0, 1]
  double start_s = 0.0;
  double duration_s = 0.0;

  double Midpoint() const { return start_s + 0.5 * duration_s; }
  double End() const { return start_s + duration_s; }
};

// One system's output for one utterance: a timed, confidence-annotated word
// sequence.
struct Hypothesis {
  std::string utterance_id;
  std::string system_id;
  double total_duration_s = 0.0;
  std::vector<TimedWord> words;

  // Enforces: total duration positive; confidences in [0, 1]; word intervals
  // ordered, non-overlapping, inside [0, total duration]; no empty word
  // strings.
  void Validate() const;

  std::vector<std::string> Transcript() const;
};

// One line of a ranked-hypothesis (N-best) file. Plain 1-best files have
// rank 0 and no stored log-probability.
struct NBestEntry {
  Hypothesis hyp;
  int rank = 0;
  double log_prob = 0.0;
  bool has_log_prob = false;
};

// JSONL: one object per line,
//   {"utt": ..., "system": ..., "total_dur": ..., "words": [{"w": ...,
//    "conf": ..., "start": ..., "dur": ...}, ...]}
// plus optional "rank" and "logp". Readers ignore unknown fields; a
// malformed or incomplete line is an error naming the line number.
std::string HypothesisToJsonLine(const NBestEntry &entry);
NBestEntry HypothesisFromJsonLine(const std::string &line, int lineno);

std::vector<NBestEntry> ReadHypothesesJsonl(const std::string &path);
void WriteHypothesesJsonl(const std::string &path,
                          const std::vector<NBestEntry> &entries);
void Write1BestJsonl(const std::string &path,
                     const std::vector<Hypothesis> &hyps);

// Flattens entries to their hypotheses, dropping rank information.
std::vector<Hypothesis> OneBestOf(const std::vector<NBestEntry> &entries);

// Reference transcripts: one line per utterance, "utt_id w1 w2 ...".
using RefMap = std::map<std::string, std::vector<std::string>>;
RefMap ReadReferences(const std::string &path);
void WriteReferences(const std::string &path, const RefMap &refs);

}  // namespace rcnnctc

#endif  // RCNNCTC_HYPOTHESIS_H_
