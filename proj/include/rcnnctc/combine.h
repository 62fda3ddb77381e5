// include/rcnnctc/combine.h

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

#ifndef RCNNCTC_COMBINE_H_
#define RCNNCTC_COMBINE_H_

#include <map>
#include <string>
#include <vector>

#include "rcnnctc/hypothesis.h"
#include "rcnnctc/metrics.h"

namespace rcnnctc {

// Word transition network for one utterance: a linear sequence of slots,
// each holding competing word arcs plus at most one null (BLANK) arc for
// systems that skip the slot. Votes on a slot always sum to the number of
// systems merged so far.
struct WtnArc {
  std::string word;  // empty string marks the BLANK arc
  int votes = 0;
  double sum_confidence = 0.0;
  double max_confidence = 0.0;
  double sum_start = 0.0;
  double sum_duration = 0.0;

  bool IsBlank() const { return word.empty(); }
  double MeanConfidence() const {
    return votes > 0 ? sum_confidence / votes : 0.0;
  }
  double MeanStart() const { return votes > 0 ? sum_start / votes : 0.0; }
  double MeanDuration() const {
    return votes > 0 ? sum_duration / votes : 0.0;
  }
};

struct WtnSlot {
  std::vector<WtnArc> arcs;  // in first-seen order
  double sum_midpoint = 0.0;
  int word_instances = 0;

  // Mean midpoint of the word instances aligned here, in normalized time.
  double SlotTime() const {
    return word_instances > 0 ? sum_midpoint / word_instances : 0.0;
  }
  const WtnArc *FindArc(const std::string &word) const;
  WtnArc *FindArc(const std::string &word);
  int TotalVotes() const;
};

struct Wtn {
  std::string utterance_id;
  std::string base_system;
  std::vector<std::string> merged_systems;  // base first, then merge order
  std::vector<WtnSlot> slots;

  int SystemCount() const { return static_cast<int>(merged_systems.size()); }
};

// Rescales word times by the total duration so all systems share the [0, 1]
// domain. Requires a valid hypothesis.
Hypothesis NormalizeTime(const Hypothesis &hyp);

// Builds the network from time-normalized hypotheses for one utterance. The
// hypothesis with the most words seeds the slot sequence (ties to the
// lexicographically smaller system id); the others merge in system-id order
// via an edit alignment against the slots, with ties broken by total time
// distance between paired words and slots, then toward pairing over
// deletion over insertion.
Wtn BuildWtn(const std::vector<Hypothesis> &hyps);

enum class VoteScheme { kFrequency, kFreqAvgConf, kFreqMaxConf };

// Parses "frequency", "freq_avg_conf", "freq_max_conf".
VoteScheme VoteSchemeFromName(const std::string &name);
std::string VoteSchemeName(VoteScheme scheme);

struct VoteOptions {
  VoteScheme scheme = VoteScheme::kFrequency;
  double alpha = 0.3;             // weight on the frequency term
  double blank_confidence = 0.3;  // stand-in confidence for BLANK arcs

  void Validate() const;
};

// Picks the best arc per slot by alpha * votes/N + (1 - alpha) * conf, where
// conf is 0 (frequency; alpha forced to 1), the arc's mean confidence, or
// its max confidence. Ties prefer a word over BLANK, then the smaller word.
// Winning BLANK arcs emit nothing.
Hypothesis Vote(const Wtn &wtn, const VoteOptions &options);

struct CombineResult {
  std::vector<Hypothesis> hypotheses;  // sorted by utterance id
  std::vector<std::string> warnings;
};

// Full pipeline over several systems' 1-best outputs: per utterance,
// normalize, build the network, vote. Utterances covered by a single system
// pass through unchanged with a warning; a single input system is returned
// verbatim.
CombineResult Combine(const std::vector<std::vector<Hypothesis>> &systems,
                      const VoteOptions &options);

enum class NBestMode { kTake1Best, kPoolAll };

NBestMode NBestModeFromName(const std::string &name);

// Turns ranked hypothesis lists into combinable systems. take_1best keeps
// each system's rank-0 hypothesis. pool_all makes one pseudo-system per
// (system, rank) after dropping duplicate transcripts within a system's
// list for an utterance.
std::vector<std::vector<Hypothesis>> IngestNBest(
    const std::vector<std::vector<NBestEntry>> &ranked_systems,
    NBestMode mode);

// Reference positions matched under a minimal edit alignment.
std::vector<bool> CorrectWords(const std::vector<std::string> &hyp,
                               const std::vector<std::string> &ref);

struct SystemTranscripts {
  std::string system_id;
  TranscriptMap transcripts;
};

SystemTranscripts TranscriptsOfSystem(const std::vector<Hypothesis> &hyps);

// Multiple-system correct word rate: the fraction of reference words matched
// by at least one system, aggregated over the corpus.
double ComputeMcwr(const std::vector<SystemTranscripts> &systems,
                   const RefMap &refs);

struct SelectionStep {
  std::string system_id;
  double mcwr;  // of the selected set after adding this system
};

struct SelectionResult {
  std::vector<SelectionStep> steps;
  std::vector<std::string> selected;  // ids in selection order
};

// Greedy forward selection by MCWR gain on held-out references. Stops when
// the best gain drops below threshold; ties prefer the lexicographically
// smaller system id.
SelectionResult SelectSubsystems(const std::vector<SystemTranscripts> &pool,
                                 const RefMap &refs, double threshold);

}  // namespace rcnnctc

#endif  // RCNNCTC_COMBINE_H_
