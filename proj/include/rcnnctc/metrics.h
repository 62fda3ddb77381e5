// include/rcnnctc/metrics.h

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

#ifndef RCNNCTC_METRICS_H_
#define RCNNCTC_METRICS_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rcnnctc/hypothesis.h"

namespace rcnnctc {

enum class EditOp { kMatch, kSubstitution, kDeletion, kInsertion };

// One step of a minimal edit alignment. hyp_index / ref_index are -1 when
// the step consumes no word on that side (deletion / insertion).
struct AlignStep {
  EditOp op;
  int hyp_index;
  int ref_index;
};

// Minimal word-level edit alignment. Among equal-cost alignments the
// backtrace prefers match, then substitution, then deletion, then insertion.
// Deletions are reference words the hypothesis lacks; insertions are
// hypothesis words the reference lacks.
std::vector<AlignStep> EditAlign(const std::vector<std::string> &hyp,
                                 const std::vector<std::string> &ref);

struct EditCounts {
  int64_t matches = 0;
  int64_t substitutions = 0;
  int64_t deletions = 0;
  int64_t insertions = 0;

  int64_t Errors() const { return substitutions + deletions + insertions; }
  EditCounts &operator+=(const EditCounts &o);
};

EditCounts CountEdits(const std::vector<AlignStep> &steps);

struct UttScore {
  std::string utterance_id;
  EditCounts counts;
  int64_t reference_length = 0;
  bool missing_hypothesis = false;

  double Wer() const;
};

// Corpus-level word error rate: (S + D + I) / total reference length,
// aggregated over utterances. Hypotheses missing an utterance score as all
// deletions and produce a warning; hypothesis utterances absent from the
// references are ignored with a warning.
struct WerReport {
  EditCounts totals;
  int64_t reference_length = 0;
  std::vector<UttScore> per_utterance;  // in reference order
  std::vector<std::string> warnings;

  double Wer() const;
  double WerPercent() const { return 100.0 * Wer(); }
};

using TranscriptMap = std::map<std::string, std::vector<std::string>>;

WerReport ScoreWer(const TranscriptMap &hyps, const RefMap &refs);

TranscriptMap TranscriptsOf(const std::vector<Hypothesis> &hyps);

// Relative reduction in percent: 100 * (baseline - improved) / baseline.
// baseline must be positive.
double WerReduction(double baseline_wer, double improved_wer);

// Plain-text table and JSON renderings of a report.
std::string FormatWerReport(const WerReport &report);
std::string WerReportJson(const WerReport &report);

}  // namespace rcnnctc

#endif  // RCNNCTC_METRICS_H_
