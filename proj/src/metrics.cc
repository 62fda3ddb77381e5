// src/metrics.cc

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

#include "rcnnctc/metrics.h"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "rcnnctc/error.h"

namespace rcnnctc {

std::vector<AlignStep> EditAlign(const std::vector<std::string> &hyp,
                                 const std::vector<std::string> &ref) {
  const int h = static_cast<int>(hyp.size());
  const int r = static_cast<int>(ref.size());
  // dp[i][j]: minimal edits aligning hyp[0..i) with ref[0..j).
  std::vector<std::vector<int>> dp(h + 1, std::vector<int>(r + 1, 0));
  for (int i = 1; i <= h; ++i) dp[i][0] = i;
  for (int j = 1; j <= r; ++j) dp[0][j] = j;
  for (int i = 1; i <= h; ++i) {
    for (int j = 1; j <= r; ++j) {
      int diag = dp[i - 1][j - 1] + (hyp[i - 1] == ref[j - 1] ? 0 : 1);
      int del = dp[i][j - 1] + 1;
      int ins = dp[i - 1][j] + 1;
      dp[i][j] = std::min(diag, std::min(del, ins));
    }
  }

  std::vector<AlignStep> steps;
  int i = h, j = r;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && hyp[i - 1] == ref[j - 1] &&
        dp[i][j] == dp[i - 1][j - 1]) {
      steps.push_back(AlignStep{EditOp::kMatch, i - 1, j - 1});
      --i, --j;
    } else if (i > 0 && j > 0 && dp[i][j] == dp[i - 1][j - 1] + 1) {
      steps.push_back(AlignStep{EditOp::kSubstitution, i - 1, j - 1});
      --i, --j;
    } else if (j > 0 && dp[i][j] == dp[i][j - 1] + 1) {
      steps.push_back(AlignStep{EditOp::kDeletion, -1, j - 1});
      --j;
    } else {
      steps.push_back(AlignStep{EditOp::kInsertion, i - 1, -1});
      --i;
    }
  }
  std::reverse(steps.begin(), steps.end());
  return steps;
}

EditCounts &EditCounts::operator+=(const EditCounts &o) {
  matches += o.matches;
  substitutions += o.substitutions;
  deletions += o.deletions;
  insertions += o.insertions;
  return *this;
}

EditCounts CountEdits(const std::vector<AlignStep> &steps) {
  EditCounts c;
  for (const AlignStep &s : steps) {
    switch (s.op) {
      case EditOp::kMatch: ++c.matches; break;
      case EditOp::kSubstitution: ++c.substitutions; break;
      case EditOp::kDeletion: ++c.deletions; break;
      case EditOp::kInsertion: ++c.insertions; break;
    }
  }
  return c;
}

namespace {

double WerOf(const EditCounts &counts, int64_t ref_len) {
  if (ref_len == 0)
    return counts.Errors() == 0
               ? 0.0
               : std::numeric_limits<double>::infinity();
  return static_cast<double>(counts.Errors()) / static_cast<double>(ref_len);
}

}  // namespace

double UttScore::Wer() const { return WerOf(counts, reference_length); }

double WerReport::Wer() const { return WerOf(totals, reference_length); }

WerReport ScoreWer(const TranscriptMap &hyps, const RefMap &refs) {
  WerReport report;
  for (const auto &kv : refs) {
    UttScore score;
    score.utterance_id = kv.first;
    score.reference_length = static_cast<int64_t>(kv.second.size());
    auto it = hyps.find(kv.first);
    if (it == hyps.end()) {
      score.missing_hypothesis = true;
      score.counts.deletions = score.reference_length;
      report.warnings.push_back("no hypothesis for utterance '" + kv.first +
                                "', scoring all deletions");
    } else {
      score.counts = CountEdits(EditAlign(it->second, kv.second));
    }
    report.totals += score.counts;
    report.reference_length += score.reference_length;
    report.per_utterance.push_back(std::move(score));
  }
  for (const auto &kv : hyps)
    if (!refs.count(kv.first))
      report.warnings.push_back("hypothesis utterance '" + kv.first +
                                "' has no reference, skipping");
  return report;
}

TranscriptMap TranscriptsOf(const std::vector<Hypothesis> &hyps) {
  TranscriptMap out;
  for (const Hypothesis &h : hyps) {
    if (out.count(h.utterance_id))
      RC_ERR << "duplicate hypothesis for utterance '" << h.utterance_id
             << "'";
    out.emplace(h.utterance_id, h.Transcript());
  }
  return out;
}

double WerReduction(double baseline_wer, double improved_wer) {
  if (!(baseline_wer > 0.0))
    RC_ERR << "baseline WER must be positive, got " << baseline_wer;
  return 100.0 * (baseline_wer - improved_wer) / baseline_wer;
}

std::string FormatWerReport(const WerReport &report) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << std::left << std::setw(24) << "utterance" << std::right
     << std::setw(6) << "ref" << std::setw(6) << "sub" << std::setw(6)
     << "del" << std::setw(6) << "ins" << std::setw(9) << "wer%" << "\n";
  for (const UttScore &u : report.per_utterance) {
    os << std::left << std::setw(24) << u.utterance_id << std::right
       << std::setw(6) << u.reference_length << std::setw(6)
       << u.counts.substitutions << std::setw(6) << u.counts.deletions
       << std::setw(6) << u.counts.insertions << std::setw(9)
       << 100.0 * u.Wer() << "\n";
  }
  os << std::left << std::setw(24) << "TOTAL" << std::right << std::setw(6)
     << report.reference_length << std::setw(6)
     << report.totals.substitutions << std::setw(6) << report.totals.deletions
     << std::setw(6) << report.totals.insertions << std::setw(9)
     << report.WerPercent() << "\n";
  return os.str();
}

std::string WerReportJson(const WerReport &report) {
  nlohmann::ordered_json j;
  j["wer"] = report.Wer();
  j["wer_percent"] = report.WerPercent();
  j["reference_length"] = report.reference_length;
  j["substitutions"] = report.totals.substitutions;
  j["deletions"] = report.totals.deletions;
  j["insertions"] = report.totals.insertions;
  j["matches"] = report.totals.matches;
  nlohmann::ordered_json utts = nlohmann::ordered_json::array();
  for (const UttScore &u : report.per_utterance) {
    nlohmann::ordered_json ju;
    ju["utt"] = u.utterance_id;
    ju["ref_len"] = u.reference_length;
    ju["sub"] = u.counts.substitutions;
    ju["del"] = u.counts.deletions;
    ju["ins"] = u.counts.insertions;
    ju["wer"] = u.Wer();
    if (u.missing_hypothesis) ju["missing"] = true;
    utts.push_back(std::move(ju));
  }
  j["utterances"] = std::move(utts);
  nlohmann::ordered_json warn = nlohmann::ordered_json::array();
  for (const std::string &w : report.warnings) warn.push_back(w);
  j["warnings"] = std::move(warn);
  return j.dump(2);
}

}  // namespace rcnnctc
