// tests/test_metrics.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "rcnnctc/error.h"
#include "rcnnctc/metrics.h"
#include "rcnnctc/rng.h"

using namespace rcnnctc;

namespace {

// Memoized recursive Levenshtein distance, written independently of the
// table-filling alignment under test.
int64_t OracleDistance(const std::vector<std::string> &hyp,
                       const std::vector<std::string> &ref) {
  const size_t h = hyp.size(), r = ref.size();
  std::vector<int64_t> memo((h + 1) * (r + 1), -1);
  std::function<int64_t(size_t, size_t)> go = [&](size_t i,
                                                  size_t j) -> int64_t {
    if (i == h) return static_cast<int64_t>(r - j);
    if (j == r) return static_cast<int64_t>(h - i);
    int64_t &m = memo[i * (r + 1) + j];
    if (m >= 0) return m;
    int64_t best = go(i + 1, j + 1) + (hyp[i] == ref[j] ? 0 : 1);
    best = std::min(best, go(i + 1, j) + 1);
    best = std::min(best, go(i, j + 1) + 1);
    return m = best;
  };
  return go(0, 0);
}

// Replays an alignment, checking that it consumes both sequences in order
// and that match and substitution labels are truthful.
void CheckAlignmentValid(const std::vector<AlignStep> &steps,
                         const std::vector<std::string> &hyp,
                         const std::vector<std::string> &ref) {
  int hi = 0, ri = 0;
  for (const AlignStep &s : steps) {
    switch (s.op) {
      case EditOp::kMatch:
        REQUIRE(s.hyp_index == hi);
        REQUIRE(s.ref_index == ri);
        CHECK(hyp[hi] == ref[ri]);
        ++hi, ++ri;
        break;
      case EditOp::kSubstitution:
        REQUIRE(s.hyp_index == hi);
        REQUIRE(s.ref_index == ri);
        CHECK(hyp[hi] != ref[ri]);
        ++hi, ++ri;
        break;
      case EditOp::kDeletion:
        CHECK(s.hyp_index == -1);
        REQUIRE(s.ref_index == ri);
        ++ri;
        break;
      case EditOp::kInsertion:
        REQUIRE(s.hyp_index == hi);
        CHECK(s.ref_index == -1);
        ++hi;
        break;
    }
  }
  CHECK(hi == static_cast<int>(hyp.size()));
  CHECK(ri == static_cast<int>(ref.size()));
}

std::vector<std::string> Split(const std::string &text) {
  std::vector<std::string> words;
  std::string word;
  for (char c : text) {
    if (c == ' ') {
      if (!word.empty()) words.push_back(word);
      word.clear();
    } else {
      word += c;
    }
  }
  if (!word.empty()) words.push_back(word);
  return words;
}

}  // namespace

TEST_CASE("alignment of simple edit patterns") {
  std::vector<std::string> ref = Split("the cat sat on");

  std::vector<AlignStep> same = EditAlign(ref, ref);
  REQUIRE(same.size() == 4);
  for (const AlignStep &s : same) CHECK(s.op == EditOp::kMatch);

  std::vector<AlignStep> del = EditAlign(Split("the cat sat"), ref);
  EditCounts dc = CountEdits(del);
  CHECK(dc.matches == 3);
  CHECK(dc.deletions == 1);
  CHECK(del.back().op == EditOp::kDeletion);
  CHECK(del.back().ref_index == 3);

  std::vector<AlignStep> ins = EditAlign(Split("the big cat sat on"), ref);
  EditCounts ic = CountEdits(ins);
  CHECK(ic.matches == 4);
  CHECK(ic.insertions == 1);

  std::vector<AlignStep> sub = EditAlign(Split("the dog sat on"), ref);
  EditCounts sc = CountEdits(sub);
  CHECK(sc.matches == 3);
  CHECK(sc.substitutions == 1);
  CHECK(sub[1].op == EditOp::kSubstitution);
  CHECK(sub[1].hyp_index == 1);
  CHECK(sub[1].ref_index == 1);

  std::vector<AlignStep> empty_hyp = EditAlign({}, ref);
  CHECK(CountEdits(empty_hyp).deletions == 4);
  CHECK(EditAlign({}, {}).empty());
}

TEST_CASE("alignment cost matches a recursive oracle on random pairs") {
  Rng rng(51);
  std::vector<std::string> vocab = {"a", "b", "c"};
  for (int rep = 0; rep < 300; ++rep) {
    std::vector<std::string> hyp, ref;
    int hl = static_cast<int>(rng.Below(13));
    int rl = static_cast<int>(rng.Below(13));
    for (int i = 0; i < hl; ++i) hyp.push_back(vocab[rng.Below(3)]);
    for (int i = 0; i < rl; ++i) ref.push_back(vocab[rng.Below(3)]);

    std::vector<AlignStep> steps = EditAlign(hyp, ref);
    CheckAlignmentValid(steps, hyp, ref);
    EditCounts counts = CountEdits(steps);
    CHECK(counts.Errors() == OracleDistance(hyp, ref));
    CHECK(counts.matches + counts.substitutions + counts.deletions ==
          static_cast<int64_t>(ref.size()));
    CHECK(counts.matches + counts.substitutions + counts.insertions ==
          static_cast<int64_t>(hyp.size()));
  }
}

TEST_CASE("word error rates for the worked three systems") {
  RefMap refs = {
      {"u1", Split("CONTACTS STILL INSIDE OWENS CORNING HELP TOO")}};
  TranscriptMap s1 = {
      {"u1", Split("CONTACTS STILL INSIDE OWNS CORNING HELPED TOO")}};
  TranscriptMap s2 = {
      {"u1", Split("CONTACT STILL INSIDE OWENS CORNING HELPED")}};
  TranscriptMap s3 = {
      {"u1", Split("CONTACT STILL INSIDE OWNS CORNING HELP TOO")}};

  WerReport r1 = ScoreWer(s1, refs);
  CHECK(r1.totals.substitutions == 2);
  CHECK(r1.totals.deletions == 0);
  CHECK(r1.totals.insertions == 0);
  CHECK(r1.Wer() == doctest::Approx(2.0 / 7.0).epsilon(1e-12));
  CHECK(r1.WerPercent() == doctest::Approx(100.0 * 2.0 / 7.0));

  WerReport r2 = ScoreWer(s2, refs);
  CHECK(r2.totals.substitutions == 2);
  CHECK(r2.totals.deletions == 1);
  CHECK(r2.Wer() == doctest::Approx(3.0 / 7.0).epsilon(1e-12));

  WerReport r3 = ScoreWer(s3, refs);
  CHECK(r3.Wer() == doctest::Approx(2.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("scoring aggregates utterances and flags coverage gaps") {
  RefMap refs = {{"u1", Split("a b c d")},
                 {"u2", Split("e f")},
                 {"u3", Split("g h i")}};
  TranscriptMap hyps = {{"u1", Split("a b x d")},
                        {"u3", Split("g h i")},
                        {"u9", Split("spurious")}};
  WerReport report = ScoreWer(hyps, refs);
  REQUIRE(report.per_utterance.size() == 3);
  CHECK(report.per_utterance[0].counts.substitutions == 1);
  CHECK(report.per_utterance[1].missing_hypothesis);
  CHECK(report.per_utterance[1].counts.deletions == 2);
  CHECK(report.per_utterance[2].counts.Errors() == 0);
  CHECK(report.reference_length == 9);
  CHECK(report.totals.Errors() == 3);
  CHECK(report.Wer() == doctest::Approx(3.0 / 9.0));
  REQUIRE(report.warnings.size() == 2);
  CHECK(report.warnings[0].find("no hypothesis") != std::string::npos);
  CHECK(report.warnings[0].find("u2") != std::string::npos);
  CHECK(report.warnings[1].find("no reference") != std::string::npos);
  CHECK(report.warnings[1].find("u9") != std::string::npos);
}

TEST_CASE("error rates above one hundred percent are not clamped") {
  RefMap refs = {{"u1", {"x"}}};
  TranscriptMap hyps = {{"u1", Split("a b c d e")}};
  WerReport report = ScoreWer(hyps, refs);
  CHECK(report.totals.Errors() == 5);
  CHECK(report.Wer() == doctest::Approx(5.0));
  CHECK(report.WerPercent() == doctest::Approx(500.0));

  UttScore empty_ref;
  empty_ref.reference_length = 0;
  empty_ref.counts.insertions = 2;
  CHECK(std::isinf(empty_ref.Wer()));
  empty_ref.counts.insertions = 0;
  CHECK(empty_ref.Wer() == 0.0);
}

TEST_CASE("relative error reduction to two decimals") {
  CHECK(WerReduction(8.99, 7.65) ==
        doctest::Approx(100.0 * (8.99 - 7.65) / 8.99).epsilon(1e-12));
  CHECK(std::round(WerReduction(8.99, 7.65) * 100.0) / 100.0 == 14.91);
  CHECK(std::round(WerReduction(5.35, 4.29) * 100.0) / 100.0 == 19.81);
  CHECK(WerReduction(10.0, 10.0) == 0.0);
  CHECK(WerReduction(10.0, 12.0) < 0.0);
  CHECK_THROWS_AS(WerReduction(0.0, 1.0), Error);
  CHECK_THROWS_AS(WerReduction(-1.0, 0.5), Error);
}

TEST_CASE("transcripts extraction rejects duplicates") {
  Hypothesis a;
  a.utterance_id = "u1";
  a.system_id = "s";
  a.total_duration_s = 1.0;
  TimedWord w;
  w.word = "hello";
  w.confidence = 0.9;
  w.start_s = 0.1;
  w.duration_s = 0.2;
  a.words.push_back(w);
  Hypothesis b = a;
  b.utterance_id = "u2";
  TranscriptMap m = TranscriptsOf({a, b});
  CHECK(m.size() == 2);
  CHECK(m["u1"] == std::vector<std::string>({"hello"}));
  CHECK_THROWS_WITH_AS(TranscriptsOf({a, a}), doctest::Contains("duplicate"),
                       Error);
}

TEST_CASE("report rendering has per-utterance rows and a total") {
  RefMap refs = {{"utt_one", Split("a b c d e f g")}};
  TranscriptMap hyps = {{"utt_one", Split("a b c d e x y")}};
  WerReport report = ScoreWer(hyps, refs);
  std::string table = FormatWerReport(report);
  CHECK(table.find("utterance") != std::string::npos);
  CHECK(table.find("utt_one") != std::string::npos);
  CHECK(table.find("TOTAL") != std::string::npos);
  CHECK(table.find("28.57") != std::string::npos);

  nlohmann::json j = nlohmann::json::parse(WerReportJson(report));
  CHECK(j["wer"].get<double>() == doctest::Approx(2.0 / 7.0));
  CHECK(j["wer_percent"].get<double>() == doctest::Approx(100.0 * 2 / 7.0));
  CHECK(j["reference_length"].get<int64_t>() == 7);
  CHECK(j["substitutions"].get<int64_t>() == 2);
  CHECK(j["matches"].get<int64_t>() == 5);
  REQUIRE(j["utterances"].size() == 1);
  CHECK(j["utterances"][0]["utt"].get<std::string>() == "utt_one");
  CHECK(j["utterances"][0]["sub"].get<int64_t>() == 2);
  CHECK(j["warnings"].empty());

  TranscriptMap none;
  nlohmann::json jm = nlohmann::json::parse(WerReportJson(ScoreWer(none, refs)));
  CHECK(jm["utterances"][0]["missing"].get<bool>());
  CHECK(!jm["warnings"].empty());
}
