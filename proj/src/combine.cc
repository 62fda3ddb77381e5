// src/combine.cc

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

#include "rcnnctc/combine.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "rcnnctc/error.h"

namespace rcnnctc {

namespace {
constexpr double kNormTol = 1e-6;
}

const WtnArc *WtnSlot::FindArc(const std::string &word) const {
  for (const WtnArc &a : arcs)
    if (a.word == word) return &a;
  return nullptr;
}

WtnArc *WtnSlot::FindArc(const std::string &word) {
  for (WtnArc &a : arcs)
    if (a.word == word) return &a;
  return nullptr;
}

int WtnSlot::TotalVotes() const {
  int n = 0;
  for (const WtnArc &a : arcs) n += a.votes;
  return n;
}

Hypothesis NormalizeTime(const Hypothesis &hyp) {
  hyp.Validate();
  Hypothesis out = hyp;
  double t = hyp.total_duration_s;
  out.total_duration_s = 1.0;
  for (TimedWord &w : out.words) {
    w.start_s /= t;
    w.duration_s /= t;
  }
  return out;
}

namespace {

WtnArc ArcForWord(const TimedWord &w) {
  WtnArc a;
  a.word = w.word;
  a.votes = 1;
  a.sum_confidence = w.confidence;
  a.max_confidence = w.confidence;
  a.sum_start = w.start_s;
  a.sum_duration = w.duration_s;
  return a;
}

void AccumulateWord(WtnArc *arc, const TimedWord &w) {
  arc->votes += 1;
  arc->sum_confidence += w.confidence;
  arc->max_confidence = std::max(arc->max_confidence, w.confidence);
  arc->sum_start += w.start_s;
  arc->sum_duration += w.duration_s;
}

enum class MergeOp { kPair, kSkipSlot, kNewSlot };

// Aligns a hypothesis against the current slot sequence: minimal edit count,
// ties by total |word midpoint - slot time| over paired positions, remaining
// ties toward pairing, then skipping a slot, then inserting a new one.
std::vector<MergeOp> AlignToSlots(const Wtn &wtn, const Hypothesis &hyp) {
  const int s_count = static_cast<int>(wtn.slots.size());
  const int w_count = static_cast<int>(hyp.words.size());
  struct Cost {
    int edits;
    double time;
  };
  auto better = [](const Cost &a, const Cost &b) {
    if (a.edits != b.edits) return a.edits < b.edits;
    return a.time < b.time;
  };
  std::vector<std::vector<Cost>> dp(
      s_count + 1, std::vector<Cost>(w_count + 1, Cost{0, 0.0}));
  std::vector<std::vector<MergeOp>> bt(
      s_count + 1, std::vector<MergeOp>(w_count + 1, MergeOp::kPair));
  for (int i = 1; i <= s_count; ++i) {
    dp[i][0] = Cost{i, 0.0};
    bt[i][0] = MergeOp::kSkipSlot;
  }
  for (int j = 1; j <= w_count; ++j) {
    dp[0][j] = Cost{j, 0.0};
    bt[0][j] = MergeOp::kNewSlot;
  }
  for (int i = 1; i <= s_count; ++i) {
    const WtnSlot &slot = wtn.slots[i - 1];
    for (int j = 1; j <= w_count; ++j) {
      const TimedWord &w = hyp.words[j - 1];
      int pair_edits = slot.FindArc(w.word) ? 0 : 1;
      double pair_time = std::abs(w.Midpoint() - slot.SlotTime());
      Cost best{dp[i - 1][j - 1].edits + pair_edits,
                dp[i - 1][j - 1].time + pair_time};
      MergeOp op = MergeOp::kPair;
      Cost skip{dp[i - 1][j].edits + 1, dp[i - 1][j].time};
      if (better(skip, best)) {
        best = skip;
        op = MergeOp::kSkipSlot;
      }
      Cost grow{dp[i][j - 1].edits + 1, dp[i][j - 1].time};
      if (better(grow, best)) {
        best = grow;
        op = MergeOp::kNewSlot;
      }
      dp[i][j] = best;
      bt[i][j] = op;
    }
  }

  std::vector<MergeOp> ops;
  int i = s_count, j = w_count;
  while (i > 0 || j > 0) {
    MergeOp op = bt[i][j];
    ops.push_back(op);
    if (op == MergeOp::kPair) {
      --i, --j;
    } else if (op == MergeOp::kSkipSlot) {
      --i;
    } else {
      --j;
    }
  }
  std::reverse(ops.begin(), ops.end());
  return ops;
}

void MergeInto(Wtn *wtn, const Hypothesis &hyp) {
  const int n_before = wtn->SystemCount();
  std::vector<MergeOp> ops = AlignToSlots(*wtn, hyp);

  std::vector<WtnSlot> merged;
  merged.reserve(wtn->slots.size() + hyp.words.size());
  size_t si = 0, wj = 0;
  for (MergeOp op : ops) {
    if (op == MergeOp::kPair) {
      WtnSlot slot = wtn->slots[si++];
      const TimedWord &w = hyp.words[wj++];
      if (WtnArc *arc = slot.FindArc(w.word)) {
        AccumulateWord(arc, w);
      } else {
        slot.arcs.push_back(ArcForWord(w));
      }
      slot.sum_midpoint += w.Midpoint();
      slot.word_instances += 1;
      merged.push_back(std::move(slot));
    } else if (op == MergeOp::kSkipSlot) {
      WtnSlot slot = wtn->slots[si++];
      if (WtnArc *blank = slot.FindArc("")) {
        blank->votes += 1;
      } else {
        WtnArc arc;
        arc.votes = 1;
        slot.arcs.push_back(std::move(arc));
      }
      merged.push_back(std::move(slot));
    } else {
      const TimedWord &w = hyp.words[wj++];
      WtnSlot slot;
      slot.arcs.push_back(ArcForWord(w));
      if (n_before > 0) {
        WtnArc blank;
        blank.votes = n_before;
        slot.arcs.push_back(std::move(blank));
      }
      slot.sum_midpoint = w.Midpoint();
      slot.word_instances = 1;
      merged.push_back(std::move(slot));
    }
  }
  wtn->slots = std::move(merged);
  wtn->merged_systems.push_back(hyp.system_id);
}

}  // namespace

Wtn BuildWtn(const std::vector<Hypothesis> &hyps) {
  if (hyps.empty()) RC_ERR << "cannot build a network from zero hypotheses";
  std::set<std::string> ids;
  for (const Hypothesis &h : hyps) {
    h.Validate();
    if (h.utterance_id != hyps.front().utterance_id)
      RC_ERR << "network inputs span utterances '"
             << hyps.front().utterance_id << "' and '" << h.utterance_id
             << "'";
    if (std::abs(h.total_duration_s - 1.0) > kNormTol)
      RC_ERR << "hypothesis from system '" << h.system_id
             << "' is not time-normalized (total duration "
             << h.total_duration_s << ")";
    if (!ids.insert(h.system_id).second)
      RC_ERR << "duplicate system id '" << h.system_id << "'";
  }

  size_t base = 0;
  for (size_t i = 1; i < hyps.size(); ++i) {
    if (hyps[i].words.size() > hyps[base].words.size() ||
        (hyps[i].words.size() == hyps[base].words.size() &&
         hyps[i].system_id < hyps[base].system_id))
      base = i;
  }

  Wtn wtn;
  wtn.utterance_id = hyps[base].utterance_id;
  wtn.base_system = hyps[base].system_id;
  wtn.merged_systems.push_back(hyps[base].system_id);
  for (const TimedWord &w : hyps[base].words) {
    WtnSlot slot;
    slot.arcs.push_back(ArcForWord(w));
    slot.sum_midpoint = w.Midpoint();
    slot.word_instances = 1;
    wtn.slots.push_back(std::move(slot));
  }

  std::vector<size_t> rest;
  for (size_t i = 0; i < hyps.size(); ++i)
    if (i != base) rest.push_back(i);
  std::sort(rest.begin(), rest.end(), [&](size_t a, size_t b) {
    return hyps[a].system_id < hyps[b].system_id;
  });
  for (size_t i : rest) MergeInto(&wtn, hyps[i]);

  for (const WtnSlot &slot : wtn.slots)
    RC_CHECK(slot.TotalVotes() == wtn.SystemCount());
  return wtn;
}

VoteScheme VoteSchemeFromName(const std::string &name) {
  if (name == "frequency") return VoteScheme::kFrequency;
  if (name == "freq_avg_conf") return VoteScheme::kFreqAvgConf;
  if (name == "freq_max_conf") return VoteScheme::kFreqMaxConf;
  RC_ERR << "unknown voting scheme '" << name << "'";
}

std::string VoteSchemeName(VoteScheme scheme) {
  switch (scheme) {
    case VoteScheme::kFrequency: return "frequency";
    case VoteScheme::kFreqAvgConf: return "freq_avg_conf";
    case VoteScheme::kFreqMaxConf: return "freq_max_conf";
  }
  RC_ERR << "bad voting scheme value";
}

void VoteOptions::Validate() const {
  if (alpha < 0.0 || alpha > 1.0)
    RC_ERR << "alpha must be in [0, 1], got " << alpha;
  if (blank_confidence < 0.0 || blank_confidence > 1.0)
    RC_ERR << "blank confidence must be in [0, 1], got " << blank_confidence;
}

Hypothesis Vote(const Wtn &wtn, const VoteOptions &options) {
  options.Validate();
  const int n = wtn.SystemCount();
  if (n < 1) RC_ERR << "network has no merged systems";
  const double alpha =
      options.scheme == VoteScheme::kFrequency ? 1.0 : options.alpha;

  Hypothesis out;
  out.utterance_id = wtn.utterance_id;
  out.system_id = "combined";
  out.total_duration_s = 1.0;

  double prev_end = 0.0;
  for (const WtnSlot &slot : wtn.slots) {
    if (slot.arcs.empty()) RC_ERR << "network slot has no arcs";
    const WtnArc *winner = nullptr;
    double winner_score = 0.0;
    for (const WtnArc &arc : slot.arcs) {
      double conf = 0.0;
      if (options.scheme == VoteScheme::kFreqAvgConf)
        conf = arc.IsBlank() ? options.blank_confidence
                             : arc.MeanConfidence();
      else if (options.scheme == VoteScheme::kFreqMaxConf)
        conf = arc.IsBlank() ? options.blank_confidence : arc.max_confidence;
      double score =
          alpha * static_cast<double>(arc.votes) / n + (1.0 - alpha) * conf;
      bool take = winner == nullptr || score > winner_score;
      if (!take && score == winner_score) {
        if (winner->IsBlank() && !arc.IsBlank())
          take = true;
        else if (winner->IsBlank() == arc.IsBlank() &&
                 arc.word < winner->word)
          take = true;
      }
      if (take) {
        winner = &arc;
        winner_score = score;
      }
    }
    if (winner->IsBlank()) continue;
    TimedWord w;
    w.word = winner->word;
    w.confidence =
        std::min(1.0, std::max(0.0, winner->MeanConfidence()));
    w.start_s = std::max(winner->MeanStart(), prev_end);
    w.start_s = std::min(w.start_s, 1.0);
    w.duration_s = std::min(winner->MeanDuration(), 1.0 - w.start_s);
    w.duration_s = std::max(w.duration_s, 0.0);
    prev_end = w.End();
    out.words.push_back(std::move(w));
  }
  out.Validate();
  return out;
}

namespace {

struct SystemView {
  std::string id;
  std::map<std::string, const Hypothesis *> by_utt;
};

std::vector<SystemView> IndexSystems(
    const std::vector<std::vector<Hypothesis>> &systems) {
  if (systems.empty()) RC_ERR << "no systems to combine";
  std::vector<SystemView> views;
  std::set<std::string> ids;
  for (size_t s = 0; s < systems.size(); ++s) {
    if (systems[s].empty())
      RC_ERR << "system " << s + 1 << " has no hypotheses";
    SystemView view;
    view.id = systems[s].front().system_id;
    for (const Hypothesis &h : systems[s]) {
      h.Validate();
      if (h.system_id != view.id)
        RC_ERR << "system " << s + 1 << " mixes ids '" << view.id
               << "' and '" << h.system_id << "'";
      if (!view.by_utt.emplace(h.utterance_id, &h).second)
        RC_ERR << "system '" << view.id << "' has two hypotheses for "
               << "utterance '" << h.utterance_id << "'";
    }
    if (!ids.insert(view.id).second)
      RC_ERR << "duplicate system id '" << view.id << "'";
    views.push_back(std::move(view));
  }
  return views;
}

}  // namespace

CombineResult Combine(const std::vector<std::vector<Hypothesis>> &systems,
                      const VoteOptions &options) {
  options.Validate();
  std::vector<SystemView> views = IndexSystems(systems);

  CombineResult result;
  if (views.size() == 1) {
    for (const auto &kv : views[0].by_utt)
      result.hypotheses.push_back(*kv.second);
    return result;
  }

  std::set<std::string> universe;
  for (const SystemView &v : views)
    for (const auto &kv : v.by_utt) universe.insert(kv.first);

  for (const std::string &utt : universe) {
    std::vector<Hypothesis> present;
    std::vector<std::string> absent;
    for (const SystemView &v : views) {
      auto it = v.by_utt.find(utt);
      if (it != v.by_utt.end())
        present.push_back(*it->second);
      else
        absent.push_back(v.id);
    }
    if (!absent.empty()) {
      std::ostringstream warn;
      warn << "utterance '" << utt << "' missing from";
      for (const std::string &id : absent) warn << " '" << id << "'";
      warn << "; combining over " << present.size() << " system(s)";
      result.warnings.push_back(warn.str());
    }
    if (present.size() == 1) {
      result.hypotheses.push_back(present.front());
      continue;
    }
    std::vector<Hypothesis> normalized;
    normalized.reserve(present.size());
    for (const Hypothesis &h : present)
      normalized.push_back(NormalizeTime(h));
    result.hypotheses.push_back(Vote(BuildWtn(normalized), options));
  }
  return result;
}

NBestMode NBestModeFromName(const std::string &name) {
  if (name == "take_1best") return NBestMode::kTake1Best;
  if (name == "pool_all") return NBestMode::kPoolAll;
  RC_ERR << "unknown n-best mode '" << name << "'";
}

std::vector<std::vector<Hypothesis>> IngestNBest(
    const std::vector<std::vector<NBestEntry>> &ranked_systems,
    NBestMode mode) {
  if (ranked_systems.empty()) RC_ERR << "no ranked systems";

  std::vector<std::vector<Hypothesis>> out;
  for (size_t s = 0; s < ranked_systems.size(); ++s) {
    const auto &entries = ranked_systems[s];
    if (entries.empty())
      RC_ERR << "system " << s + 1 << " has an empty hypothesis list";
    const std::string sys_id = entries.front().hyp.system_id;
    std::map<std::string, std::vector<const NBestEntry *>> by_utt;
    for (const NBestEntry &e : entries) {
      if (e.hyp.system_id != sys_id)
        RC_ERR << "ranked list " << s + 1 << " mixes system ids '" << sys_id
               << "' and '" << e.hyp.system_id << "'";
      by_utt[e.hyp.utterance_id].push_back(&e);
    }
    for (auto &kv : by_utt) {
      std::stable_sort(kv.second.begin(), kv.second.end(),
                       [](const NBestEntry *a, const NBestEntry *b) {
                         return a->rank < b->rank;
                       });
      for (size_t i = 1; i < kv.second.size(); ++i)
        if (kv.second[i]->rank == kv.second[i - 1]->rank)
          RC_ERR << "system '" << sys_id << "' utterance '" << kv.first
                 << "' repeats rank " << kv.second[i]->rank;
    }

    if (mode == NBestMode::kTake1Best) {
      std::vector<Hypothesis> best;
      best.reserve(by_utt.size());
      for (const auto &kv : by_utt) best.push_back(kv.second.front()->hyp);
      out.push_back(std::move(best));
      continue;
    }

    // pool_all: drop repeated transcripts within an utterance's list, then
    // cut the remainder into one pseudo-system per depth.
    std::map<std::string, std::vector<const NBestEntry *>> kept;
    size_t depth = 0;
    for (const auto &kv : by_utt) {
      std::set<std::string> seen;
      for (const NBestEntry *e : kv.second) {
        std::string key;
        for (const TimedWord &w : e->hyp.words) {
          key += w.word;
          key += '\x1f';
        }
        if (seen.insert(key).second) kept[kv.first].push_back(e);
      }
      depth = std::max(depth, kept[kv.first].size());
    }
    for (size_t r = 0; r < depth; ++r) {
      std::vector<Hypothesis> pseudo;
      std::ostringstream id;
      id << sys_id << "#" << r;
      for (const auto &kv : kept) {
        if (kv.second.size() <= r) continue;
        Hypothesis h = kv.second[r]->hyp;
        h.system_id = id.str();
        pseudo.push_back(std::move(h));
      }
      out.push_back(std::move(pseudo));
    }
  }
  return out;
}

std::vector<bool> CorrectWords(const std::vector<std::string> &hyp,
                               const std::vector<std::string> &ref) {
  std::vector<bool> matched(ref.size(), false);
  for (const AlignStep &step : EditAlign(hyp, ref))
    if (step.op == EditOp::kMatch) matched[step.ref_index] = true;
  return matched;
}

SystemTranscripts TranscriptsOfSystem(const std::vector<Hypothesis> &hyps) {
  if (hyps.empty()) RC_ERR << "system has no hypotheses";
  SystemTranscripts out;
  out.system_id = hyps.front().system_id;
  for (const Hypothesis &h : hyps) {
    if (h.system_id != out.system_id)
      RC_ERR << "system mixes ids '" << out.system_id << "' and '"
             << h.system_id << "'";
    if (out.transcripts.count(h.utterance_id))
      RC_ERR << "system '" << out.system_id << "' has two hypotheses for "
             << "utterance '" << h.utterance_id << "'";
    out.transcripts.emplace(h.utterance_id, h.Transcript());
  }
  return out;
}

double ComputeMcwr(const std::vector<SystemTranscripts> &systems,
                   const RefMap &refs) {
  if (systems.empty()) RC_ERR << "no systems";
  if (refs.empty()) RC_ERR << "no references";
  std::ostringstream missing;
  bool any_missing = false;
  for (const SystemTranscripts &sys : systems) {
    for (const auto &kv : refs) {
      if (!sys.transcripts.count(kv.first)) {
        missing << " " << sys.system_id << ":" << kv.first;
        any_missing = true;
      }
    }
  }
  if (any_missing)
    RC_ERR << "systems are missing utterances:" << missing.str();

  int64_t total_ref = 0, total_matched = 0;
  for (const auto &kv : refs) {
    if (kv.second.empty()) continue;
    std::vector<bool> matched(kv.second.size(), false);
    for (const SystemTranscripts &sys : systems) {
      std::vector<bool> m = CorrectWords(sys.transcripts.at(kv.first),
                                         kv.second);
      for (size_t i = 0; i < m.size(); ++i)
        if (m[i]) matched[i] = true;
    }
    for (bool b : matched) total_matched += b ? 1 : 0;
    total_ref += static_cast<int64_t>(kv.second.size());
  }
  if (total_ref == 0) RC_ERR << "references contain no words";
  return static_cast<double>(total_matched) / static_cast<double>(total_ref);
}

SelectionResult SelectSubsystems(const std::vector<SystemTranscripts> &pool,
                                 const RefMap &refs, double threshold) {
  if (pool.empty()) RC_ERR << "no candidate systems";
  std::set<std::string> ids;
  for (const SystemTranscripts &s : pool)
    if (!ids.insert(s.system_id).second)
      RC_ERR << "duplicate system id '" << s.system_id << "'";

  SelectionResult result;
  std::vector<size_t> remaining(pool.size());
  for (size_t i = 0; i < pool.size(); ++i) remaining[i] = i;
  std::vector<SystemTranscripts> chosen;
  double current = 0.0;

  while (!remaining.empty()) {
    size_t best_pos = 0;
    double best_mcwr = -1.0;
    for (size_t pos = 0; pos < remaining.size(); ++pos) {
      std::vector<SystemTranscripts> trial = chosen;
      trial.push_back(pool[remaining[pos]]);
      double m = ComputeMcwr(trial, refs);
      if (m > best_mcwr ||
          (m == best_mcwr && pool[remaining[pos]].system_id <
                                 pool[remaining[best_pos]].system_id)) {
        best_mcwr = m;
        best_pos = pos;
      }
    }
    if (!chosen.empty() && best_mcwr - current < threshold) break;
    const SystemTranscripts &picked = pool[remaining[best_pos]];
    result.steps.push_back(SelectionStep{picked.system_id, best_mcwr});
    result.selected.push_back(picked.system_id);
    chosen.push_back(picked);
    current = best_mcwr;
    remaining.erase(remaining.begin() + static_cast<long>(best_pos));
  }
  return result;
}

}  // namespace rcnnctc
