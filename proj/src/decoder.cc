// src/decoder.cc

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

#include "rcnnctc/decoder.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "rcnnctc/error.h"
#include "rcnnctc/logmath.h"

namespace rcnnctc {

void DecodeTiming::Validate() const {
  if (!(frame_shift_s > 0.0))
    RC_ERR << "frame shift must be positive, got " << frame_shift_s;
  if (time_downsample < 1)
    RC_ERR << "time downsample factor must be >= 1, got " << time_downsample;
}

namespace {

// One collapsed label occurrence with its anchor frame.
struct Emission {
  int label;
  int peak_frame;
  double peak_prob;
};

void CheckLogprobShape(const Tensor &logprobs, const Alphabet &alphabet) {
  alphabet.Validate();
  if (logprobs.Rank() != 2)
    RC_SHAPE_ERR << "decoder input must be [frames, labels], got "
                 << ShapeToString(logprobs.shape());
  if (logprobs.Dim(1) != alphabet.Size())
    RC_SHAPE_ERR << "decoder input has " << logprobs.Dim(1)
                 << " labels but the alphabet has " << alphabet.Size();
}

Hypothesis WordsFromEmissions(const std::vector<Emission> &emissions,
                              const Alphabet &alphabet,
                              const DecodeTiming &timing, int64_t frames,
                              const std::string &utterance_id,
                              const std::string &system_id) {
  Hypothesis hyp;
  hyp.utterance_id = utterance_id;
  hyp.system_id = system_id;
  hyp.total_duration_s = timing.FrameToSeconds(static_cast<int>(frames));

  std::string word;
  int first_peak = -1, last_peak = -1;
  double min_prob = 1.0;
  auto flush = [&]() {
    if (word.empty()) return;
    TimedWord w;
    w.word = word;
    w.start_s = timing.FrameToSeconds(first_peak);
    w.duration_s = timing.FrameToSeconds(last_peak + 1) - w.start_s;
    w.confidence = std::min(1.0, std::max(0.0, min_prob));
    hyp.words.push_back(std::move(w));
    word.clear();
    first_peak = last_peak = -1;
    min_prob = 1.0;
  };
  for (const Emission &e : emissions) {
    if (e.label == Alphabet::kDelimiterIndex) {
      flush();
      continue;
    }
    if (word.empty()) first_peak = e.peak_frame;
    last_peak = e.peak_frame;
    word += alphabet.LabelOf(e.label);
    min_prob = std::min(min_prob, e.peak_prob);
  }
  flush();
  hyp.Validate();
  return hyp;
}

}  // namespace

Hypothesis GreedyDecode(const Tensor &logprobs, const Alphabet &alphabet,
                        const DecodeTiming &timing,
                        const std::string &utterance_id,
                        const std::string &system_id) {
  CheckLogprobShape(logprobs, alphabet);
  timing.Validate();
  int64_t frames = logprobs.Dim(0);
  int64_t n_labels = logprobs.Dim(1);

  std::vector<Emission> emissions;
  int run_label = -1;
  int peak_frame = -1;
  double peak_lp = 0.0;
  for (int64_t t = 0; t < frames; ++t) {
    int best = 0;
    for (int64_t k = 1; k < n_labels; ++k)
      if (logprobs.At(t, k) > logprobs.At(t, best)) best = static_cast<int>(k);
    if (best != run_label) {
      if (run_label > Alphabet::kBlankIndex)
        emissions.push_back(
            Emission{run_label, peak_frame, std::exp(peak_lp)});
      run_label = best;
      peak_frame = static_cast<int>(t);
      peak_lp = logprobs.At(t, best);
    } else if (logprobs.At(t, best) > peak_lp) {
      peak_frame = static_cast<int>(t);
      peak_lp = logprobs.At(t, best);
    }
  }
  if (run_label > Alphabet::kBlankIndex)
    emissions.push_back(Emission{run_label, peak_frame, std::exp(peak_lp)});

  return WordsFromEmissions(emissions, alphabet, timing, frames, utterance_id,
                            system_id);
}

namespace {

struct PrefixMass {
  double log_blank = kLogZero;     // paths ending in blank
  double log_nonblank = kLogZero;  // paths ending in the prefix's last label
  double Total() const { return LogAdd(log_blank, log_nonblank); }
};

using BeamMap = std::map<std::vector<int>, PrefixMass>;

}  // namespace

std::vector<NBestEntry> PrefixBeamDecode(const Tensor &logprobs,
                                         const Alphabet &alphabet,
                                         int beam_width, int nbest,
                                         const DecodeTiming &timing,
                                         const std::string &utterance_id,
                                         const std::string &system_id) {
  CheckLogprobShape(logprobs, alphabet);
  timing.Validate();
  if (beam_width < 1) RC_ERR << "beam width must be >= 1, got " << beam_width;
  if (nbest < 1) RC_ERR << "nbest must be >= 1, got " << nbest;
  int64_t frames = logprobs.Dim(0);
  int64_t n_labels = logprobs.Dim(1);

  BeamMap beams;
  beams[{}].log_blank = 0.0;

  for (int64_t t = 0; t < frames; ++t) {
    BeamMap next;
    for (const auto &kv : beams) {
      const std::vector<int> &prefix = kv.first;
      const PrefixMass &mass = kv.second;
      double total = mass.Total();

      PrefixMass &same = next[prefix];
      same.log_blank =
          LogAdd(same.log_blank, total + logprobs.At(t, Alphabet::kBlankIndex));

      for (int k = 1; k < n_labels; ++k) {
        double lp = logprobs.At(t, k);
        if (!prefix.empty() && prefix.back() == k) {
          // Repeating the last label extends the same prefix; a new
          // occurrence needs a blank in between, so it grows the prefix from
          // blank-ending mass only.
          PrefixMass &rep = next[prefix];
          rep.log_nonblank = LogAdd(rep.log_nonblank, mass.log_nonblank + lp);
          std::vector<int> ext = prefix;
          ext.push_back(k);
          PrefixMass &grown = next[ext];
          grown.log_nonblank =
              LogAdd(grown.log_nonblank, mass.log_blank + lp);
        } else {
          std::vector<int> ext = prefix;
          ext.push_back(k);
          PrefixMass &grown = next[ext];
          grown.log_nonblank = LogAdd(grown.log_nonblank, total + lp);
        }
      }
    }
    if (static_cast<int>(next.size()) > beam_width) {
      // Keep the beam_width best prefixes; the map iterates in lexicographic
      // order, so equal scores break toward the smaller prefix.
      std::vector<BeamMap::const_iterator> order;
      order.reserve(next.size());
      for (auto it = next.begin(); it != next.end(); ++it)
        order.push_back(it);
      std::stable_sort(order.begin(), order.end(),
                       [](const auto &a, const auto &b) {
                         return a->second.Total() > b->second.Total();
                       });
      BeamMap pruned;
      for (int i = 0; i < beam_width; ++i)
        pruned.emplace(order[i]->first, order[i]->second);
      next.swap(pruned);
    }
    beams.swap(next);
  }

  std::vector<BeamMap::const_iterator> order;
  order.reserve(beams.size());
  for (auto it = beams.begin(); it != beams.end(); ++it) {
    // A prefix whose mass is exactly log-zero has no surviving path and is
    // not a hypothesis.
    if (it->second.Total() > kLogZero) order.push_back(it);
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const auto &a, const auto &b) {
                     return a->second.Total() > b->second.Total();
                   });

  int take = std::min<int>(nbest, static_cast<int>(order.size()));
  std::vector<NBestEntry> out;
  for (int r = 0; r < take; ++r) {
    const std::vector<int> &prefix = order[r]->first;
    std::vector<Emission> emissions;
    if (!prefix.empty()) {
      LabelSeq z{prefix};
      std::vector<AlignedLabel> aligned = ViterbiAlign(logprobs, z);
      emissions.reserve(aligned.size());
      for (const AlignedLabel &a : aligned)
        emissions.push_back(
            Emission{a.label, a.peak_frame, std::exp(a.peak_logprob)});
    }
    NBestEntry entry;
    entry.hyp = WordsFromEmissions(emissions, alphabet, timing, frames,
                                   utterance_id, system_id);
    entry.rank = r;
    entry.log_prob = order[r]->second.Total();
    entry.has_log_prob = true;
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace rcnnctc
