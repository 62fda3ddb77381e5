// src/ctc.cc

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

#include "rcnnctc/ctc.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "rcnnctc/error.h"
#include "rcnnctc/logmath.h"

namespace rcnnctc {

const std::string &Alphabet::LabelOf(int index) const {
  if (index < 0 || index >= Size()) {
    RC_ERR << "label index " << index << " out of range for alphabet of size "
           << Size();
  }
  return labels[index];
}

int Alphabet::IndexOf(const std::string &label) const {
  for (int i = 0; i < Size(); ++i) {
    if (labels[i] == label) return i;
  }
  return -1;
}

void Alphabet::Validate() const {
  if (Size() < 2) RC_ERR << "alphabet needs at least blank plus one label";
  std::set<std::string> seen(labels.begin(), labels.end());
  if (static_cast<int>(seen.size()) != Size()) {
    RC_ERR << "alphabet labels must be distinct";
  }
}

Alphabet Alphabet::ForCharacters(const std::vector<std::string> &words) {
  std::set<char> chars;
  for (const std::string &w : words) {
    for (char c : w) chars.insert(c);
  }
  Alphabet a;
  a.labels.push_back("<b>");
  a.labels.push_back("_");
  for (char c : chars) a.labels.push_back(std::string(1, c));
  a.Validate();
  return a;
}

std::string AlphabetToString(const Alphabet &alphabet) {
  alphabet.Validate();
  std::string out;
  for (int i = 1; i < alphabet.Size(); ++i) {
    if (alphabet.labels[i].size() != 1) {
      RC_ERR << "label '" << alphabet.labels[i]
             << "' is not a single character";
    }
    out += alphabet.labels[i];
  }
  return out;
}

Alphabet AlphabetFromString(const std::string &chars) {
  Alphabet a;
  a.labels.push_back("<b>");
  for (char c : chars) a.labels.push_back(std::string(1, c));
  a.Validate();
  return a;
}

int LabelSeq::AdjacentRepeats() const {
  int n = 0;
  for (size_t i = 1; i < symbols.size(); ++i) {
    if (symbols[i] == symbols[i - 1]) ++n;
  }
  return n;
}

void LabelSeq::Validate(int n_labels) const {
  for (int s : symbols) {
    if (s == Alphabet::kBlankIndex) {
      RC_ERR << "label sequence must not contain the blank";
    }
    if (s < 0 || s >= n_labels) {
      RC_ERR << "label index " << s << " out of range for " << n_labels
             << " labels";
    }
  }
}

LabelSeq CollapsePath(const CtcPath &path, const Alphabet &alphabet) {
  LabelSeq out;
  int prev = -1;
  for (int idx : path) {
    if (idx < 0 || idx >= alphabet.Size()) {
      RC_ERR << "path label index " << idx
             << " out of range for alphabet of size " << alphabet.Size();
    }
    if (idx != prev && idx != Alphabet::kBlankIndex) {
      out.symbols.push_back(idx);
    }
    prev = idx;
  }
  return out;
}

namespace {

void CheckLogprobs(const Tensor &logprobs) {
  if (logprobs.Rank() != 2) {
    RC_SHAPE_ERR << "CTC expects [frames, n_labels] log-probabilities, got "
                 << ShapeToString(logprobs.shape());
  }
  if (logprobs.Dim(1) < 2) {
    RC_ERR << "CTC needs an alphabet of size >= 2";
  }
}

void CheckAdmissible(const Tensor &logprobs, const LabelSeq &z) {
  CheckLogprobs(logprobs);
  z.Validate(static_cast<int>(logprobs.Dim(1)));
  if (logprobs.Dim(0) < z.MinFrames()) {
    RC_ERR << "sequence too long for T': needs " << z.MinFrames()
           << " frames, only " << logprobs.Dim(0) << " available";
  }
}

// State s of the blank-interleaved sequence: even -> blank, odd -> z[s/2].
inline int StateLabel(const LabelSeq &z, int s) {
  return (s % 2 == 0) ? Alphabet::kBlankIndex : z.symbols[s / 2];
}

// A skip transition s-2 -> s is allowed for odd s whose label differs from
// the label two states back.
inline bool SkipAllowed(const LabelSeq &z, int s) {
  return s % 2 == 1 && (s < 2 || z.symbols[s / 2] != z.symbols[s / 2 - 1]);
}

}  // namespace

CtcLattice CtcForwardBackward(const Tensor &logprobs, const LabelSeq &z) {
  CheckAdmissible(logprobs, z);
  const int frames = static_cast<int>(logprobs.Dim(0));
  const int states = 2 * z.Length() + 1;

  CtcLattice lat;
  lat.log_alpha.assign(frames, std::vector<double>(states, kLogZero));
  lat.log_beta.assign(frames, std::vector<double>(states, kLogZero));

  auto lp = [&](int t, int s) { return logprobs.At(t, StateLabel(z, s)); };

  lat.log_alpha[0][0] = lp(0, 0);
  if (states > 1) lat.log_alpha[0][1] = lp(0, 1);
  for (int t = 1; t < frames; ++t) {
    for (int s = 0; s < states; ++s) {
      double acc = lat.log_alpha[t - 1][s];
      if (s >= 1) acc = LogAdd(acc, lat.log_alpha[t - 1][s - 1]);
      if (s >= 2 && SkipAllowed(z, s)) {
        acc = LogAdd(acc, lat.log_alpha[t - 1][s - 2]);
      }
      lat.log_alpha[t][s] = acc == kLogZero ? kLogZero : acc + lp(t, s);
    }
  }

  lat.log_beta[frames - 1][states - 1] = lp(frames - 1, states - 1);
  if (states > 1) lat.log_beta[frames - 1][states - 2] = lp(frames - 1, states - 2);
  for (int t = frames - 2; t >= 0; --t) {
    for (int s = states - 1; s >= 0; --s) {
      double acc = lat.log_beta[t + 1][s];
      if (s + 1 < states) acc = LogAdd(acc, lat.log_beta[t + 1][s + 1]);
      if (s + 2 < states && SkipAllowed(z, s + 2)) {
        acc = LogAdd(acc, lat.log_beta[t + 1][s + 2]);
      }
      lat.log_beta[t][s] = acc == kLogZero ? kLogZero : acc + lp(t, s);
    }
  }

  double ll = lat.log_alpha[frames - 1][states - 1];
  if (states > 1) ll = LogAdd(ll, lat.log_alpha[frames - 1][states - 2]);
  lat.log_likelihood = ll;
  return lat;
}

double CtcLogLikelihood(const Tensor &logprobs, const LabelSeq &z) {
  return CtcForwardBackward(logprobs, z).log_likelihood;
}

double BruteForceLogLikelihood(const Tensor &logprobs, const LabelSeq &z) {
  CheckLogprobs(logprobs);
  const int n_labels = static_cast<int>(logprobs.Dim(1));
  z.Validate(n_labels);
  const int frames = static_cast<int>(logprobs.Dim(0));
  double paths = 1.0;
  for (int t = 0; t < frames; ++t) {
    paths *= n_labels;
    if (paths > 1e7) {
      RC_ERR << "brute-force path enumeration bound exceeded: " << n_labels
             << "^" << frames << " > 1e7";
    }
  }

  std::vector<int> path(frames, 0);
  double total = kLogZero;
  while (true) {
    // Collapse: merge adjacent repeats, drop blanks, compare against z.
    bool matches = true;
    int zi = 0;
    int prev = -1;
    for (int t = 0; t < frames && matches; ++t) {
      const int lab = path[t];
      if (lab != prev && lab != Alphabet::kBlankIndex) {
        if (zi >= z.Length() || z.symbols[zi] != lab) {
          matches = false;
        } else {
          ++zi;
        }
      }
      prev = lab;
    }
    if (matches && zi == z.Length()) {
      double lp = 0.0;
      for (int t = 0; t < frames; ++t) lp += logprobs.At(t, path[t]);
      total = LogAdd(total, lp);
    }
    // Next path in odometer order.
    int t = frames - 1;
    while (t >= 0 && path[t] == n_labels - 1) {
      path[t] = 0;
      --t;
    }
    if (t < 0) break;
    ++path[t];
  }
  return total;
}

Tensor CtcLabelPosteriors(const Tensor &logprobs, const LabelSeq &z) {
  const CtcLattice lat = CtcForwardBackward(logprobs, z);
  const int frames = static_cast<int>(logprobs.Dim(0));
  const int n_labels = static_cast<int>(logprobs.Dim(1));
  const int states = 2 * z.Length() + 1;

  Tensor gamma = Tensor::Zeros({frames, n_labels});
  for (int t = 0; t < frames; ++t) {
    std::vector<double> acc(n_labels, kLogZero);
    for (int s = 0; s < states; ++s) {
      const int lab = StateLabel(z, s);
      const double mass =
          lat.log_alpha[t][s] + lat.log_beta[t][s] - logprobs.At(t, lab);
      acc[lab] = LogAdd(acc[lab], mass);
    }
    for (int k = 0; k < n_labels; ++k) {
      gamma.At(t, k) =
          acc[k] == kLogZero ? 0.0 : std::exp(acc[k] - lat.log_likelihood);
    }
  }
  return gamma;
}

Tensor CtcLogitGradient(const Tensor &logprobs, const LabelSeq &z) {
  const Tensor gamma = CtcLabelPosteriors(logprobs, z);
  Tensor grad(logprobs.shape());
  for (int64_t i = 0; i < grad.NumElements(); ++i) {
    grad[i] = std::exp(logprobs[i]) - gamma[i];
  }
  return grad;
}

Var CtcLoss(const Var &logprobs, const LabelSeq &z) {
  const Tensor gamma = CtcLabelPosteriors(logprobs->value, z);
  const double ll = CtcLogLikelihood(logprobs->value, z);
  auto n = std::make_shared<Node>();
  n->value = Tensor::Scalar(-ll);
  n->parents = {logprobs};
  n->requires_grad = logprobs->requires_grad;
  n->backprop = [gamma](Node &node) {
    Node &p = *node.parents[0];
    if (p.grad.NumElements() != p.value.NumElements()) {
      p.grad = Tensor::Zeros(p.value.shape());
    }
    const double g = node.grad[0];
    for (int64_t i = 0; i < p.grad.NumElements(); ++i) {
      p.grad[i] -= g * gamma[i];
    }
  };
  return n;
}

Var CtcBatchLoss(const std::vector<Var> &logprob_batch,
                 const std::vector<LabelSeq> &label_batch,
                 const std::vector<std::string> &utterance_ids,
                 LossReduction reduction) {
  if (logprob_batch.empty()) RC_ERR << "ctc_batch_loss on empty batch";
  if (logprob_batch.size() != label_batch.size() ||
      logprob_batch.size() != utterance_ids.size()) {
    RC_ERR << "ctc_batch_loss size mismatch: " << logprob_batch.size()
           << " logprobs, " << label_batch.size() << " labels, "
           << utterance_ids.size() << " ids";
  }

  std::string bad;
  for (size_t i = 0; i < logprob_batch.size(); ++i) {
    const Tensor &lp = logprob_batch[i]->value;
    if (lp.Rank() != 2 || lp.Dim(0) < label_batch[i].MinFrames()) {
      if (!bad.empty()) bad += ", ";
      bad += utterance_ids[i];
    }
  }
  if (!bad.empty()) {
    RC_ERR << "ctc_batch_loss: label sequence too long for T' in: " << bad;
  }

  std::vector<Var> losses;
  losses.reserve(logprob_batch.size());
  for (size_t i = 0; i < logprob_batch.size(); ++i) {
    losses.push_back(CtcLoss(logprob_batch[i], label_batch[i]));
  }
  Var mean = MeanOf(losses);
  if (reduction == LossReduction::kSum) {
    return Scale(mean, static_cast<double>(losses.size()));
  }
  return mean;
}

std::vector<AlignedLabel> ViterbiAlign(const Tensor &logprobs,
                                       const LabelSeq &z) {
  CheckAdmissible(logprobs, z);
  const int frames = static_cast<int>(logprobs.Dim(0));
  const int states = 2 * z.Length() + 1;
  auto lp = [&](int t, int s) { return logprobs.At(t, StateLabel(z, s)); };

  std::vector<std::vector<double>> score(frames,
                                         std::vector<double>(states, kLogZero));
  std::vector<std::vector<int>> back(frames, std::vector<int>(states, -1));
  score[0][0] = lp(0, 0);
  if (states > 1) score[0][1] = lp(0, 1);
  for (int t = 1; t < frames; ++t) {
    for (int s = 0; s < states; ++s) {
      double best = score[t - 1][s];
      int from = s;
      if (s >= 1 && score[t - 1][s - 1] > best) {
        best = score[t - 1][s - 1];
        from = s - 1;
      }
      if (s >= 2 && SkipAllowed(z, s) && score[t - 1][s - 2] > best) {
        best = score[t - 1][s - 2];
        from = s - 2;
      }
      if (best == kLogZero) continue;
      score[t][s] = best + lp(t, s);
      back[t][s] = from;
    }
  }

  int s = states - 1;
  if (states > 1 && score[frames - 1][states - 2] > score[frames - 1][s]) {
    s = states - 2;
  }
  std::vector<int> state_of_frame(frames);
  for (int t = frames - 1; t >= 0; --t) {
    state_of_frame[t] = s;
    if (t > 0) s = back[t][s];
  }

  std::vector<AlignedLabel> out;
  for (int t = 0; t < frames; ++t) {
    const int st = state_of_frame[t];
    if (st % 2 == 0) continue;  // blank state
    const int lab = z.symbols[st / 2];
    if (!out.empty() && out.back().last_frame == t - 1 &&
        state_of_frame[t - 1] == st) {
      AlignedLabel &cur = out.back();
      cur.last_frame = t;
      if (logprobs.At(t, lab) > cur.peak_logprob) {
        cur.peak_logprob = logprobs.At(t, lab);
        cur.peak_frame = t;
      }
    } else {
      out.push_back({lab, t, t, t, logprobs.At(t, lab)});
    }
  }
  return out;
}

}  // namespace rcnnctc
