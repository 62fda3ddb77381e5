// src/synth.cc

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

#include "rcnnctc/synth.h"

#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "rcnnctc/error.h"
#include "rcnnctc/rng.h"

namespace rcnnctc {

void SynthConfig::Validate() const {
  if (vocab_size < 1) RC_ERR << "vocab_size must be >= 1, got " << vocab_size;
  if (n_utterances < 1)
    RC_ERR << "n_utterances must be >= 1, got " << n_utterances;
  if (words_min < 1 || words_max < words_min)
    RC_ERR << "need 1 <= words_min <= words_max, got " << words_min << ".."
           << words_max;
  if (freq_bins < 9) RC_ERR << "freq_bins must be >= 9, got " << freq_bins;
  if (char_frames < 1)
    RC_ERR << "char_frames must be >= 1, got " << char_frames;
  if (gap_frames < 1) RC_ERR << "gap_frames must be >= 1, got " << gap_frames;
  if (pad_frames < 0)
    RC_ERR << "pad_frames must be >= 0, got " << pad_frames;
  if (noise_sigma < 0.0)
    RC_ERR << "noise_sigma must be >= 0, got " << noise_sigma;
  if (!(frame_shift_s > 0.0))
    RC_ERR << "frame_shift_s must be positive, got " << frame_shift_s;
  if (!(train_fraction > 0.0) || dev_fraction < 0.0 ||
      train_fraction + dev_fraction > 1.0)
    RC_ERR << "bad split fractions " << train_fraction << "/" << dev_fraction;
}

namespace {

// Words are 3..6 letters with no adjacent repeats, so every character emits
// its own CTC peak and the minimum admissible frame count stays equal to the
// label count.
std::vector<std::string> MakeVocabulary(int vocab_size, Rng *rng) {
  std::set<std::string> seen;
  std::vector<std::string> vocab;
  int attempts = 0;
  while (static_cast<int>(vocab.size()) < vocab_size) {
    if (++attempts > 100000)
      RC_ERR << "cannot draw " << vocab_size << " distinct words";
    int len = rng->IntIn(3, 6);
    std::string w;
    while (static_cast<int>(w.size()) < len) {
      char c = static_cast<char>('a' + rng->Below(26));
      if (!w.empty() && w.back() == c) continue;
      w.push_back(c);
    }
    if (seen.insert(w).second) vocab.push_back(w);
  }
  return vocab;
}

struct CharTemplate {
  double center;
  double sigma;
  double amplitude;
};

std::map<char, CharTemplate> MakeTemplates(
    const std::vector<std::string> &vocab, int freq_bins, Rng *rng) {
  std::set<char> chars;
  for (const std::string &w : vocab)
    for (char c : w) chars.insert(c);
  // Spread the centers evenly so characters stay separable, with a small
  // jitter so bins are not exactly shared.
  std::map<char, CharTemplate> templates;
  const double margin = 4.0;
  const double span = freq_bins - 2.0 * margin;
  const int k_total = static_cast<int>(chars.size());
  int k = 0;
  for (char c : chars) {
    CharTemplate t;
    double base = k_total > 1
                      ? margin + span * static_cast<double>(k) / (k_total - 1)
                      : freq_bins / 2.0;
    t.center = base + rng->UniformIn(-0.5, 0.5);
    t.sigma = rng->UniformIn(1.6, 2.6);
    t.amplitude = rng->UniformIn(0.9, 1.1);
    templates.emplace(c, t);
    ++k;
  }
  return templates;
}

std::string UttId(int index) {
  std::ostringstream os;
  os << "utt" << std::setw(5) << std::setfill('0') << index;
  return os.str();
}

}  // namespace

SynthCorpus SynthesizeCorpus(const SynthConfig &config) {
  config.Validate();
  Rng rng(config.seed);

  SynthCorpus out;
  out.vocabulary = MakeVocabulary(config.vocab_size, &rng);
  std::map<char, CharTemplate> templates =
      MakeTemplates(out.vocabulary, config.freq_bins, &rng);
  Alphabet alphabet = Alphabet::ForCharacters(out.vocabulary);

  for (Corpus *c : {&out.train, &out.dev, &out.test}) {
    c->alphabet = alphabet;
    c->frame_shift_s = config.frame_shift_s;
  }
  int n_train = static_cast<int>(config.train_fraction * config.n_utterances);
  int n_dev = static_cast<int>(config.dev_fraction * config.n_utterances);

  for (int u = 0; u < config.n_utterances; ++u) {
    int n_words = rng.IntIn(config.words_min, config.words_max);
    std::vector<std::string> transcript;
    int frames = 2 * config.pad_frames;
    for (int w = 0; w < n_words; ++w) {
      const std::string &word =
          out.vocabulary[rng.Below(out.vocabulary.size())];
      transcript.push_back(word);
      frames += static_cast<int>(word.size()) * config.char_frames +
                config.gap_frames;
    }

    Tensor fbank = Tensor::Zeros({config.freq_bins, frames});
    int cursor = config.pad_frames;
    for (const std::string &word : transcript) {
      for (char c : word) {
        const CharTemplate &t = templates.at(c);
        for (int f = 0; f < config.char_frames; ++f) {
          for (int b = 0; b < config.freq_bins; ++b) {
            double d = (b - t.center) / t.sigma;
            fbank.At(b, cursor + f) = t.amplitude * std::exp(-0.5 * d * d);
          }
        }
        cursor += config.char_frames;
      }
      cursor += config.gap_frames;
    }
    if (config.noise_sigma > 0.0)
      for (int64_t i = 0; i < fbank.NumElements(); ++i)
        fbank[i] += config.noise_sigma * rng.Gaussian();

    Utterance utt;
    utt.features = StackDeltas(fbank);
    utt.transcript = std::move(transcript);

    Corpus *split = u < n_train           ? &out.train
                    : u < n_train + n_dev ? &out.dev
                                          : &out.test;
    split->utterances.emplace(UttId(u), std::move(utt));
  }
  return out;
}

}  // namespace rcnnctc
