// include/rcnnctc/train.h

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

#ifndef RCNNCTC_TRAIN_H_
#define RCNNCTC_TRAIN_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rcnnctc/ctc.h"
#include "rcnnctc/features.h"
#include "rcnnctc/model.h"

namespace rcnnctc {

struct TrainConfig {
  ModelSpec model;
  double lr_init = 0.02;
  double lr_decay = 0.1;  // multiplies the rate every decay_every epochs
  int decay_every = 10;
  int epochs = 20;
  int batch_size = 4;
  uint64_t seed = 1;
  LossReduction reduction = LossReduction::kMean;
  // Early-stop once dev WER (percent) reaches this; negative disables.
  double target_dev_wer = -1.0;

  void Validate() const;
};

struct EpochStats {
  int epoch = 0;
  double lr = 0.0;
  double mean_loss = 0.0;
  double dev_wer = 0.0;  // percent
};

struct TrainResult {
  std::vector<EpochStats> epochs;
  bool early_stopped = false;
  double final_dev_wer = 0.0;  // percent
};

// Builds label sequences from transcripts using the model's alphabet.
// Throws, naming the utterance, on characters outside the alphabet.
LabelSeq TranscriptToLabels(const std::vector<std::string> &transcript,
                            const Alphabet &alphabet,
                            const std::string &utterance_id);

// SGD training with a stepped learning-rate decay. Each epoch shuffles the
// utterances, runs batches, then greedy-decodes the dev set for WER. Writes
// model.conf, per-epoch checkpoints (epNNN.ckpt), final.ckpt and train.log
// into out_dir; appends one log line per epoch to *progress when given.
// Utterances too short for their label sequence at the model's downsampling
// factor are a hard error listing every offending id. A non-finite loss
// aborts with an error naming the epoch.
TrainResult Train(const Corpus &train_corpus, const Corpus &dev_corpus,
                  const TrainConfig &config, const std::string &out_dir,
                  std::ostream *progress);

// One epoch-style log line, e.g. "epoch=3 lr=0.020000 loss=1.234567
// dev_wer=12.50".
std::string FormatEpochStats(const EpochStats &stats);

}  // namespace rcnnctc

#endif  // RCNNCTC_TRAIN_H_
