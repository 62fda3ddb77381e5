// src/train.cc

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

#include "rcnnctc/train.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "rcnnctc/autodiff.h"
#include "rcnnctc/checkpoint.h"
#include "rcnnctc/decoder.h"
#include "rcnnctc/error.h"
#include "rcnnctc/metrics.h"
#include "rcnnctc/rng.h"

namespace rcnnctc {

void TrainConfig::Validate() const {
  model.Validate();
  if (lr_init < 4e-5 || lr_init > 0.1)
    RC_ERR << "initial learning rate must lie in [4e-5, 0.1], got " << lr_init;
  if (!(lr_decay > 0.0) || lr_decay > 1.0)
    RC_ERR << "lr_decay must lie in (0, 1], got " << lr_decay;
  if (decay_every < 1) RC_ERR << "decay_every must be >= 1, got "
                              << decay_every;
  if (epochs < 1) RC_ERR << "epochs must be >= 1, got " << epochs;
  if (batch_size < 1) RC_ERR << "batch_size must be >= 1, got " << batch_size;
}

LabelSeq TranscriptToLabels(const std::vector<std::string> &transcript,
                            const Alphabet &alphabet,
                            const std::string &utterance_id) {
  LabelSeq z;
  for (const std::string &word : transcript) {
    for (char c : word) {
      int idx = alphabet.IndexOf(std::string(1, c));
      if (idx < 0)
        RC_ERR << "utterance '" << utterance_id << "': character '" << c
               << "' of word '" << word << "' is not in the alphabet";
      z.symbols.push_back(idx);
    }
    z.symbols.push_back(Alphabet::kDelimiterIndex);
  }
  return z;
}

namespace {

int64_t DownsampledFrames(int64_t frames, int factor) {
  return (frames + factor - 1) / factor;
}

Tensor SqueezeLogprobs(const Tensor &batch_out) {
  // [1, T', labels] -> [T', labels]
  return Tensor({batch_out.Dim(1), batch_out.Dim(2)}, batch_out.vec());
}

double DevWerPercent(Model *model, const Corpus &dev, const Alphabet &alphabet,
                     const DecodeTiming &timing) {
  model->SetTrainMode(false);
  TranscriptMap hyps;
  RefMap refs;
  for (const auto &kv : dev.utterances) {
    const Tensor &f = kv.second.features;
    Tensor logprobs = SqueezeLogprobs(
        model->Forward(Tensor({1, f.Dim(0), f.Dim(1), f.Dim(2)}, f.vec())));
    Hypothesis hyp = GreedyDecode(logprobs, alphabet, timing, kv.first, "dev");
    hyps.emplace(kv.first, hyp.Transcript());
    refs.emplace(kv.first, kv.second.transcript);
  }
  return ScoreWer(hyps, refs).WerPercent();
}

}  // namespace

std::string FormatEpochStats(const EpochStats &stats) {
  std::ostringstream os;
  os << "epoch=" << stats.epoch << " lr=" << std::fixed
     << std::setprecision(6) << stats.lr << " loss=" << std::setprecision(6)
     << stats.mean_loss << " dev_wer=" << std::setprecision(2)
     << stats.dev_wer;
  return os.str();
}

TrainResult Train(const Corpus &train_corpus, const Corpus &dev_corpus,
                  const TrainConfig &config, const std::string &out_dir,
                  std::ostream *progress) {
  config.Validate();
  if (config.model.alphabet.empty())
    RC_ERR << "training needs the model alphabet to be set";
  Alphabet alphabet = AlphabetFromString(config.model.alphabet);
  if (train_corpus.utterances.empty()) RC_ERR << "training corpus is empty";
  if (dev_corpus.utterances.empty()) RC_ERR << "dev corpus is empty";

  Model model = Model::Build(config.model, config.seed);
  const int factor = model.TimeDownsampleFactor();
  const DecodeTiming timing{train_corpus.frame_shift_s, factor};

  // Precompute label sequences and reject utterances whose targets cannot
  // fit the downsampled frame count.
  std::map<std::string, LabelSeq> labels;
  std::ostringstream inadmissible;
  bool any_bad = false;
  for (const auto &kv : train_corpus.utterances) {
    LabelSeq z = TranscriptToLabels(kv.second.transcript, alphabet, kv.first);
    z.Validate(alphabet.Size());
    int64_t frames = DownsampledFrames(kv.second.features.Dim(2), factor);
    if (frames < z.MinFrames()) {
      inadmissible << " '" << kv.first << "' (needs " << z.MinFrames()
                   << " frames, has " << frames << ")";
      any_bad = true;
    }
    labels.emplace(kv.first, std::move(z));
  }
  if (any_bad)
    RC_ERR << "label sequences too long for the downsampled frame count:"
           << inadmissible.str();

  std::filesystem::create_directories(out_dir);
  WriteModelConfig(out_dir + "/model.conf", config.model);
  std::ofstream log(out_dir + "/train.log", std::ios::binary);
  if (!log) RC_ERR << "cannot open '" << out_dir << "/train.log' for writing";

  std::vector<std::string> ids;
  ids.reserve(train_corpus.utterances.size());
  for (const auto &kv : train_corpus.utterances) ids.push_back(kv.first);

  Rng shuffle_rng(config.seed + 1);
  TrainResult result;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    double lr = config.lr_init *
                std::pow(config.lr_decay, (epoch - 1) / config.decay_every);
    model.SetTrainMode(true);
    shuffle_rng.Shuffle(&ids);

    double loss_sum = 0.0;
    int64_t n_done = 0;
    for (size_t start = 0; start < ids.size();
         start += static_cast<size_t>(config.batch_size)) {
      size_t end = std::min(ids.size(),
                            start + static_cast<size_t>(config.batch_size));
      std::vector<Var> outputs;
      std::vector<LabelSeq> targets;
      std::vector<std::string> batch_ids;
      for (size_t i = start; i < end; ++i) {
        const Utterance &utt = train_corpus.utterances.at(ids[i]);
        const Tensor &f = utt.features;
        Var x = Constant(Tensor({1, f.Dim(0), f.Dim(1), f.Dim(2)}, f.vec()));
        Var out = model.ForwardVar(x);
        outputs.push_back(
            Reshape(out, {out->value.Dim(1), out->value.Dim(2)}));
        targets.push_back(labels.at(ids[i]));
        batch_ids.push_back(ids[i]);
      }
      Var loss =
          CtcBatchLoss(outputs, targets, batch_ids, config.reduction);
      double batch_sum = config.reduction == LossReduction::kMean
                             ? loss->value[0] * static_cast<double>(
                                                    batch_ids.size())
                             : loss->value[0];
      if (!std::isfinite(batch_sum))
        RC_ERR << "training diverged at epoch " << epoch
               << " (non-finite loss)";
      loss_sum += batch_sum;
      n_done += static_cast<int64_t>(batch_ids.size());

      GradientMap grads = Backward(loss, model.params());
      SgdStep(&model.params(), grads, lr);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.lr = lr;
    stats.mean_loss = loss_sum / static_cast<double>(n_done);
    stats.dev_wer = DevWerPercent(&model, dev_corpus, alphabet, timing);

    std::ostringstream name;
    name << out_dir << "/ep" << std::setw(3) << std::setfill('0') << epoch
         << ".ckpt";
    WriteCheckpoint(name.str(), model.StateDict());
    WriteCheckpoint(out_dir + "/final.ckpt", model.StateDict());

    std::string line = FormatEpochStats(stats);
    log << line << "\n";
    log.flush();
    if (progress) *progress << line << std::endl;
    result.epochs.push_back(stats);
    result.final_dev_wer = stats.dev_wer;

    if (config.target_dev_wer >= 0.0 &&
        stats.dev_wer <= config.target_dev_wer) {
      result.early_stopped = true;
      break;
    }
  }
  return result;
}

}  // namespace rcnnctc
