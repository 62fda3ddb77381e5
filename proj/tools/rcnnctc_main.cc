// tools/rcnnctc_main.cc

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

// Command-line front end: synth | train | decode | combine | select | score.
// All outputs are deterministic for a fixed seed and inputs; errors print a
// single line to stderr and exit nonzero.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rcnnctc/checkpoint.h"
#include "rcnnctc/combine.h"
#include "rcnnctc/ctc.h"
#include "rcnnctc/decoder.h"
#include "rcnnctc/error.h"
#include "rcnnctc/features.h"
#include "rcnnctc/hypothesis.h"
#include "rcnnctc/metrics.h"
#include "rcnnctc/model.h"
#include "rcnnctc/synth.h"
#include "rcnnctc/train.h"

namespace rcnnctc {
namespace {

FeatureMap FeaturesOfCorpus(const Corpus &corpus) {
  FeatureMap out;
  for (const auto &kv : corpus.utterances)
    out.emplace(kv.first, kv.second.features);
  return out;
}

RefMap RefsOfCorpus(const Corpus &corpus) {
  RefMap out;
  for (const auto &kv : corpus.utterances)
    out.emplace(kv.first, kv.second.transcript);
  return out;
}

Corpus LoadCorpus(const std::string &features_path,
                  const std::string &refs_path) {
  Corpus corpus;
  FeatureMap features = ReadFeatureFile(features_path, &corpus.frame_shift_s);
  RefMap refs = ReadReferences(refs_path);
  std::ostringstream missing;
  bool any_missing = false;
  for (auto &kv : features) {
    auto it = refs.find(kv.first);
    if (it == refs.end()) {
      missing << " '" << kv.first << "'";
      any_missing = true;
      continue;
    }
    Utterance utt;
    utt.features = std::move(kv.second);
    utt.transcript = it->second;
    corpus.utterances.emplace(kv.first, std::move(utt));
  }
  if (any_missing)
    RC_ERR << "no reference transcript for:" << missing.str();
  return corpus;
}

void WriteCorpusSplit(const Corpus &corpus, const std::string &out_dir,
                      const std::string &name) {
  WriteFeatureFile(out_dir + "/" + name + ".fbank", FeaturesOfCorpus(corpus),
                   corpus.frame_shift_s);
  WriteReferences(out_dir + "/" + name + ".ref", RefsOfCorpus(corpus));
}

int RunSynth(const SynthConfig &config, const std::string &out_dir) {
  SynthCorpus corpus = SynthesizeCorpus(config);
  std::filesystem::create_directories(out_dir);
  WriteCorpusSplit(corpus.train, out_dir, "train");
  WriteCorpusSplit(corpus.dev, out_dir, "dev");
  WriteCorpusSplit(corpus.test, out_dir, "test");
  std::ofstream vocab(out_dir + "/vocab.txt", std::ios::binary);
  if (!vocab) RC_ERR << "cannot open '" << out_dir << "/vocab.txt'";
  for (const std::string &w : corpus.vocabulary) vocab << w << "\n";
  std::cout << "wrote " << corpus.train.utterances.size() << " train, "
            << corpus.dev.utterances.size() << " dev, "
            << corpus.test.utterances.size() << " test utterances to "
            << out_dir << "\n";
  return 0;
}

struct TrainCli {
  std::string train_features, train_refs, dev_features, dev_refs, out_dir;
  std::string config_path;
  std::string maps = "64,128,256,512";
  std::string head = "flatten";
  std::string reduction = "mean";
  int blocks = 1;
  int width = 2;
  int conv1_maps = 32;
  TrainConfig config;
};

std::array<int, 4> ParseMaps(const std::string &csv) {
  std::array<int, 4> maps{};
  std::istringstream is(csv);
  std::string cell;
  int i = 0;
  while (std::getline(is, cell, ',')) {
    if (i >= 4) RC_ERR << "--maps needs exactly 4 values";
    try {
      maps[static_cast<size_t>(i++)] = std::stoi(cell);
    } catch (const std::exception &) {
      RC_ERR << "bad --maps value '" << cell << "'";
    }
  }
  if (i != 4) RC_ERR << "--maps needs exactly 4 values";
  return maps;
}

int RunTrain(TrainCli &cli) {
  Corpus train_corpus = LoadCorpus(cli.train_features, cli.train_refs);
  Corpus dev_corpus = LoadCorpus(cli.dev_features, cli.dev_refs);
  if (train_corpus.utterances.empty()) RC_ERR << "training corpus is empty";

  std::vector<std::string> all_words;
  for (const Corpus *c : {&train_corpus, &dev_corpus})
    for (const auto &kv : c->utterances)
      for (const std::string &w : kv.second.transcript)
        all_words.push_back(w);
  if (all_words.empty()) RC_ERR << "no transcript words to train on";
  Alphabet alphabet = Alphabet::ForCharacters(all_words);

  ModelSpec spec;
  if (!cli.config_path.empty()) {
    spec = ReadModelConfig(cli.config_path);
  } else {
    spec.n_blocks_per_group = cli.blocks;
    spec.width = cli.width;
    spec.group_maps = ParseMaps(cli.maps);
    spec.conv1_maps = cli.conv1_maps;
    if (cli.head == "flatten")
      spec.head = HeadKind::kFlatten;
    else if (cli.head == "mean_pool_freq")
      spec.head = HeadKind::kMeanPoolFreq;
    else
      RC_ERR << "unknown --head '" << cli.head << "'";
  }

  const Tensor &first =
      train_corpus.utterances.begin()->second.features;
  spec.input_channels = static_cast<int>(first.Dim(0));
  spec.freq_bins = static_cast<int>(first.Dim(1));
  for (const Corpus *c : {&train_corpus, &dev_corpus})
    for (const auto &kv : c->utterances) {
      const Tensor &f = kv.second.features;
      if (f.Dim(0) != spec.input_channels || f.Dim(1) != spec.freq_bins)
        RC_ERR << "utterance '" << kv.first << "' features are "
               << ShapeToString(f.shape()) << ", expected ["
               << spec.input_channels << ", " << spec.freq_bins
               << ", frames]";
    }
  spec.alphabet = AlphabetToString(alphabet);
  spec.n_labels = alphabet.Size();

  if (cli.reduction == "mean")
    cli.config.reduction = LossReduction::kMean;
  else if (cli.reduction == "sum")
    cli.config.reduction = LossReduction::kSum;
  else
    RC_ERR << "unknown --reduction '" << cli.reduction << "'";
  cli.config.model = spec;

  TrainResult result =
      Train(train_corpus, dev_corpus, cli.config, cli.out_dir, &std::cout);
  std::cout << "final dev_wer=" << std::fixed << std::setprecision(2)
            << result.final_dev_wer
            << (result.early_stopped ? " (early stop)" : "") << "\n";
  return 0;
}

struct DecodeCli {
  std::string config_path, checkpoint_path, features_path, out_path;
  std::string system_id = "s1";
  int beam = 0;
  int nbest = 1;
};

int RunDecode(const DecodeCli &cli) {
  ModelSpec spec = ReadModelConfig(cli.config_path);
  if (spec.alphabet.empty())
    RC_ERR << "model config has no alphabet; cannot decode";
  Alphabet alphabet = AlphabetFromString(spec.alphabet);
  Model model = Model::Build(spec, 0);
  model.LoadStateDict(ReadCheckpoint(cli.checkpoint_path));
  model.SetTrainMode(false);

  double frame_shift = 0.0;
  FeatureMap features = ReadFeatureFile(cli.features_path, &frame_shift);
  DecodeTiming timing{frame_shift, model.TimeDownsampleFactor()};

  std::vector<NBestEntry> entries;
  for (const auto &kv : features) {
    const Tensor &f = kv.second;
    Tensor out =
        model.Forward(Tensor({1, f.Dim(0), f.Dim(1), f.Dim(2)}, f.vec()));
    Tensor logprobs({out.Dim(1), out.Dim(2)}, out.vec());
    if (cli.beam > 0) {
      std::vector<NBestEntry> nbest =
          PrefixBeamDecode(logprobs, alphabet, cli.beam, cli.nbest, timing,
                           kv.first, cli.system_id);
      entries.insert(entries.end(), nbest.begin(), nbest.end());
    } else {
      NBestEntry entry;
      entry.hyp =
          GreedyDecode(logprobs, alphabet, timing, kv.first, cli.system_id);
      entries.push_back(std::move(entry));
    }
  }
  WriteHypothesesJsonl(cli.out_path, entries);
  std::cout << "wrote " << entries.size() << " hypotheses to " << cli.out_path
            << "\n";
  return 0;
}

struct CombineCli {
  std::vector<std::string> inputs;
  std::string out_path;
  std::string scheme = "frequency";
  std::string nbest_mode = "take_1best";
  double alpha = 0.3;
  double blank_conf = 0.3;
};

int RunCombine(const CombineCli &cli) {
  std::vector<std::vector<NBestEntry>> ranked;
  ranked.reserve(cli.inputs.size());
  for (const std::string &path : cli.inputs)
    ranked.push_back(ReadHypothesesJsonl(path));
  std::vector<std::vector<Hypothesis>> systems =
      IngestNBest(ranked, NBestModeFromName(cli.nbest_mode));

  VoteOptions options;
  options.scheme = VoteSchemeFromName(cli.scheme);
  options.alpha = cli.alpha;
  options.blank_confidence = cli.blank_conf;

  CombineResult result = Combine(systems, options);
  for (const std::string &w : result.warnings)
    std::cerr << "WARNING: " << w << "\n";
  Write1BestJsonl(cli.out_path, result.hypotheses);
  std::cout << "wrote " << result.hypotheses.size() << " hypotheses to "
            << cli.out_path << "\n";
  return 0;
}

struct SelectCli {
  std::vector<std::string> inputs;
  std::string refs_path;
  std::string out_path;
  double threshold = 0.005;
};

int RunSelect(const SelectCli &cli) {
  std::vector<std::vector<NBestEntry>> ranked;
  for (const std::string &path : cli.inputs)
    ranked.push_back(ReadHypothesesJsonl(path));
  std::vector<std::vector<Hypothesis>> systems =
      IngestNBest(ranked, NBestMode::kTake1Best);
  std::vector<SystemTranscripts> pool;
  pool.reserve(systems.size());
  for (const auto &sys : systems) pool.push_back(TranscriptsOfSystem(sys));

  RefMap refs = ReadReferences(cli.refs_path);
  SelectionResult result = SelectSubsystems(pool, refs, cli.threshold);

  std::cout << std::fixed << std::setprecision(6);
  for (size_t i = 0; i < result.steps.size(); ++i)
    std::cout << "step=" << i + 1 << " system=" << result.steps[i].system_id
              << " mcwr=" << result.steps[i].mcwr << "\n";
  std::cout << "selected:";
  for (const std::string &id : result.selected) std::cout << " " << id;
  std::cout << "\n";

  if (!cli.out_path.empty()) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json steps = nlohmann::ordered_json::array();
    for (const SelectionStep &s : result.steps) {
      nlohmann::ordered_json js;
      js["system"] = s.system_id;
      js["mcwr"] = s.mcwr;
      steps.push_back(std::move(js));
    }
    j["steps"] = std::move(steps);
    j["selected"] = result.selected;
    std::ofstream os(cli.out_path, std::ios::binary);
    if (!os) RC_ERR << "cannot open '" << cli.out_path << "' for writing";
    os << j.dump(2) << "\n";
  }
  return 0;
}

struct ScoreCli {
  std::string hyp_path, refs_path, out_path;
  bool json = false;
  double baseline_wer = -1.0;
};

int RunScore(const ScoreCli &cli) {
  std::vector<NBestEntry> entries = ReadHypothesesJsonl(cli.hyp_path);
  std::vector<Hypothesis> best;
  for (const NBestEntry &e : entries)
    if (e.rank == 0) best.push_back(e.hyp);
  TranscriptMap hyps = TranscriptsOf(best);
  RefMap refs = ReadReferences(cli.refs_path);
  WerReport report = ScoreWer(hyps, refs);
  for (const std::string &w : report.warnings)
    std::cerr << "WARNING: " << w << "\n";

  std::string text;
  if (cli.json) {
    nlohmann::ordered_json j =
        nlohmann::ordered_json::parse(WerReportJson(report));
    if (cli.baseline_wer > 0.0)
      j["werr_percent"] =
          WerReduction(cli.baseline_wer, report.WerPercent());
    text = j.dump(2) + "\n";
  } else {
    std::ostringstream os;
    os << FormatWerReport(report);
    if (cli.baseline_wer > 0.0) {
      os << "werr=" << std::fixed << std::setprecision(2)
         << WerReduction(cli.baseline_wer, report.WerPercent()) << "\n";
    }
    text = os.str();
  }
  if (cli.out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream os(cli.out_path, std::ios::binary);
    if (!os) RC_ERR << "cannot open '" << cli.out_path << "' for writing";
    os << text;
  }
  return 0;
}

int Run(int argc, char **argv) {
  CLI::App app{"residual CNN-CTC acoustic model toolkit"};
  app.require_subcommand(1);

  // synth
  SynthConfig synth_config;
  std::string synth_out;
  CLI::App *synth = app.add_subcommand("synth", "make a synthetic corpus");
  synth->add_option("--out-dir", synth_out, "output directory")->required();
  synth->add_option("--seed", synth_config.seed, "random seed");
  synth->add_option("--vocab", synth_config.vocab_size, "vocabulary size");
  synth->add_option("--utterances", synth_config.n_utterances,
                    "total utterance count");
  synth->add_option("--words-min", synth_config.words_min,
                    "min words per utterance");
  synth->add_option("--words-max", synth_config.words_max,
                    "max words per utterance");
  synth->add_option("--freq-bins", synth_config.freq_bins, "filterbank bins");
  synth->add_option("--char-frames", synth_config.char_frames,
                    "frames per character");
  synth->add_option("--gap-frames", synth_config.gap_frames,
                    "silent frames after each word");
  synth->add_option("--pad-frames", synth_config.pad_frames,
                    "silent frames at both ends");
  synth->add_option("--noise", synth_config.noise_sigma,
                    "white noise sigma");
  synth->add_option("--frame-shift", synth_config.frame_shift_s,
                    "frame shift in seconds");
  synth->add_option("--train-frac", synth_config.train_fraction,
                    "training split fraction");
  synth->add_option("--dev-frac", synth_config.dev_fraction,
                    "dev split fraction");

  // train
  TrainCli train_cli;
  CLI::App *train = app.add_subcommand("train", "train an acoustic model");
  train->add_option("--train-features", train_cli.train_features,
                    "training feature file")->required();
  train->add_option("--train-refs", train_cli.train_refs,
                    "training references")->required();
  train->add_option("--dev-features", train_cli.dev_features,
                    "dev feature file")->required();
  train->add_option("--dev-refs", train_cli.dev_refs, "dev references")
      ->required();
  train->add_option("--out-dir", train_cli.out_dir, "output directory")
      ->required();
  train->add_option("--config", train_cli.config_path,
                    "base model config file (overrides architecture flags)");
  train->add_option("--seed", train_cli.config.seed, "random seed");
  train->add_option("--epochs", train_cli.config.epochs, "epoch count");
  train->add_option("--batch-size", train_cli.config.batch_size,
                    "utterances per batch");
  train->add_option("--lr", train_cli.config.lr_init,
                    "initial learning rate");
  train->add_option("--lr-decay", train_cli.config.lr_decay,
                    "learning-rate decay factor");
  train->add_option("--decay-every", train_cli.config.decay_every,
                    "epochs between decays");
  train->add_option("--blocks", train_cli.blocks,
                    "residual blocks per group");
  train->add_option("--width", train_cli.width, "width multiplier");
  train->add_option("--maps", train_cli.maps,
                    "base feature maps per group, 4 comma-separated values");
  train->add_option("--conv1-maps", train_cli.conv1_maps,
                    "feature maps of the first convolution");
  train->add_option("--head", train_cli.head,
                    "head kind: flatten | mean_pool_freq");
  train->add_option("--reduction", train_cli.reduction,
                    "loss reduction: mean | sum");
  train->add_option("--target-dev-wer", train_cli.config.target_dev_wer,
                    "stop early at this dev WER percent (negative: off)");

  // decode
  DecodeCli decode_cli;
  CLI::App *decode = app.add_subcommand("decode", "decode features");
  decode->add_option("--config", decode_cli.config_path, "model config file")
      ->required();
  decode->add_option("--checkpoint", decode_cli.checkpoint_path,
                     "checkpoint file")->required();
  decode->add_option("--features", decode_cli.features_path, "feature file")
      ->required();
  decode->add_option("--out", decode_cli.out_path, "output JSONL path")
      ->required();
  decode->add_option("--system", decode_cli.system_id, "system id");
  decode->add_option("--beam", decode_cli.beam,
                     "prefix beam width (0: greedy)");
  decode->add_option("--nbest", decode_cli.nbest,
                     "hypotheses per utterance (beam mode)");

  // combine
  CombineCli combine_cli;
  CLI::App *combine = app.add_subcommand("combine", "combine system outputs");
  combine->add_option("--inputs", combine_cli.inputs,
                      "hypothesis JSONL files, one per system")
      ->required()
      ->expected(-1);
  combine->add_option("--out", combine_cli.out_path, "output JSONL path")
      ->required();
  combine->add_option("--scheme", combine_cli.scheme,
                      "frequency | freq_avg_conf | freq_max_conf");
  combine->add_option("--alpha", combine_cli.alpha,
                      "frequency weight in the vote score");
  combine->add_option("--blank-conf", combine_cli.blank_conf,
                      "confidence assigned to null arcs");
  combine->add_option("--nbest-mode", combine_cli.nbest_mode,
                      "take_1best | pool_all");

  // select
  SelectCli select_cli;
  CLI::App *select = app.add_subcommand("select",
                                        "greedy subsystem selection");
  select->add_option("--inputs", select_cli.inputs,
                     "hypothesis JSONL files, one per system")
      ->required()
      ->expected(-1);
  select->add_option("--refs", select_cli.refs_path,
                     "held-out references")->required();
  select->add_option("--mcwr-threshold", select_cli.threshold,
                     "minimum MCWR gain to keep adding systems");
  select->add_option("--out", select_cli.out_path, "JSON report path");

  // score
  ScoreCli score_cli;
  CLI::App *score = app.add_subcommand("score", "score hypotheses");
  score->add_option("--hyp", score_cli.hyp_path, "hypothesis JSONL file")
      ->required();
  score->add_option("--refs", score_cli.refs_path, "reference transcripts")
      ->required();
  score->add_flag("--json", score_cli.json, "emit JSON instead of a table");
  score->add_option("--out", score_cli.out_path,
                    "report path (default: stdout)");
  score->add_option("--baseline-wer", score_cli.baseline_wer,
                    "baseline WER percent; also report the relative "
                    "reduction");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e);
  }

  if (synth->parsed()) return RunSynth(synth_config, synth_out);
  if (train->parsed()) return RunTrain(train_cli);
  if (decode->parsed()) return RunDecode(decode_cli);
  if (combine->parsed()) return RunCombine(combine_cli);
  if (select->parsed()) return RunSelect(select_cli);
  if (score->parsed()) return RunScore(score_cli);
  return 1;
}

}  // namespace
}  // namespace rcnnctc

int main(int argc, char **argv) {
  try {
    return rcnnctc::Run(argc, argv);
  } catch (const std::exception &e) {
    std::string msg = e.what();
    for (char &c : msg)
      if (c == '\n') c = ' ';
    std::cerr << "ERROR: " << msg << "\n";
    return 1;
  }
}
