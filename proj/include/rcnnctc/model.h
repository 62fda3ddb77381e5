// include/rcnnctc/model.h

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

#ifndef RCNNCTC_MODEL_H_
#define RCNNCTC_MODEL_H_

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rcnnctc/autodiff.h"
#include "rcnnctc/batchnorm.h"
#include "rcnnctc/conv.h"
#include "rcnnctc/tensor.h"

namespace rcnnctc {

// How the per-group stride pairs are read.
enum class StrideOrder { kFreqTime, kTimeFreq };

// What sits between the last residual group and the fully-connected layer.
enum class HeadKind { kFlatten, kMeanPoolFreq };

// Declarative description of the residual convolutional CTC network: a wide
// first convolution, four groups of pre-activation residual blocks (two 3x3
// convolutions each), then a per-frame fully-connected layer over the
// flattened frequency axis and a log-softmax over the labels.
struct ModelSpec {
  int n_blocks_per_group = 1;
  int width = 2;
  int input_channels = 3;
  int freq_bins = 40;
  std::array<int, 4> group_maps = {64, 128, 256, 512};
  // Stride pairs per group, read per stride_order (default (freq, time)).
  std::array<std::pair<int, int>, 4> group_strides = {
      {{1, 1}, {1, 1}, {2, 1}, {2, 2}}};
  StrideOrder stride_order = StrideOrder::kFreqTime;
  int conv1_filter_time = 41;
  int conv1_filter_freq = 11;
  int conv1_maps = 32;
  int conv1_stride_freq = 2;
  int conv1_stride_time = 2;
  int n_labels = 2;
  HeadKind head = HeadKind::kFlatten;
  std::string init = "fan_in_uniform";
  // Label strings after the blank, one character each (index 1 is the word
  // delimiter). Optional; required only for decoding.
  std::string alphabet;

  void Validate() const;
  int GroupStrideFreq(int group) const;
  int GroupStrideTime(int group) const;
  int EffectiveMaps(int group) const { return group_maps[group] * width; }
};

// conv1 + two convolutions per block + the fully-connected layer.
int CountWeightedLayers(const ModelSpec &spec);

// Plain-text key=value serialization.
std::string ModelSpecToConfig(const ModelSpec &spec);
ModelSpec ModelSpecFromConfig(const std::string &text);
void WriteModelConfig(const std::string &path, const ModelSpec &spec);
ModelSpec ReadModelConfig(const std::string &path);

// Parameter handles for one residual block. conv_a carries the group stride
// on the group's first block; the projection is present iff the skip path
// changes shape.
struct ResidualBlock {
  ConvSpec conv_a_spec, conv_b_spec, proj_spec;
  bool has_projection = false;
  Var bn_a_gamma, bn_a_beta, conv_a_w;
  Var bn_b_gamma, bn_b_beta, conv_b_w;
  Var proj_w;
  std::string bn_a_key, bn_b_key;
};

// y = F(x) + skip(x) with a pre-activation F path:
// BN -> ReLU -> conv -> BN -> ReLU -> conv.
Var ApplyResidualBlock(const Var &x, const ResidualBlock &block,
                       std::map<std::string, BNState> *bn_states);

class Model {
 public:
  // Deterministic construction: the same spec and seed give bit-identical
  // parameters.
  static Model Build(const ModelSpec &spec, uint64_t seed);

  const ModelSpec &spec() const { return spec_; }
  ParamMap &params() { return params_; }
  const ParamMap &params() const { return params_; }
  std::map<std::string, BNState> &bn_states() { return bn_states_; }

  void SetTrainMode(bool train);

  // Product of the time strides of conv1 and the groups.
  int TimeDownsampleFactor() const;
  int FreqDownsampleFactor() const;

  Var ApplyConv1(const Var &features);
  Var ApplyGroups(const Var &x);
  Var ApplyHead(const Var &x);

  // features [batch, channels, freq_bins, T] -> [batch, T', n_labels]
  // log-probabilities.
  Var ForwardVar(const Var &features);
  Tensor Forward(const Tensor &features);

  // Parameters plus batch-norm running statistics, for checkpoints.
  std::map<std::string, Tensor> StateDict() const;
  void LoadStateDict(const std::map<std::string, Tensor> &state);

  const std::vector<std::vector<ResidualBlock>> &groups() const {
    return groups_;
  }

 private:
  ModelSpec spec_;
  ParamMap params_;
  std::map<std::string, BNState> bn_states_;
  std::vector<std::vector<ResidualBlock>> groups_;  // [4][N]
  ConvSpec conv1_spec_;
  Var conv1_w_;
  Var head_bn_gamma_, head_bn_beta_;
  Var fc_w_, fc_b_;
  int64_t fc_in_dim_ = 0;
};

}  // namespace rcnnctc

#endif  // RCNNCTC_MODEL_H_
