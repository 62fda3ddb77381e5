// tests/test_model.cc

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
#include <cstdio>
#include <filesystem>
#include <vector>

#include "doctest.h"
#include "rcnnctc/autodiff.h"
#include "rcnnctc/checkpoint.h"
#include "rcnnctc/error.h"
#include "rcnnctc/model.h"
#include "rcnnctc/rng.h"
#include "rcnnctc/tensor.h"
#include "testutil.h"

using namespace rcnnctc;
using testutil::BitIdentical;
using testutil::RandTensor;

namespace {

ModelSpec ToySpec() {
  ModelSpec s;
  s.width = 1;
  s.group_maps = {8, 16, 32, 64};
  s.conv1_maps = 8;
  s.n_labels = 5;
  return s;
}

}  // namespace

TEST_CASE("weighted layer counts") {
  ModelSpec s;
  s.n_blocks_per_group = 5;
  CHECK(CountWeightedLayers(s) == 42);
  s.n_blocks_per_group = 2;
  CHECK(CountWeightedLayers(s) == 18);
  s.n_blocks_per_group = 1;
  CHECK(CountWeightedLayers(s) == 10);
}

TEST_CASE("build is deterministic in the seed") {
  ModelSpec spec = ToySpec();
  Model a = Model::Build(spec, 7);
  Model b = Model::Build(spec, 7);
  auto da = a.StateDict();
  auto db = b.StateDict();
  REQUIRE(da.size() == db.size());
  for (const auto &[name, t] : da) {
    REQUIRE(db.count(name) == 1);
    CHECK(BitIdentical(t, db.at(name)));
  }

  Model c = Model::Build(spec, 8);
  bool any_diff = false;
  for (const auto &[name, t] : c.StateDict())
    if (!BitIdentical(t, da.at(name))) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("forward shapes, normalization, and downsample factors") {
  ModelSpec spec = ToySpec();
  Model model = Model::Build(spec, 1);
  model.SetTrainMode(false);
  CHECK(model.TimeDownsampleFactor() == 4);
  CHECK(model.FreqDownsampleFactor() == 8);

  Rng rng(2);
  Tensor x = RandTensor({1, 3, 40, 64}, &rng);
  Tensor y = model.Forward(x);
  CHECK(y.shape() == std::vector<int64_t>({1, 16, 5}));
  for (int64_t t = 0; t < y.Dim(1); ++t) {
    double sum = 0.0;
    for (int64_t l = 0; l < y.Dim(2); ++l) sum += std::exp(y.At(0, t, l));
    CHECK(std::abs(sum - 1.0) < 1e-6);
  }

  for (int64_t frames : {32, 64, 128}) {
    Tensor xi = RandTensor({1, 3, 40, frames}, &rng);
    Tensor yi = model.Forward(xi);
    CHECK(yi.Dim(1) == frames / model.TimeDownsampleFactor());
  }

  Tensor odd = RandTensor({1, 3, 40, 37}, &rng);
  CHECK(model.Forward(odd).Dim(1) == 10);  // ceil(ceil(37/2)/2)
}

TEST_CASE("batch members are independent") {
  ModelSpec spec = ToySpec();
  Model model = Model::Build(spec, 3);
  model.SetTrainMode(false);
  Rng rng(4);
  Tensor one = RandTensor({1, 3, 40, 16}, &rng);
  std::vector<double> doubled = one.vec();
  doubled.insert(doubled.end(), one.vec().begin(), one.vec().end());
  Tensor two({2, 3, 40, 16}, doubled);
  Tensor y = model.Forward(two);
  for (int64_t t = 0; t < y.Dim(1); ++t)
    for (int64_t l = 0; l < y.Dim(2); ++l)
      CHECK(y.At(0, t, l) == doctest::Approx(y.At(1, t, l)).epsilon(1e-12));
}

TEST_CASE("eval-mode forward is repeatable and leaves running stats alone") {
  ModelSpec spec = ToySpec();
  Model model = Model::Build(spec, 5);
  model.SetTrainMode(false);
  Rng rng(6);
  Tensor x = RandTensor({1, 3, 40, 16}, &rng);
  Tensor before = model.bn_states().begin()->second.running_mean;
  Tensor y1 = model.Forward(x);
  Tensor y2 = model.Forward(x);
  CHECK(BitIdentical(y1, y2));
  CHECK(BitIdentical(before, model.bn_states().begin()->second.running_mean));
}

TEST_CASE("residual block with zero F path is the identity") {
  ModelSpec spec = ToySpec();
  Model model = Model::Build(spec, 9);
  // Group 1 keeps conv1's maps at stride (1,1), so there is no projection.
  REQUIRE_FALSE(model.groups()[0][0].has_projection);
  Tensor &wa = model.params().at("g1/b1/conv_a/w")->value;
  Tensor &wb = model.params().at("g1/b1/conv_b/w")->value;
  for (int64_t i = 0; i < wa.NumElements(); ++i) wa[i] = 0.0;
  for (int64_t i = 0; i < wb.NumElements(); ++i) wb[i] = 0.0;

  Rng rng(10);
  Tensor x = RandTensor({1, 8, 20, 12}, &rng);
  Var y = ApplyResidualBlock(Constant(x), model.groups()[0][0],
                             &model.bn_states());
  CHECK(BitIdentical(x, y->value));
}

TEST_CASE("residual block maps zero to zero") {
  ModelSpec spec = ToySpec();
  Model model = Model::Build(spec, 11);
  Tensor x = Tensor::Zeros({1, 8, 20, 12});
  Var y = ApplyResidualBlock(Constant(x), model.groups()[0][0],
                             &model.bn_states());
  for (int64_t i = 0; i < y->value.NumElements(); ++i)
    CHECK(y->value[i] == 0.0);
}

TEST_CASE("projection appears exactly when shape changes") {
  ModelSpec spec = ToySpec();
  Model model = Model::Build(spec, 12);
  CHECK_FALSE(model.groups()[0][0].has_projection);  // 8 -> 8, stride 1
  CHECK(model.groups()[1][0].has_projection);        // 8 -> 16
  CHECK(model.groups()[2][0].has_projection);        // stride (2,1)
  CHECK(model.groups()[3][0].has_projection);        // stride (2,2)

  ModelSpec two = ToySpec();
  two.n_blocks_per_group = 2;
  Model m2 = Model::Build(two, 12);
  CHECK(m2.groups()[1][0].has_projection);
  CHECK_FALSE(m2.groups()[1][1].has_projection);  // second block: 16 -> 16
}

TEST_CASE("residual block gradient matches finite differences") {
  BNState bn_a(2), bn_b(3);
  bn_a.mode = bn_b.mode = BNMode::kTrain;
  std::map<std::string, BNState> states{{"blk/bn_a", bn_a},
                                        {"blk/bn_b", bn_b}};

  ResidualBlock block;
  block.conv_a_spec = ConvSpec{3, 3, 2, 3, 1, 1};
  block.conv_b_spec = ConvSpec{3, 3, 3, 3, 1, 1};
  block.proj_spec = ConvSpec{1, 1, 2, 3, 1, 1};
  block.has_projection = true;
  block.bn_a_key = "blk/bn_a";
  block.bn_b_key = "blk/bn_b";

  Rng rng(13);
  ParamMap params;
  auto make = [&](const char *name, Tensor t) {
    Var v = Parameter(name, std::move(t));
    params[name] = v;
    return v;
  };
  block.bn_a_gamma = make("bn_a/g", RandTensor({2}, &rng, 0.5, 1.5));
  block.bn_a_beta = make("bn_a/b", RandTensor({2}, &rng, -0.3, 0.3));
  block.conv_a_w = make("conv_a/w",
                        RandTensor(ConvWeightShape(block.conv_a_spec), &rng));
  block.bn_b_gamma = make("bn_b/g", RandTensor({3}, &rng, 0.5, 1.5));
  block.bn_b_beta = make("bn_b/b", RandTensor({3}, &rng, -0.3, 0.3));
  block.conv_b_w = make("conv_b/w",
                        RandTensor(ConvWeightShape(block.conv_b_spec), &rng));
  block.proj_w = make("proj/w",
                      RandTensor(ConvWeightShape(block.proj_spec), &rng));
  Var x = make("x", RandTensor({1, 2, 4, 5}, &rng));
  Tensor mask = RandTensor({1, 3, 4, 5}, &rng);

  auto forward = [&]() {
    Var y = ApplyResidualBlock(params["x"], block, &states);
    return Sum(Mul(y, Constant(mask)));
  };
  GradientMap grads = Backward(forward(), params);
  auto loss_value = [&]() { return forward()->value[0]; };
  for (auto &[name, var] : params) {
    double worst = testutil::FiniteDiffWorstErr(loss_value, &var->value,
                                                grads.at(name), 5);
    INFO("parameter ", name);
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("model spec config round trip") {
  ModelSpec spec;
  spec.n_blocks_per_group = 3;
  spec.width = 2;
  spec.input_channels = 1;
  spec.freq_bins = 20;
  spec.group_maps = {4, 8, 12, 16};
  spec.group_strides = {{{1, 1}, {2, 1}, {2, 2}, {1, 2}}};
  spec.stride_order = StrideOrder::kTimeFreq;
  spec.conv1_filter_time = 21;
  spec.conv1_filter_freq = 5;
  spec.conv1_maps = 6;
  spec.conv1_stride_freq = 1;
  spec.conv1_stride_time = 2;
  spec.n_labels = 9;
  spec.head = HeadKind::kMeanPoolFreq;
  spec.alphabet = "_abcdefg";

  ModelSpec back = ModelSpecFromConfig(ModelSpecToConfig(spec));
  CHECK(back.n_blocks_per_group == spec.n_blocks_per_group);
  CHECK(back.width == spec.width);
  CHECK(back.input_channels == spec.input_channels);
  CHECK(back.freq_bins == spec.freq_bins);
  CHECK(back.group_maps == spec.group_maps);
  CHECK(back.group_strides == spec.group_strides);
  CHECK(back.stride_order == spec.stride_order);
  CHECK(back.conv1_filter_time == spec.conv1_filter_time);
  CHECK(back.conv1_filter_freq == spec.conv1_filter_freq);
  CHECK(back.conv1_maps == spec.conv1_maps);
  CHECK(back.conv1_stride_freq == spec.conv1_stride_freq);
  CHECK(back.conv1_stride_time == spec.conv1_stride_time);
  CHECK(back.n_labels == spec.n_labels);
  CHECK(back.head == spec.head);
  CHECK(back.init == spec.init);
  CHECK(back.alphabet == spec.alphabet);

  CHECK_THROWS_AS(ModelSpecFromConfig("nonsense_key=1\n"), Error);

  std::string path =
      (std::filesystem::temp_directory_path() / "rcnnctc_spec.conf").string();
  WriteModelConfig(path, spec);
  ModelSpec from_file = ReadModelConfig(path);
  CHECK(from_file.alphabet == spec.alphabet);
  CHECK(from_file.group_strides == spec.group_strides);
  std::remove(path.c_str());
}

TEST_CASE("stride order flag swaps the pair reading") {
  ModelSpec spec = ToySpec();
  spec.stride_order = StrideOrder::kTimeFreq;
  // Pairs (2,1) and (2,2) now read as (time, freq).
  CHECK(spec.GroupStrideTime(2) == 2);
  CHECK(spec.GroupStrideFreq(2) == 1);
  Model model = Model::Build(spec, 14);
  CHECK(model.TimeDownsampleFactor() == 2 * 2 * 2);
  CHECK(model.FreqDownsampleFactor() == 2 * 2);
}

TEST_CASE("mean pool head produces the same time extent") {
  ModelSpec spec = ToySpec();
  spec.head = HeadKind::kMeanPoolFreq;
  Model model = Model::Build(spec, 15);
  model.SetTrainMode(false);
  Rng rng(16);
  Tensor y = model.Forward(RandTensor({1, 3, 40, 16}, &rng));
  CHECK(y.shape() == std::vector<int64_t>({1, 4, 5}));
  for (int64_t t = 0; t < y.Dim(1); ++t) {
    double sum = 0.0;
    for (int64_t l = 0; l < y.Dim(2); ++l) sum += std::exp(y.At(0, t, l));
    CHECK(std::abs(sum - 1.0) < 1e-6);
  }
}

TEST_CASE("state dict round trips through a checkpoint file") {
  ModelSpec spec = ToySpec();
  Model a = Model::Build(spec, 17);
  std::string path =
      (std::filesystem::temp_directory_path() / "rcnnctc_model.ckpt").string();
  WriteCheckpoint(path, a.StateDict());

  Model b = Model::Build(spec, 99);
  b.LoadStateDict(ReadCheckpoint(path));
  auto da = a.StateDict();
  auto db = b.StateDict();
  for (const auto &[name, t] : da) {
    const Tensor &got = db.at(name);
    for (int64_t i = 0; i < t.NumElements(); ++i)
      CHECK(got[i] == static_cast<double>(static_cast<float>(t[i])));
  }
  std::remove(path.c_str());
}

TEST_CASE("load state dict is strict about names") {
  ModelSpec spec = ToySpec();
  Model model = Model::Build(spec, 18);
  auto dict = model.StateDict();
  dict.erase("fc/b");
  dict["bogus/w"] = Tensor::Scalar(1.0);
  CHECK_THROWS_WITH_AS(model.LoadStateDict(dict), doctest::Contains("fc/b"),
                       Error);
  CHECK_THROWS_WITH_AS(model.LoadStateDict(dict),
                       doctest::Contains("bogus/w"), Error);
}

TEST_CASE("spec validation rejects nonsense") {
  ModelSpec bad = ToySpec();
  bad.n_labels = 1;
  CHECK_THROWS_AS(bad.Validate(), Error);

  ModelSpec maps = ToySpec();
  maps.group_maps[2] = 0;
  CHECK_THROWS_AS(maps.Validate(), Error);

  ModelSpec stride = ToySpec();
  stride.group_strides[1] = {0, 1};
  CHECK_THROWS_AS(stride.Validate(), Error);

  ModelSpec bins = ToySpec();
  bins.freq_bins = 0;
  CHECK_THROWS_AS(bins.Validate(), Error);

  ModelSpec blocks = ToySpec();
  blocks.n_blocks_per_group = 0;
  CHECK_THROWS_AS(blocks.Validate(), Error);
}

TEST_CASE("forward validates the feature shape") {
  ModelSpec spec = ToySpec();
  Model model = Model::Build(spec, 19);
  Rng rng(20);
  CHECK_THROWS_AS(model.Forward(RandTensor({1, 2, 40, 16}, &rng)),
                  ShapeError);
  CHECK_THROWS_AS(model.Forward(RandTensor({1, 3, 39, 16}, &rng)),
                  ShapeError);
  CHECK_THROWS_AS(model.Forward(RandTensor({3, 40, 16}, &rng)), ShapeError);
}

TEST_CASE("full-scale table config builds") {
  ModelSpec full;  // width 2, maps 64..512, conv1 32
  full.n_labels = 30;
  Model model = Model::Build(full, 21);
  CHECK(CountWeightedLayers(full) == 10);
  CHECK(model.params().at("conv1/w")->value.shape() ==
        std::vector<int64_t>({32, 3, 11, 41}));
  // Flatten head: 512 maps x width 2 over 40/8 = 5 remaining bins.
  CHECK(model.params().at("fc/w")->value.shape() ==
        std::vector<int64_t>({30, 1024 * 5}));
}

TEST_CASE("effective maps scale with width") {
  ModelSpec spec;
  spec.width = 2;
  CHECK(spec.EffectiveMaps(0) == 128);
  CHECK(spec.EffectiveMaps(3) == 1024);
}

TEST_CASE("train mode toggles every batch norm state") {
  ModelSpec spec = ToySpec();
  Model model = Model::Build(spec, 22);
  model.SetTrainMode(true);
  for (const auto &[key, state] : model.bn_states())
    CHECK(state.mode == BNMode::kTrain);
  model.SetTrainMode(false);
  for (const auto &[key, state] : model.bn_states())
    CHECK(state.mode == BNMode::kEval);
}
