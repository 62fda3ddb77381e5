// src/model.cc

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

#include "rcnnctc/model.h"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rcnnctc/error.h"
#include "rcnnctc/rng.h"

namespace rcnnctc {

void ModelSpec::Validate() const {
  if (n_blocks_per_group < 1)
    RC_ERR << "n_blocks_per_group must be >= 1, got " << n_blocks_per_group;
  if (width < 1) RC_ERR << "width must be >= 1, got " << width;
  if (input_channels < 1)
    RC_ERR << "input_channels must be >= 1, got " << input_channels;
  if (freq_bins < 1) RC_ERR << "freq_bins must be >= 1, got " << freq_bins;
  if (n_labels < 2)
    RC_ERR << "n_labels must be >= 2 (blank plus at least one label), got "
           << n_labels;
  for (int g = 0; g < 4; ++g) {
    if (group_maps[g] < 1)
      RC_ERR << "group " << g + 1 << " maps must be >= 1, got "
             << group_maps[g];
    if (group_strides[g].first < 1 || group_strides[g].second < 1)
      RC_ERR << "group " << g + 1 << " strides must be >= 1, got ("
             << group_strides[g].first << ", " << group_strides[g].second
             << ")";
  }
  if (conv1_filter_time < 1 || conv1_filter_freq < 1 || conv1_maps < 1 ||
      conv1_stride_time < 1 || conv1_stride_freq < 1)
    RC_ERR << "conv1 geometry must be positive";
  if (init != "fan_in_uniform")
    RC_ERR << "unknown init scheme '" << init << "'";
  if (!alphabet.empty() && static_cast<int>(alphabet.size()) + 1 != n_labels)
    RC_ERR << "alphabet has " << alphabet.size() << " labels but n_labels is "
           << n_labels << " (blank plus alphabet)";
}

int ModelSpec::GroupStrideFreq(int group) const {
  const auto &p = group_strides[group];
  return stride_order == StrideOrder::kFreqTime ? p.first : p.second;
}

int ModelSpec::GroupStrideTime(int group) const {
  const auto &p = group_strides[group];
  return stride_order == StrideOrder::kFreqTime ? p.second : p.first;
}

int CountWeightedLayers(const ModelSpec &spec) {
  return 2 + 8 * spec.n_blocks_per_group;
}

namespace {

std::string HeadName(HeadKind head) {
  return head == HeadKind::kFlatten ? "flatten" : "mean_pool_freq";
}

std::string StrideOrderName(StrideOrder order) {
  return order == StrideOrder::kFreqTime ? "freq_time" : "time_freq";
}

std::vector<std::string> SplitCsv(const std::string &s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

int ParseInt(const std::string &key, const std::string &value) {
  try {
    size_t pos = 0;
    int v = std::stoi(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception &) {
    RC_ERR << "bad integer for " << key << ": '" << value << "'";
  }
}

std::string Trim(const std::string &s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string ModelSpecToConfig(const ModelSpec &spec) {
  std::ostringstream os;
  os << "n_blocks=" << spec.n_blocks_per_group << "\n";
  os << "width=" << spec.width << "\n";
  os << "input_channels=" << spec.input_channels << "\n";
  os << "freq_bins=" << spec.freq_bins << "\n";
  os << "group_maps=";
  for (int g = 0; g < 4; ++g) os << (g ? "," : "") << spec.group_maps[g];
  os << "\n";
  os << "group_strides=";
  for (int g = 0; g < 4; ++g)
    os << (g ? "," : "") << spec.group_strides[g].first << "x"
       << spec.group_strides[g].second;
  os << "\n";
  os << "stride_order=" << StrideOrderName(spec.stride_order) << "\n";
  os << "conv1_filter_time=" << spec.conv1_filter_time << "\n";
  os << "conv1_filter_freq=" << spec.conv1_filter_freq << "\n";
  os << "conv1_maps=" << spec.conv1_maps << "\n";
  os << "conv1_stride_freq=" << spec.conv1_stride_freq << "\n";
  os << "conv1_stride_time=" << spec.conv1_stride_time << "\n";
  os << "n_labels=" << spec.n_labels << "\n";
  os << "head=" << HeadName(spec.head) << "\n";
  os << "init=" << spec.init << "\n";
  if (!spec.alphabet.empty()) os << "alphabet=" << spec.alphabet << "\n";
  return os.str();
}

ModelSpec ModelSpecFromConfig(const std::string &text) {
  ModelSpec spec;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = Trim(line);
    if (line.empty() || line[0] == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      RC_ERR << "model config line " << lineno << " has no '=': '" << line
             << "'";
    std::string key = Trim(line.substr(0, eq));
    std::string value = Trim(line.substr(eq + 1));
    if (key == "n_blocks") {
      spec.n_blocks_per_group = ParseInt(key, value);
    } else if (key == "width") {
      spec.width = ParseInt(key, value);
    } else if (key == "input_channels") {
      spec.input_channels = ParseInt(key, value);
    } else if (key == "freq_bins") {
      spec.freq_bins = ParseInt(key, value);
    } else if (key == "group_maps") {
      auto parts = SplitCsv(value);
      if (parts.size() != 4)
        RC_ERR << "group_maps needs 4 entries, got " << parts.size();
      for (int g = 0; g < 4; ++g) spec.group_maps[g] = ParseInt(key, parts[g]);
    } else if (key == "group_strides") {
      auto parts = SplitCsv(value);
      if (parts.size() != 4)
        RC_ERR << "group_strides needs 4 entries, got " << parts.size();
      for (int g = 0; g < 4; ++g) {
        size_t x = parts[g].find('x');
        if (x == std::string::npos)
          RC_ERR << "bad stride pair '" << parts[g] << "'";
        spec.group_strides[g].first = ParseInt(key, parts[g].substr(0, x));
        spec.group_strides[g].second = ParseInt(key, parts[g].substr(x + 1));
      }
    } else if (key == "stride_order") {
      if (value == "freq_time") {
        spec.stride_order = StrideOrder::kFreqTime;
      } else if (value == "time_freq") {
        spec.stride_order = StrideOrder::kTimeFreq;
      } else {
        RC_ERR << "unknown stride_order '" << value << "'";
      }
    } else if (key == "conv1_filter_time") {
      spec.conv1_filter_time = ParseInt(key, value);
    } else if (key == "conv1_filter_freq") {
      spec.conv1_filter_freq = ParseInt(key, value);
    } else if (key == "conv1_maps") {
      spec.conv1_maps = ParseInt(key, value);
    } else if (key == "conv1_stride_freq") {
      spec.conv1_stride_freq = ParseInt(key, value);
    } else if (key == "conv1_stride_time") {
      spec.conv1_stride_time = ParseInt(key, value);
    } else if (key == "n_labels") {
      spec.n_labels = ParseInt(key, value);
    } else if (key == "head") {
      if (value == "flatten") {
        spec.head = HeadKind::kFlatten;
      } else if (value == "mean_pool_freq") {
        spec.head = HeadKind::kMeanPoolFreq;
      } else {
        RC_ERR << "unknown head '" << value << "'";
      }
    } else if (key == "init") {
      spec.init = value;
    } else if (key == "alphabet") {
      spec.alphabet = value;
    } else {
      RC_ERR << "unknown model config key '" << key << "'";
    }
  }
  spec.Validate();
  return spec;
}

void WriteModelConfig(const std::string &path, const ModelSpec &spec) {
  std::ofstream os(path, std::ios::binary);
  if (!os) RC_ERR << "cannot open '" << path << "' for writing";
  os << ModelSpecToConfig(spec);
  os.flush();
  if (!os) RC_ERR << "failed writing '" << path << "'";
}

ModelSpec ReadModelConfig(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) RC_ERR << "cannot open model config '" << path << "'";
  std::ostringstream buf;
  buf << is.rdbuf();
  return ModelSpecFromConfig(buf.str());
}

Var ApplyResidualBlock(const Var &x, const ResidualBlock &block,
                       std::map<std::string, BNState> *bn_states) {
  Var h = BatchNorm(x, &bn_states->at(block.bn_a_key), block.bn_a_gamma,
                    block.bn_a_beta);
  h = Relu(h);
  h = Conv2d(h, block.conv_a_spec, block.conv_a_w);
  h = BatchNorm(h, &bn_states->at(block.bn_b_key), block.bn_b_gamma,
                block.bn_b_beta);
  h = Relu(h);
  h = Conv2d(h, block.conv_b_spec, block.conv_b_w);
  Var skip =
      block.has_projection ? Conv2d(x, block.proj_spec, block.proj_w) : x;
  return Add(h, skip);
}

namespace {

Tensor InitConvWeight(const ConvSpec &spec, Rng *rng) {
  Tensor w = Tensor::Zeros(ConvWeightShape(spec));
  double fan_in =
      static_cast<double>(spec.in_maps) * spec.filter_freq * spec.filter_time;
  double limit = std::sqrt(6.0 / fan_in);
  for (int64_t i = 0; i < w.NumElements(); ++i)
    w[i] = rng->UniformIn(-limit, limit);
  return w;
}

Var AddParam(ParamMap *params, const std::string &name, Tensor value) {
  Var v = Parameter(name, std::move(value));
  (*params)[name] = v;
  return v;
}

}  // namespace

Model Model::Build(const ModelSpec &spec, uint64_t seed) {
  spec.Validate();
  Model m;
  m.spec_ = spec;
  Rng rng(seed);

  m.conv1_spec_ = ConvSpec{spec.conv1_filter_time, spec.conv1_filter_freq,
                           spec.input_channels,    spec.conv1_maps,
                           spec.conv1_stride_time, spec.conv1_stride_freq};
  m.conv1_spec_.Validate();
  m.conv1_w_ =
      AddParam(&m.params_, "conv1/w", InitConvWeight(m.conv1_spec_, &rng));

  int64_t freq = SamePadOutputExtent(spec.freq_bins, spec.conv1_stride_freq);
  int in_maps = spec.conv1_maps;
  int weighted = 1;

  for (int g = 0; g < 4; ++g) {
    int out_maps = spec.EffectiveMaps(g);
    std::vector<ResidualBlock> blocks;
    for (int b = 0; b < spec.n_blocks_per_group; ++b) {
      bool first = (b == 0);
      int s_freq = first ? spec.GroupStrideFreq(g) : 1;
      int s_time = first ? spec.GroupStrideTime(g) : 1;
      int block_in = first ? in_maps : out_maps;

      ResidualBlock blk;
      std::ostringstream prefix;
      prefix << "g" << g + 1 << "/b" << b + 1;
      std::string p = prefix.str();

      blk.conv_a_spec = ConvSpec{3, 3, block_in, out_maps, s_time, s_freq};
      blk.conv_b_spec = ConvSpec{3, 3, out_maps, out_maps, 1, 1};
      blk.has_projection = (block_in != out_maps || s_freq != 1 || s_time != 1);
      if (blk.has_projection)
        blk.proj_spec = ConvSpec{1, 1, block_in, out_maps, s_time, s_freq};

      blk.bn_a_key = p + "/bn_a";
      blk.bn_b_key = p + "/bn_b";
      m.bn_states_.emplace(blk.bn_a_key, BNState(block_in));
      m.bn_states_.emplace(blk.bn_b_key, BNState(out_maps));

      blk.bn_a_gamma = AddParam(&m.params_, p + "/bn_a/gamma",
                                Tensor::Full({block_in}, 1.0));
      blk.bn_a_beta =
          AddParam(&m.params_, p + "/bn_a/beta", Tensor::Zeros({block_in}));
      blk.conv_a_w = AddParam(&m.params_, p + "/conv_a/w",
                              InitConvWeight(blk.conv_a_spec, &rng));
      blk.bn_b_gamma = AddParam(&m.params_, p + "/bn_b/gamma",
                                Tensor::Full({out_maps}, 1.0));
      blk.bn_b_beta =
          AddParam(&m.params_, p + "/bn_b/beta", Tensor::Zeros({out_maps}));
      blk.conv_b_w = AddParam(&m.params_, p + "/conv_b/w",
                              InitConvWeight(blk.conv_b_spec, &rng));
      if (blk.has_projection)
        blk.proj_w = AddParam(&m.params_, p + "/proj/w",
                              InitConvWeight(blk.proj_spec, &rng));
      weighted += 2;

      if (first) {
        freq = SamePadOutputExtent(freq, s_freq);
        if (freq < 1)
          RC_ERR << "group " << g + 1 << " collapses the frequency axis";
      }
      blocks.push_back(std::move(blk));
    }
    m.groups_.push_back(std::move(blocks));
    in_maps = out_maps;
  }

  m.bn_states_.emplace("head_bn", BNState(in_maps));
  m.head_bn_gamma_ =
      AddParam(&m.params_, "head_bn/gamma", Tensor::Full({in_maps}, 1.0));
  m.head_bn_beta_ =
      AddParam(&m.params_, "head_bn/beta", Tensor::Zeros({in_maps}));

  m.fc_in_dim_ = spec.head == HeadKind::kFlatten
                     ? static_cast<int64_t>(in_maps) * freq
                     : static_cast<int64_t>(in_maps);
  Tensor fc_w = Tensor::Zeros({spec.n_labels, m.fc_in_dim_});
  double limit = std::sqrt(6.0 / static_cast<double>(m.fc_in_dim_));
  for (int64_t i = 0; i < fc_w.NumElements(); ++i)
    fc_w[i] = rng.UniformIn(-limit, limit);
  m.fc_w_ = AddParam(&m.params_, "fc/w", std::move(fc_w));
  m.fc_b_ = AddParam(&m.params_, "fc/b", Tensor::Zeros({spec.n_labels}));
  weighted += 1;

  RC_CHECK(weighted == CountWeightedLayers(spec));
  return m;
}

void Model::SetTrainMode(bool train) {
  for (auto &kv : bn_states_)
    kv.second.mode = train ? BNMode::kTrain : BNMode::kEval;
}

int Model::TimeDownsampleFactor() const {
  int f = spec_.conv1_stride_time;
  for (int g = 0; g < 4; ++g) f *= spec_.GroupStrideTime(g);
  return f;
}

int Model::FreqDownsampleFactor() const {
  int f = spec_.conv1_stride_freq;
  for (int g = 0; g < 4; ++g) f *= spec_.GroupStrideFreq(g);
  return f;
}

Var Model::ApplyConv1(const Var &features) {
  return Conv2d(features, conv1_spec_, conv1_w_);
}

Var Model::ApplyGroups(const Var &x) {
  Var h = x;
  for (auto &group : groups_)
    for (auto &blk : group) h = ApplyResidualBlock(h, blk, &bn_states_);
  return h;
}

Var Model::ApplyHead(const Var &x) {
  Var h =
      BatchNorm(x, &bn_states_.at("head_bn"), head_bn_gamma_, head_bn_beta_);
  h = Relu(h);
  if (spec_.head == HeadKind::kMeanPoolFreq) h = MeanPoolFreq(h);
  h = TimeMajorFeatures(h);  // [batch, time, feat]
  int64_t batch = h->value.Dim(0);
  int64_t time = h->value.Dim(1);
  int64_t feat = h->value.Dim(2);
  if (feat != fc_in_dim_)
    RC_SHAPE_ERR << "head produced feature dim " << feat
                 << ", fully-connected layer expects " << fc_in_dim_;
  h = Reshape(h, {batch * time, feat});
  h = Linear(h, fc_w_, fc_b_);
  h = Reshape(h, {batch, time, spec_.n_labels});
  return LogSoftmax(h);
}

Var Model::ForwardVar(const Var &features) {
  if (features->value.Rank() != 4)
    RC_SHAPE_ERR << "model input must be [batch, channels, freq, time], got "
                 << ShapeToString(features->value.shape());
  if (features->value.Dim(1) != spec_.input_channels)
    RC_SHAPE_ERR << "model expects " << spec_.input_channels
                 << " input channels, got " << features->value.Dim(1);
  if (features->value.Dim(2) != spec_.freq_bins)
    RC_SHAPE_ERR << "model expects " << spec_.freq_bins
                 << " frequency bins, got " << features->value.Dim(2);
  return ApplyHead(ApplyGroups(ApplyConv1(features)));
}

Tensor Model::Forward(const Tensor &features) {
  return ForwardVar(Constant(features))->value;
}

std::map<std::string, Tensor> Model::StateDict() const {
  std::map<std::string, Tensor> state;
  for (const auto &kv : params_) state.emplace(kv.first, kv.second->value);
  for (const auto &kv : bn_states_) {
    state.emplace(kv.first + "/running_mean", kv.second.running_mean);
    state.emplace(kv.first + "/running_var", kv.second.running_var);
  }
  return state;
}

void Model::LoadStateDict(const std::map<std::string, Tensor> &state) {
  std::map<std::string, Tensor> expected = StateDict();
  std::ostringstream missing, extra;
  for (const auto &kv : expected)
    if (!state.count(kv.first)) missing << " " << kv.first;
  for (const auto &kv : state)
    if (!expected.count(kv.first)) extra << " " << kv.first;
  if (!missing.str().empty() || !extra.str().empty())
    RC_ERR << "checkpoint does not match model; missing:[" << missing.str()
           << " ] unexpected:[" << extra.str() << " ]";
  for (auto &kv : params_) {
    const Tensor &t = state.at(kv.first);
    RequireSameShape(kv.second->value, t, ("parameter " + kv.first).c_str());
    kv.second->value = t;
  }
  for (auto &kv : bn_states_) {
    const Tensor &mean = state.at(kv.first + "/running_mean");
    const Tensor &var = state.at(kv.first + "/running_var");
    RequireSameShape(kv.second.running_mean, mean,
                     (kv.first + "/running_mean").c_str());
    RequireSameShape(kv.second.running_var, var,
                     (kv.first + "/running_var").c_str());
    kv.second.running_mean = mean;
    kv.second.running_var = var;
    kv.second.Validate();
  }
}

}  // namespace rcnnctc
