// src/conv.cc

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

#include "rcnnctc/conv.h"

#include "rcnnctc/error.h"

namespace rcnnctc {
namespace {

// "same" padding: total pad chosen so output = ceil(in / stride), with the
// extra element (odd totals) at the trailing edge.
int64_t PadBefore(int64_t in, int64_t out, int stride, int filter) {
  int64_t total = (out - 1) * stride + filter - in;
  if (total < 0) total = 0;
  return total / 2;
}

}  // namespace

void ConvSpec::Validate() const {
  if (filter_time < 1 || filter_freq < 1 || in_maps < 1 || out_maps < 1) {
    RC_ERR << "conv spec extents must be >= 1 (filter " << filter_freq << "x"
           << filter_time << ", maps " << in_maps << "->" << out_maps << ")";
  }
  if (stride_time < 1 || stride_freq < 1) {
    RC_ERR << "conv strides must be >= 1, got (" << stride_freq << ","
           << stride_time << ")";
  }
}

std::vector<int64_t> ConvWeightShape(const ConvSpec &spec) {
  return {spec.out_maps, spec.in_maps, spec.filter_freq, spec.filter_time};
}

int64_t SamePadOutputExtent(int64_t extent, int stride) {
  return (extent + stride - 1) / stride;
}

static void CheckConvShapes(const Tensor &input, const ConvSpec &spec,
                            const Tensor &weights) {
  spec.Validate();
  if (input.Rank() != 4) {
    RC_SHAPE_ERR << "conv2d input must be [batch, maps, freq, time], got "
                 << ShapeToString(input.shape());
  }
  if (input.Dim(1) != spec.in_maps) {
    RC_SHAPE_ERR << "conv2d input maps mismatch: input "
                 << ShapeToString(input.shape()) << " vs spec in_maps "
                 << spec.in_maps;
  }
  const std::vector<int64_t> want = ConvWeightShape(spec);
  if (weights.shape() != want) {
    RC_SHAPE_ERR << "conv2d weight shape " << ShapeToString(weights.shape())
                 << " does not match expected " << ShapeToString(want);
  }
}

Tensor Conv2dForward(const Tensor &input, const ConvSpec &spec,
                     const Tensor &weights) {
  CheckConvShapes(input, spec, weights);
  const int64_t batch = input.Dim(0);
  const int64_t in_f = input.Dim(2), in_t = input.Dim(3);
  const int64_t out_f = SamePadOutputExtent(in_f, spec.stride_freq);
  const int64_t out_t = SamePadOutputExtent(in_t, spec.stride_time);
  const int64_t pad_f = PadBefore(in_f, out_f, spec.stride_freq, spec.filter_freq);
  const int64_t pad_t = PadBefore(in_t, out_t, spec.stride_time, spec.filter_time);

  Tensor out = Tensor::Zeros({batch, spec.out_maps, out_f, out_t});
  const double *in = input.data();
  const double *w = weights.data();
  double *o = out.data();
  const int64_t in_chan_stride = in_f * in_t;
  const int64_t out_chan_stride = out_f * out_t;

  for (int64_t b = 0; b < batch; ++b) {
    const double *in_b = in + b * spec.in_maps * in_chan_stride;
    double *o_b = o + b * spec.out_maps * out_chan_stride;
    for (int64_t om = 0; om < spec.out_maps; ++om) {
      double *o_m = o_b + om * out_chan_stride;
      for (int64_t im = 0; im < spec.in_maps; ++im) {
        const double *in_m = in_b + im * in_chan_stride;
        const double *w_m =
            w + (om * spec.in_maps + im) * spec.filter_freq * spec.filter_time;
        for (int kf = 0; kf < spec.filter_freq; ++kf) {
          for (int kt = 0; kt < spec.filter_time; ++kt) {
            const double wv = w_m[kf * spec.filter_time + kt];
            if (wv == 0.0) continue;
            for (int64_t of = 0; of < out_f; ++of) {
              const int64_t sf = of * spec.stride_freq - pad_f + kf;
              if (sf < 0 || sf >= in_f) continue;
              const double *in_row = in_m + sf * in_t;
              double *o_row = o_m + of * out_t;
              for (int64_t ot = 0; ot < out_t; ++ot) {
                const int64_t st = ot * spec.stride_time - pad_t + kt;
                if (st < 0 || st >= in_t) continue;
                o_row[ot] += wv * in_row[st];
              }
            }
          }
        }
      }
    }
  }
  return out;
}

void Conv2dBackward(const Tensor &input, const ConvSpec &spec,
                    const Tensor &weights, const Tensor &grad_output,
                    Tensor *grad_input, Tensor *grad_weights) {
  CheckConvShapes(input, spec, weights);
  const int64_t batch = input.Dim(0);
  const int64_t in_f = input.Dim(2), in_t = input.Dim(3);
  const int64_t out_f = SamePadOutputExtent(in_f, spec.stride_freq);
  const int64_t out_t = SamePadOutputExtent(in_t, spec.stride_time);
  if (grad_output.shape() !=
      std::vector<int64_t>{batch, spec.out_maps, out_f, out_t}) {
    RC_SHAPE_ERR << "conv2d grad_output shape "
                 << ShapeToString(grad_output.shape()) << " vs expected "
                 << ShapeToString({batch, spec.out_maps, out_f, out_t});
  }
  const int64_t pad_f = PadBefore(in_f, out_f, spec.stride_freq, spec.filter_freq);
  const int64_t pad_t = PadBefore(in_t, out_t, spec.stride_time, spec.filter_time);

  const double *in = input.data();
  const double *w = weights.data();
  const double *go = grad_output.data();
  double *gi = grad_input ? grad_input->data() : nullptr;
  double *gw = grad_weights ? grad_weights->data() : nullptr;
  const int64_t in_chan_stride = in_f * in_t;
  const int64_t out_chan_stride = out_f * out_t;

  for (int64_t b = 0; b < batch; ++b) {
    const double *in_b = in + b * spec.in_maps * in_chan_stride;
    const double *go_b = go + b * spec.out_maps * out_chan_stride;
    double *gi_b = gi ? gi + b * spec.in_maps * in_chan_stride : nullptr;
    for (int64_t om = 0; om < spec.out_maps; ++om) {
      const double *go_m = go_b + om * out_chan_stride;
      for (int64_t im = 0; im < spec.in_maps; ++im) {
        const double *in_m = in_b + im * in_chan_stride;
        double *gi_m = gi_b ? gi_b + im * in_chan_stride : nullptr;
        const int64_t w_base =
            (om * spec.in_maps + im) * spec.filter_freq * spec.filter_time;
        for (int kf = 0; kf < spec.filter_freq; ++kf) {
          for (int kt = 0; kt < spec.filter_time; ++kt) {
            const double wv = w[w_base + kf * spec.filter_time + kt];
            double wgrad = 0.0;
            for (int64_t of = 0; of < out_f; ++of) {
              const int64_t sf = of * spec.stride_freq - pad_f + kf;
              if (sf < 0 || sf >= in_f) continue;
              const double *in_row = in_m + sf * in_t;
              double *gi_row = gi_m ? gi_m + sf * in_t : nullptr;
              const double *go_row = go_m + of * out_t;
              for (int64_t ot = 0; ot < out_t; ++ot) {
                const int64_t st = ot * spec.stride_time - pad_t + kt;
                if (st < 0 || st >= in_t) continue;
                const double g = go_row[ot];
                wgrad += g * in_row[st];
                if (gi_row) gi_row[st] += g * wv;
              }
            }
            if (gw) gw[w_base + kf * spec.filter_time + kt] += wgrad;
          }
        }
      }
    }
  }
}

}  // namespace rcnnctc
