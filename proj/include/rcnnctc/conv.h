// include/rcnnctc/conv.h

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

#ifndef RCNNCTC_CONV_H_
#define RCNNCTC_CONV_H_

#include <cstdint>

#include "rcnnctc/tensor.h"

namespace rcnnctc {

// 2-D convolution over [batch, maps, freq, time] inputs. Padding is always
// "same": output extent = ceil(input extent / stride) on each spatial axis.
struct ConvSpec {
  int filter_time = 1;
  int filter_freq = 1;
  int in_maps = 1;
  int out_maps = 1;
  int stride_time = 1;
  int stride_freq = 1;

  void Validate() const;
};

// Expected weight shape for a spec: [out_maps, in_maps, filter_freq,
// filter_time].
std::vector<int64_t> ConvWeightShape(const ConvSpec &spec);

// ceil(extent / stride)
int64_t SamePadOutputExtent(int64_t extent, int stride);

Tensor Conv2dForward(const Tensor &input, const ConvSpec &spec,
                     const Tensor &weights);

// Accumulates into grad_input / grad_weights (both pre-sized, zero or
// partially accumulated).
void Conv2dBackward(const Tensor &input, const ConvSpec &spec,
                    const Tensor &weights, const Tensor &grad_output,
                    Tensor *grad_input, Tensor *grad_weights);

}  // namespace rcnnctc

#endif  // RCNNCTC_CONV_H_
