// include/rcnnctc/batchnorm.h

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

#ifndef RCNNCTC_BATCHNORM_H_
#define RCNNCTC_BATCHNORM_H_

#include <vector>

#include "rcnnctc/tensor.h"

namespace rcnnctc {

enum class BNMode { kTrain, kEval };

// Per-channel batch-norm state. The channel axis is axis 1 of a
// [batch, maps, freq, time] tensor; statistics pool over all other axes.
// momentum is the retained fraction of the running value:
//   running = momentum * running + (1 - momentum) * batch_stat
struct BNState {
  Tensor running_mean;  // [channels]
  Tensor running_var;   // [channels]
  double epsilon = 1e-5;
  double momentum = 0.9;
  BNMode mode = BNMode::kTrain;

  explicit BNState(int64_t channels = 1)
      : running_mean(Tensor::Zeros({channels})),
        running_var(Tensor::Full({channels}, 1.0)) {}

  int64_t Channels() const { return running_mean.NumElements(); }
  void Validate() const;
};

// Forward; in train mode also fills batch_mean/batch_var (biased) and
// updates the running statistics in-place. gamma/beta are [channels].
Tensor BatchNormForward(const Tensor &input, BNState *state,
                        const Tensor &gamma, const Tensor &beta,
                        Tensor *batch_mean, Tensor *batch_var);

// Backward for the mode the forward ran in. batch_mean/batch_var must be the
// values the forward produced (train) or the running stats (eval).
void BatchNormBackward(const Tensor &input, const BNState &state,
                       const Tensor &gamma, const Tensor &batch_mean,
                       const Tensor &batch_var, const Tensor &grad_output,
                       Tensor *grad_input, Tensor *grad_gamma,
                       Tensor *grad_beta);

}  // namespace rcnnctc

#endif  // RCNNCTC_BATCHNORM_H_
