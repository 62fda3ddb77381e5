// src/batchnorm.cc

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

#include "rcnnctc/batchnorm.h"

#include <cmath>

#include "rcnnctc/error.h"

namespace rcnnctc {
namespace {

struct BNLayout {
  int64_t batch;     // extent of axis 0
  int64_t channels;  // extent of axis 1
  int64_t inner;     // product of axes 2..rank-1
};

BNLayout LayoutOf(const Tensor &input, int64_t channels) {
  if (input.Rank() < 2) {
    RC_SHAPE_ERR << "batch_norm input must have rank >= 2, got "
                 << ShapeToString(input.shape());
  }
  if (input.Dim(1) != channels) {
    RC_SHAPE_ERR << "batch_norm channel axis extent " << input.Dim(1)
                 << " does not match state with " << channels << " channels"
                 << " (input " << ShapeToString(input.shape()) << ")";
  }
  int64_t inner = 1;
  for (int a = 2; a < input.Rank(); ++a) inner *= input.Dim(a);
  return {input.Dim(0), channels, inner};
}

}  // namespace

void BNState::Validate() const {
  if (epsilon <= 0.0) RC_ERR << "batch_norm epsilon must be > 0";
  if (momentum <= 0.0 || momentum >= 1.0) {
    RC_ERR << "batch_norm momentum must be in (0,1), got " << momentum;
  }
  for (int64_t c = 0; c < Channels(); ++c) {
    if (running_var[c] < 0.0) {
      RC_ERR << "batch_norm running_var must be >= 0, channel " << c;
    }
  }
}

Tensor BatchNormForward(const Tensor &input, BNState *state,
                        const Tensor &gamma, const Tensor &beta,
                        Tensor *batch_mean, Tensor *batch_var) {
  state->Validate();
  const BNLayout lay = LayoutOf(input, state->Channels());
  if (gamma.NumElements() != lay.channels || beta.NumElements() != lay.channels) {
    RC_SHAPE_ERR << "batch_norm gamma/beta must have " << lay.channels
                 << " elements, got " << gamma.NumElements() << "/"
                 << beta.NumElements();
  }
  const int64_t m = lay.batch * lay.inner;
  Tensor mean({lay.channels});
  Tensor var({lay.channels});

  if (state->mode == BNMode::kTrain) {
    if (m == 0 || input.NumElements() == 0) {
      RC_ERR << "batch_norm train mode on zero-element batch";
    }
    for (int64_t c = 0; c < lay.channels; ++c) {
      double sum = 0.0;
      for (int64_t b = 0; b < lay.batch; ++b) {
        const double *p = input.data() + (b * lay.channels + c) * lay.inner;
        for (int64_t i = 0; i < lay.inner; ++i) sum += p[i];
      }
      const double mu = sum / static_cast<double>(m);
      double sq = 0.0;
      for (int64_t b = 0; b < lay.batch; ++b) {
        const double *p = input.data() + (b * lay.channels + c) * lay.inner;
        for (int64_t i = 0; i < lay.inner; ++i) {
          const double d = p[i] - mu;
          sq += d * d;
        }
      }
      mean[c] = mu;
      var[c] = sq / static_cast<double>(m);  // biased
      state->running_mean[c] =
          state->momentum * state->running_mean[c] + (1.0 - state->momentum) * mu;
      state->running_var[c] =
          state->momentum * state->running_var[c] + (1.0 - state->momentum) * var[c];
    }
  } else {
    mean = state->running_mean;
    var = state->running_var;
  }

  Tensor out(input.shape());
  for (int64_t c = 0; c < lay.channels; ++c) {
    const double inv = 1.0 / std::sqrt(var[c] + state->epsilon);
    const double g = gamma[c], bta = beta[c], mu = mean[c];
    for (int64_t b = 0; b < lay.batch; ++b) {
      const double *p = input.data() + (b * lay.channels + c) * lay.inner;
      double *q = out.data() + (b * lay.channels + c) * lay.inner;
      for (int64_t i = 0; i < lay.inner; ++i) {
        q[i] = g * (p[i] - mu) * inv + bta;
      }
    }
  }
  if (batch_mean) *batch_mean = mean;
  if (batch_var) *batch_var = var;
  return out;
}

void BatchNormBackward(const Tensor &input, const BNState &state,
                       const Tensor &gamma, const Tensor &batch_mean,
                       const Tensor &batch_var, const Tensor &grad_output,
                       Tensor *grad_input, Tensor *grad_gamma,
                       Tensor *grad_beta) {
  const BNLayout lay = LayoutOf(input, state.Channels());
  RequireSameShape(input, grad_output, "batch_norm backward");
  const int64_t m = lay.batch * lay.inner;

  for (int64_t c = 0; c < lay.channels; ++c) {
    const double mu = batch_mean[c];
    const double inv = 1.0 / std::sqrt(batch_var[c] + state.epsilon);
    const double g = gamma[c];

    double sum_g = 0.0, sum_gx = 0.0;
    for (int64_t b = 0; b < lay.batch; ++b) {
      const double *x = input.data() + (b * lay.channels + c) * lay.inner;
      const double *go = grad_output.data() + (b * lay.channels + c) * lay.inner;
      for (int64_t i = 0; i < lay.inner; ++i) {
        const double xhat = (x[i] - mu) * inv;
        sum_g += go[i];
        sum_gx += go[i] * xhat;
      }
    }
    if (grad_gamma) (*grad_gamma)[c] += sum_gx;
    if (grad_beta) (*grad_beta)[c] += sum_g;

    if (!grad_input) continue;
    if (state.mode == BNMode::kTrain) {
      const double mean_g = sum_g / static_cast<double>(m);
      const double mean_gx = sum_gx / static_cast<double>(m);
      for (int64_t b = 0; b < lay.batch; ++b) {
        const double *x = input.data() + (b * lay.channels + c) * lay.inner;
        const double *go = grad_output.data() + (b * lay.channels + c) * lay.inner;
        double *gi = grad_input->data() + (b * lay.channels + c) * lay.inner;
        for (int64_t i = 0; i < lay.inner; ++i) {
          const double xhat = (x[i] - mu) * inv;
          gi[i] += g * inv * (go[i] - mean_g - xhat * mean_gx);
        }
      }
    } else {
      // Running stats are constants in eval mode.
      for (int64_t b = 0; b < lay.batch; ++b) {
        const double *go = grad_output.data() + (b * lay.channels + c) * lay.inner;
        double *gi = grad_input->data() + (b * lay.channels + c) * lay.inner;
        for (int64_t i = 0; i < lay.inner; ++i) gi[i] += g * inv * go[i];
      }
    }
  }
}

}  // namespace rcnnctc
