// include/rcnnctc/autodiff.h

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

#ifndef RCNNCTC_AUTODIFF_H_
#define RCNNCTC_AUTODIFF_H_

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rcnnctc/batchnorm.h"
#include "rcnnctc/conv.h"
#include "rcnnctc/tensor.h"

namespace rcnnctc {

// Reverse-mode autodiff over a define-by-run graph. Each op returns a new
// node; leaves are inputs or named parameters. Tensors are immutable once an
// op has produced them (training mutates leaf values only between steps).
class Node;
using Var = std::shared_ptr<Node>;

class Node {
 public:
  Tensor value;
  Tensor grad;  // allocated by Backward, same shape as value
  bool requires_grad = false;
  std::string name;  // non-empty for named parameters
  std::vector<Var> parents;
  // Reads this->grad and accumulates into parents' grads.
  std::function<void(Node &)> backprop;

  bool IsLeaf() const { return parents.empty(); }
};

using ParamMap = std::map<std::string, Var>;
using GradientMap = std::map<std::string, Tensor>;

Var Leaf(Tensor value, bool requires_grad = false, std::string name = "");
Var Parameter(std::string name, Tensor value);
Var Constant(Tensor value);

// Ops. All are pure in their tensor inputs; BatchNorm additionally updates
// the running statistics inside *state when state->mode == kTrain.
Var Add(const Var &a, const Var &b);
Var Sub(const Var &a, const Var &b);
Var Mul(const Var &a, const Var &b);  // elementwise
Var Scale(const Var &a, double s);
Var Relu(const Var &a);
Var Sum(const Var &a);                       // -> scalar [1]
Var MeanOf(const std::vector<Var> &terms);   // mean of scalars -> scalar [1]
Var Reshape(const Var &a, std::vector<int64_t> shape);
// [batch, in_dim] x [out_dim, in_dim]^T + [out_dim] -> [batch, out_dim]
Var Linear(const Var &input, const Var &weights, const Var &bias);
// Log-softmax over the last axis, stable via max subtraction.
Var LogSoftmax(const Var &input);
Var Conv2d(const Var &input, const ConvSpec &spec, const Var &weights);
Var BatchNorm(const Var &input, BNState *state, const Var &gamma,
              const Var &beta);
// [batch, maps, freq, time] -> [batch, time, maps*freq]
Var TimeMajorFeatures(const Var &input);
// [batch, maps, freq, time] -> [batch, maps, 1, time]
Var MeanPoolFreq(const Var &input);

// Runs reverse-mode accumulation from a scalar loss. Throws if loss is not
// scalar or if no computation was recorded (a bare leaf). Returns gradients
// for every entry of params; parameters the graph never touched get zeros.
GradientMap Backward(const Var &loss, const ParamMap &params);

// In-place SGD update p <- p - lr * g. Throws, naming the parameter, on a
// non-finite gradient value.
void SgdStep(ParamMap *params, const GradientMap &grads, double lr);

}  // namespace rcnnctc

#endif  // RCNNCTC_AUTODIFF_H_
