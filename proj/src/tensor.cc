// src/tensor.cc

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

#include "rcnnctc/tensor.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rcnnctc/error.h"

namespace rcnnctc {

int64_t NumElementsOf(const std::vector<int64_t> &shape) {
  int64_t n = 1;
  for (int64_t d : shape) {
    if (d <= 0) RC_ERR << "non-positive extent in shape " << ShapeToString(shape);
    n *= d;
  }
  return n;
}

Tensor::Tensor(std::vector<int64_t> shape)
    : shape_(std::move(shape)), data_(NumElementsOf(shape_), 0.0) {}

Tensor::Tensor(std::vector<int64_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (NumElementsOf(shape_) != static_cast<int64_t>(data_.size())) {
    RC_SHAPE_ERR << "tensor data size " << data_.size()
                 << " does not match shape " << ShapeToString(shape_);
  }
}

Tensor::Tensor(std::initializer_list<int64_t> shape, std::vector<double> data)
    : Tensor(std::vector<int64_t>(shape), std::move(data)) {}

Tensor Tensor::Zeros(std::vector<int64_t> shape) {
  return Tensor(std::move(shape));
}

Tensor Tensor::Full(std::vector<int64_t> shape, double value) {
  Tensor t(std::move(shape));
  t.Fill(value);
  return t;
}

Tensor Tensor::Scalar(double value) { return Tensor({1}, {value}); }

int64_t Tensor::Dim(int axis) const {
  if (axis < 0 || axis >= Rank()) {
    RC_ERR << "axis " << axis << " out of range for rank " << Rank();
  }
  return shape_[axis];
}

bool Tensor::AllFinite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double Tensor::MaxAbs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

void Tensor::Fill(double value) {
  std::fill(data_.begin(), data_.end(), value);
}

std::string ShapeToString(const std::vector<int64_t> &shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

void RequireSameShape(const Tensor &a, const Tensor &b, const char *context) {
  if (!a.SameShape(b)) {
    RC_SHAPE_ERR << context << ": shape " << ShapeToString(a.shape())
                 << " vs " << ShapeToString(b.shape());
  }
}

}  // namespace rcnnctc
