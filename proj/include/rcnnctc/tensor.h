// include/rcnnctc/tensor.h

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

#ifndef RCNNCTC_TENSOR_H_
#define RCNNCTC_TENSOR_H_

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace rcnnctc {

// Dense row-major n-dimensional array of doubles. Training at desk scale
// stays in 64-bit; checkpoints store 32-bit (see checkpoint.h).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int64_t> shape);
  Tensor(std::vector<int64_t> shape, std::vector<double> data);
  Tensor(std::initializer_list<int64_t> shape, std::vector<double> data);

  static Tensor Zeros(std::vector<int64_t> shape);
  static Tensor Full(std::vector<int64_t> shape, double value);
  static Tensor Scalar(double value);

  const std::vector<int64_t> &shape() const { return shape_; }
  int Rank() const { return static_cast<int>(shape_.size()); }
  int64_t Dim(int axis) const;
  int64_t NumElements() const { return static_cast<int64_t>(data_.size()); }

  double *data() { return data_.data(); }
  const double *data() const { return data_.data(); }
  std::vector<double> &vec() { return data_; }
  const std::vector<double> &vec() const { return data_; }

  double &operator[](int64_t i) { return data_[i]; }
  double operator[](int64_t i) const { return data_[i]; }

  // Multi-index accessors for up to 4 axes; bounds are the caller's problem.
  double &At(int64_t i0) { return data_[i0]; }
  double &At(int64_t i0, int64_t i1) { return data_[i0 * shape_[1] + i1]; }
  double &At(int64_t i0, int64_t i1, int64_t i2) {
    return data_[(i0 * shape_[1] + i1) * shape_[2] + i2];
  }
  double &At(int64_t i0, int64_t i1, int64_t i2, int64_t i3) {
    return data_[((i0 * shape_[1] + i1) * shape_[2] + i2) * shape_[3] + i3];
  }
  double At(int64_t i0) const { return data_[i0]; }
  double At(int64_t i0, int64_t i1) const {
    return data_[i0 * shape_[1] + i1];
  }
  double At(int64_t i0, int64_t i1, int64_t i2) const {
    return data_[(i0 * shape_[1] + i1) * shape_[2] + i2];
  }
  double At(int64_t i0, int64_t i1, int64_t i2, int64_t i3) const {
    return data_[((i0 * shape_[1] + i1) * shape_[2] + i2) * shape_[3] + i3];
  }

  bool SameShape(const Tensor &other) const { return shape_ == other.shape_; }
  bool AllFinite() const;
  double MaxAbs() const;

  void Fill(double value);

 private:
  std::vector<int64_t> shape_;
  std::vector<double> data_;
};

// Renders a shape like [2, 3, 40, 100].
std::string ShapeToString(const std::vector<int64_t> &shape);

int64_t NumElementsOf(const std::vector<int64_t> &shape);

// Throws ShapeError naming both shapes if they differ.
void RequireSameShape(const Tensor &a, const Tensor &b, const char *context);

}  // namespace rcnnctc

#endif  // RCNNCTC_TENSOR_H_
