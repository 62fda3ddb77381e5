// include/rcnnctc/rng.h

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

#ifndef RCNNCTC_RNG_H_
#define RCNNCTC_RNG_H_

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace rcnnctc {

// mt19937_64 with hand-rolled distributions. The standard distribution
// objects are implementation defined, so identical seeds would not give
// identical streams across toolchains; these mappings are pinned.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t Bits() { return engine_(); }

  // Uniform in [0, 1) with 53 significant bits.
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double UniformIn(double lo, double hi) {
    return lo + (hi - lo) * Uniform();
  }

  // Uniform integer in [0, n). Modulo bias is negligible for n << 2^64 and
  // keeps the mapping simple and portable.
  uint64_t Below(uint64_t n) { return engine_() % n; }

  int IntIn(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(Below(static_cast<uint64_t>(hi - lo + 1)));
  }

  // Box-Muller; draws two uniforms per pair of normals.
  double Gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = Uniform();
    double u2 = Uniform();
    while (u1 <= 0.0) u1 = Uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // Fisher-Yates.
  template <typename T>
  void Shuffle(std::vector<T> *v) {
    for (size_t i = v->size(); i > 1; --i) {
      size_t j = static_cast<size_t>(Below(i));
      std::swap((*v)[i - 1], (*v)[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rcnnctc

#endif  // RCNNCTC_RNG_H_
