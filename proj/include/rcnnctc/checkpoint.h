// include/rcnnctc/checkpoint.h

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

#ifndef RCNNCTC_CHECKPOINT_H_
#define RCNNCTC_CHECKPOINT_H_

#include <map>
#include <string>

#include "rcnnctc/tensor.h"

namespace rcnnctc {

// Binary tensor-map format, little-endian throughout:
//   magic "RCNNCK01" (8 bytes)
//   uint64 record count
//   per record: uint32 name length, name bytes, uint32 rank,
//               uint64 extents[rank], float32 data (row-major)
// Records are written in name order; values store as 32-bit floats.
void WriteCheckpoint(const std::string &path,
                     const std::map<std::string, Tensor> &state);

std::map<std::string, Tensor> ReadCheckpoint(const std::string &path);

}  // namespace rcnnctc

#endif  // RCNNCTC_CHECKPOINT_H_
