// src/binio.h

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

#ifndef RCNNCTC_SRC_BINIO_H_
#define RCNNCTC_SRC_BINIO_H_

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "rcnnctc/error.h"

// Little-endian primitives for the binary file formats, independent of host
// byte order.
namespace rcnnctc {
namespace binio {

inline void WriteU32(std::ostream &os, uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 4);
}

inline void WriteU64(std::ostream &os, uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 8);
}

inline void WriteF32(std::ostream &os, float v) {
  WriteU32(os, std::bit_cast<uint32_t>(v));
}

inline void WriteF64(std::ostream &os, double v) {
  WriteU64(os, std::bit_cast<uint64_t>(v));
}

inline void ReadBytes(std::istream &is, char *out, size_t n,
                      const char *what) {
  is.read(out, static_cast<std::streamsize>(n));
  if (static_cast<size_t>(is.gcount()) != n)
    RC_ERR << "truncated file while reading " << what;
}

inline uint32_t ReadU32(std::istream &is, const char *what) {
  char b[4];
  ReadBytes(is, b, 4, what);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
  return v;
}

inline uint64_t ReadU64(std::istream &is, const char *what) {
  char b[8];
  ReadBytes(is, b, 8, what);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
  return v;
}

inline float ReadF32(std::istream &is, const char *what) {
  return std::bit_cast<float>(ReadU32(is, what));
}

inline double ReadF64(std::istream &is, const char *what) {
  return std::bit_cast<double>(ReadU64(is, what));
}

inline std::string ReadString(std::istream &is, uint32_t len,
                              const char *what) {
  std::string s(len, '\0');
  if (len > 0) ReadBytes(is, s.data(), len, what);
  return s;
}

inline void RequireEof(std::istream &is, const char *what) {
  if (is.peek() != std::char_traits<char>::eof())
    RC_ERR << "trailing bytes after the last " << what;
}

}  // namespace binio
}  // namespace rcnnctc

#endif  // RCNNCTC_SRC_BINIO_H_
