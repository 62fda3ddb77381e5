// include/rcnnctc/error.h

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

#ifndef RCNNCTC_ERROR_H_
#define RCNNCTC_ERROR_H_

#include <sstream>
#include <stdexcept>
#include <string>

namespace rcnnctc {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

// Shape mismatches carry both shapes in the message so callers can report
// exactly what disagreed.
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string &msg) : Error(msg) {}
};

namespace internal {

class ErrorStream {
 public:
  ErrorStream() = default;
  ErrorStream(const ErrorStream &) = delete;
  ErrorStream &operator=(const ErrorStream &) = delete;

  template <typename T>
  ErrorStream &operator<<(const T &v) {
    os_ << v;
    return *this;
  }

  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

struct ThrowError {
  [[noreturn]] void operator&(const ErrorStream &s) { throw Error(s.str()); }
};

struct ThrowShapeError {
  [[noreturn]] void operator&(const ErrorStream &s) {
    throw ShapeError(s.str());
  }
};

}  // namespace internal
}  // namespace rcnnctc

// Usage: RC_ERR << "bad thing: " << detail;
#define RC_ERR \
  ::rcnnctc::internal::ThrowError() & ::rcnnctc::internal::ErrorStream()
#define RC_SHAPE_ERR \
  ::rcnnctc::internal::ThrowShapeError() & ::rcnnctc::internal::ErrorStream()

#define RC_CHECK(cond)                                            \
  do {                                                            \
    if (!(cond)) RC_ERR << "check failed: " #cond << " at "       \
                        << __FILE__ << ":" << __LINE__;           \
  } while (0)

#endif  // RCNNCTC_ERROR_H_
