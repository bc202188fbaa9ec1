/* Copyright 2026 The axemu Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef AXEMU_ERROR_HPP_
#define AXEMU_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace axemu {

/// Machine-readable category carried by every library exception. The CLI
/// prints it as the first token of its one-line error message.
enum class ErrorCode {
  kInvalidArgument,
  kShapeMismatch,
  kNonFinite,
  kModeMismatch,
  kFormat,
  kIo,
  kGraph,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace axemu

#endif  // AXEMU_ERROR_HPP_
