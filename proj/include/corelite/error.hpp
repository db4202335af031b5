// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace corelite {

enum class ErrorKind {
  InvalidArgument,  // caller passed a value outside the operation's domain
  Io,               // file could not be opened, read, or written
  Format,           // input bytes do not follow the declared file format
  Data,             // well-formed input whose content violates an invariant
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace corelite
