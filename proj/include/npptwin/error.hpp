#pragma once

#include <stdexcept>
#include <string>

namespace npptwin {

// Status codes shared by both wire protocols. The numeric values are what
// goes on the wire (`ERR 404 ...`, `error 404 ...`).
enum class ErrorCode : int {
  bad_request = 400,
  forbidden = 403,
  not_found = 404,
  conflict = 409,
  unavailable = 503,
  domain = 1001,   // mathematical precondition violated
  config = 1002,   // invalid configuration or argument range
  io = 1003,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  int wire_code() const noexcept { return static_cast<int>(code_); }

private:
  ErrorCode code_;
};

}  // namespace npptwin
