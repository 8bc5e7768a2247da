#pragma once

#include <stdexcept>
#include <string>

namespace q1d {

// Coarse categories that map 1:1 onto CLI exit codes.
enum class ErrorCode { validation = 1, runtime = 2, assertion = 3 };

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail_validation(const std::string& msg) {
  throw Error(ErrorCode::validation, msg);
}

[[noreturn]] inline void fail_runtime(const std::string& msg) {
  throw Error(ErrorCode::runtime, msg);
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) fail_validation(msg);
}

} // namespace q1d
