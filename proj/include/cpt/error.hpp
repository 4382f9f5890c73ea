#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cpt {

/// Failure categories. The CLI prints `code()` on stderr so scripts can match on it.
enum class ErrorCode {
  InvalidArgument,
  FieldOutOfRange,
  InvalidSublevel,
  InvalidQuantumNumbers,
  SingularSystem,
  DegenerateInput,
  RankDeficient,
  MalformedInput,
  UnknownSpecies,
  Io,
};

std::string_view errorCodeName(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cpt
