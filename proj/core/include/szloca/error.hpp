#pragma once

#include <stdexcept>
#include <string>

namespace szloca {

enum class ErrorCode {
  InvalidArgument,
  InvalidAngle,
  InvalidConfig,
  TiltCheck,
  DegenerateConfiguration,
  CalibrationFailed,
  FrameOrder,
  Parse,
  Serialization,
  Encode,
  Io,
};

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace szloca
