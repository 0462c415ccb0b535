#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace surfdyn {

enum class ErrorCode {
  InvalidArgument,
  ParallelDirections,
  ZeroVector,
  DegenerateImage,
  OrbitEscape,
  NoConvergence,
  SingularNewtonMatrix,
  InvalidThresholds,
  DegenerateSingularValues,
  NotASaddle,
  PointBudgetExceeded,
  ThresholdViolated,
  DissipationViolated,
  DomainOverlap,
  BudgetExceeded,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library. `index` carries the offending step,
// box or iterate when one exists.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<long> index = std::nullopt)
      : std::runtime_error(message), code_(code), index_(index) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<long> index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  std::optional<long> index_;
};

}  // namespace surfdyn
