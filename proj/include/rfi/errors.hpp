#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rfi {

enum class ErrorCode {
  OutOfChart,
  NotSPD,
  UnknownManifold,
  OutsideInjectivity,
  LeftChart,
  ZeroInjectivityRadius,
  SingularTransport,
  ShapeMismatch,
  TypeMismatch,
  BaseMismatch,
  PlanMismatch,
  OrderTooHigh,
  ConfigError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so the
/// batch runners can record it per row instead of aborting.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Config errors additionally remember the dotted path of the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what)
      : Error(ErrorCode::ConfigError, path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace rfi
