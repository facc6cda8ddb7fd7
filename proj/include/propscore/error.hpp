#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace propscore {

enum class ErrorKind {
  InvalidForecast,
  InvalidLevel,
  InvalidBeta,
  InvalidScale,
  NotConvertible,
  OutsideSupport,
  EmptyBatch,
  NotComparable,
  NoInformativeDatasets,
  ParseError,
  UnknownForm,
  AmbiguousForm,
  DuplicateKey,
  InvalidValue,
  UnknownMetric,
  InvalidSpec,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// True for errors caused by malformed input files or arguments, as opposed
/// to inputs that parse but cannot be scored or ranked.
bool is_input_error(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace propscore
