#include "propscore/error.hpp"

namespace propscore {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidForecast: return "InvalidForecast";
    case ErrorKind::InvalidLevel: return "InvalidLevel";
    case ErrorKind::InvalidBeta: return "InvalidBeta";
    case ErrorKind::InvalidScale: return "InvalidScale";
    case ErrorKind::NotConvertible: return "NotConvertible";
    case ErrorKind::OutsideSupport: return "OutsideSupport";
    case ErrorKind::EmptyBatch: return "EmptyBatch";
    case ErrorKind::NotComparable: return "NotComparable";
    case ErrorKind::NoInformativeDatasets: return "NoInformativeDatasets";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnknownForm: return "UnknownForm";
    case ErrorKind::AmbiguousForm: return "AmbiguousForm";
    case ErrorKind::DuplicateKey: return "DuplicateKey";
    case ErrorKind::InvalidValue: return "InvalidValue";
    case ErrorKind::UnknownMetric: return "UnknownMetric";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

bool is_input_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidForecast:
    case ErrorKind::ParseError:
    case ErrorKind::UnknownForm:
    case ErrorKind::AmbiguousForm:
    case ErrorKind::DuplicateKey:
    case ErrorKind::InvalidValue:
    case ErrorKind::UnknownMetric:
    case ErrorKind::InvalidSpec:
    case ErrorKind::Io:
      return true;
    default:
      return false;
  }
}

}  // namespace propscore
