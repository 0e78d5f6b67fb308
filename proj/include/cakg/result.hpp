#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <variant>

namespace cakg {

// Error codes used across the library. Codes are stable identifiers for
// tests and CLI diagnostics; the message carries the human-readable detail.
enum class Errc {
  // rdf
  empty_iri,
  illegal_character,
  missing_scheme,
  lexical_form_invalid,
  unknown_prefix,
  invalid_station_id,
  invalid_value,
  // parsing (turtle, sparql, csv)
  syntax_error,
  unsupported_feature,
  unbound_projection,
  missing_required_column,
  malformed_row,
  malformed_cell,
  unknown_feature,
  // store / io
  io_error,
  version_mismatch,
  corrupt_snapshot,
  // query execution
  timeout,
  station_not_found,
  http_error,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::empty_iri: return "EmptyIri";
    case Errc::illegal_character: return "IllegalCharacter";
    case Errc::missing_scheme: return "MissingScheme";
    case Errc::lexical_form_invalid: return "LexicalFormInvalid";
    case Errc::unknown_prefix: return "UnknownPrefix";
    case Errc::invalid_station_id: return "InvalidStationId";
    case Errc::invalid_value: return "InvalidValue";
    case Errc::syntax_error: return "SyntaxError";
    case Errc::unsupported_feature: return "UnsupportedFeature";
    case Errc::unbound_projection: return "UnboundProjection";
    case Errc::missing_required_column: return "MissingRequiredColumn";
    case Errc::malformed_row: return "MalformedRow";
    case Errc::malformed_cell: return "MalformedCell";
    case Errc::unknown_feature: return "UnknownFeature";
    case Errc::io_error: return "IoError";
    case Errc::version_mismatch: return "VersionMismatch";
    case Errc::corrupt_snapshot: return "CorruptSnapshot";
    case Errc::timeout: return "Timeout";
    case Errc::station_not_found: return "StationNotFound";
    case Errc::http_error: return "HttpError";
  }
  return "Unknown";
}

struct Error {
  Errc code;
  std::string message;
  // 1-based where set; 0 means "not applicable".
  int line = 0;
  int column = 0;
  std::size_t position = 0;

  std::string to_string() const {
    std::string s = errc_name(code);
    s += ": ";
    s += message;
    if (line > 0) {
      s += " (line " + std::to_string(line) + ", column " +
           std::to_string(column) + ")";
    }
    return s;
  }
};

// Minimal expected-style carrier. T must not be Error.
template <typename T>
class [[nodiscard]] Result {
 public:
  Result(T value) : v_(std::move(value)) {}
  Result(Error error) : v_(std::move(error)) {}

  bool ok() const { return v_.index() == 0; }
  explicit operator bool() const { return ok(); }

  T& value() & { return std::get<0>(v_); }
  const T& value() const& { return std::get<0>(v_); }
  T&& value() && { return std::get<0>(std::move(v_)); }

  const Error& error() const { return std::get<1>(v_); }

 private:
  std::variant<T, Error> v_;
};

using Status = Result<std::monostate>;

inline Status ok_status() { return Status(std::monostate{}); }

}  // namespace cakg
