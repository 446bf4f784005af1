#pragma once

#include <stdexcept>
#include <string>

namespace closedqa {

// Every failure raised by the library derives from Error and carries a kind
// so the CLI and the HTTP layer can map it to an exit code or a status.
enum class ErrorKind {
  io,
  schema,
  validation,
  config,
  degenerate_input,
  dimension_mismatch,
  provider,
  numeric,
  state,
  missing_file,
  version,
  checksum,
  consistency,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define CLOSEDQA_DEFINE_ERROR(Name, Kind)                                \
  class Name : public Error {                                            \
   public:                                                               \
    explicit Name(const std::string& message) : Error(Kind, message) {} \
  }

CLOSEDQA_DEFINE_ERROR(IoError, ErrorKind::io);
CLOSEDQA_DEFINE_ERROR(SchemaError, ErrorKind::schema);
CLOSEDQA_DEFINE_ERROR(ValidationError, ErrorKind::validation);
CLOSEDQA_DEFINE_ERROR(ConfigError, ErrorKind::config);
CLOSEDQA_DEFINE_ERROR(DegenerateInputError, ErrorKind::degenerate_input);
CLOSEDQA_DEFINE_ERROR(DimensionError, ErrorKind::dimension_mismatch);
CLOSEDQA_DEFINE_ERROR(ProviderError, ErrorKind::provider);
CLOSEDQA_DEFINE_ERROR(NumericError, ErrorKind::numeric);
CLOSEDQA_DEFINE_ERROR(StateError, ErrorKind::state);
CLOSEDQA_DEFINE_ERROR(MissingFileError, ErrorKind::missing_file);
CLOSEDQA_DEFINE_ERROR(VersionError, ErrorKind::version);
CLOSEDQA_DEFINE_ERROR(ChecksumError, ErrorKind::checksum);
CLOSEDQA_DEFINE_ERROR(ConsistencyError, ErrorKind::consistency);

#undef CLOSEDQA_DEFINE_ERROR

// Throws the Error subclass matching `kind`.
[[noreturn]] void throw_error(ErrorKind kind, const std::string& message);

// Rethrows `e` as the same kind with `context` prepended to its message.
[[noreturn]] void rethrow_with_context(const Error& e, const std::string& context);

}  // namespace closedqa
