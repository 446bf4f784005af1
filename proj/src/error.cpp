#include "closedqa/error.hpp"

namespace closedqa {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io: return "io";
    case ErrorKind::schema: return "schema";
    case ErrorKind::validation: return "validation";
    case ErrorKind::config: return "config";
    case ErrorKind::degenerate_input: return "degenerate_input";
    case ErrorKind::dimension_mismatch: return "dimension_mismatch";
    case ErrorKind::provider: return "provider";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::state: return "state";
    case ErrorKind::missing_file: return "missing_file";
    case ErrorKind::version: return "version";
    case ErrorKind::checksum: return "checksum";
    case ErrorKind::consistency: return "consistency";
  }
  return "unknown";
}

void throw_error(ErrorKind kind, const std::string& message) {
  switch (kind) {
    case ErrorKind::io: throw IoError(message);
    case ErrorKind::schema: throw SchemaError(message);
    case ErrorKind::validation: throw ValidationError(message);
    case ErrorKind::config: throw ConfigError(message);
    case ErrorKind::degenerate_input: throw DegenerateInputError(message);
    case ErrorKind::dimension_mismatch: throw DimensionError(message);
    case ErrorKind::provider: throw ProviderError(message);
    case ErrorKind::numeric: throw NumericError(message);
    case ErrorKind::state: throw StateError(message);
    case ErrorKind::missing_file: throw MissingFileError(message);
    case ErrorKind::version: throw VersionError(message);
    case ErrorKind::checksum: throw ChecksumError(message);
    case ErrorKind::consistency: throw ConsistencyError(message);
  }
  throw Error(kind, message);
}

void rethrow_with_context(const Error& e, const std::string& context) {
  throw_error(e.kind(), context + ": " + e.what());
}

}  // namespace closedqa
