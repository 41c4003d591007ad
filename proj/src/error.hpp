#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace didlpack {

enum class Errc {
  malformed_xml,
  not_didl,
  profile_shape,
  invariant_violation,
  not_xml,
  missing_identifier,
  empty_identifier,
  invalid_base64,
  fetch_failed,
  scheme_unsupported,
  write_failed,
  unsupported_encoding,
  corrupt_stream,
  unsupported_algorithm,
  malformed_fixity,
  empty_record_list,
  manifest_syntax,
  manifest_semantics,
  profile_blocked,
  io_error,
  invalid_argument,
};

const char* errc_name(Errc code);

// 1-based source position; line 0 means "unknown".
struct SourcePos {
  std::size_t line = 0;
  std::size_t column = 0;
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message, SourcePos pos = {})
      : std::runtime_error(std::move(message)), code_(code), pos_(pos) {}

  Errc code() const { return code_; }
  SourcePos pos() const { return pos_; }

 private:
  Errc code_;
  SourcePos pos_;
};

[[noreturn]] inline void raise(Errc code, std::string message, SourcePos pos = {}) {
  throw Error(code, std::move(message), pos);
}

inline const char* errc_name(Errc code) {
  switch (code) {
    case Errc::malformed_xml: return "MalformedXml";
    case Errc::not_didl: return "NotDidl";
    case Errc::profile_shape: return "ProfileShape";
    case Errc::invariant_violation: return "InvariantViolation";
    case Errc::not_xml: return "NotXml";
    case Errc::missing_identifier: return "MissingIdentifier";
    case Errc::empty_identifier: return "EmptyIdentifier";
    case Errc::invalid_base64: return "InvalidBase64";
    case Errc::fetch_failed: return "FetchFailed";
    case Errc::scheme_unsupported: return "SchemeUnsupported";
    case Errc::write_failed: return "WriteFailed";
    case Errc::unsupported_encoding: return "UnsupportedEncoding";
    case Errc::corrupt_stream: return "CorruptStream";
    case Errc::unsupported_algorithm: return "UnsupportedAlgorithm";
    case Errc::malformed_fixity: return "MalformedFixity";
    case Errc::empty_record_list: return "EmptyRecordList";
    case Errc::manifest_syntax: return "ManifestSyntax";
    case Errc::manifest_semantics: return "ManifestSemantics";
    case Errc::profile_blocked: return "ProfileBlocked";
    case Errc::io_error: return "IoError";
    case Errc::invalid_argument: return "InvalidArgument";
  }
  return "UnknownError";
}

}  // namespace didlpack
