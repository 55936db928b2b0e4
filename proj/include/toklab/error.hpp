#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace toklab {

enum class ErrorKind {
  kEmptyCorpus,
  kVocabTargetBelowAlphabet,
  kUnrepresentableInput,
  kUnknownId,
  kParseError,
  kSchemaError,
  kValidationError,
  kIoFailure,
  kUtf8Error,
  kZeroBaseline,
  kLengthMismatch,
  kEmptySet,
  kInvalidArgument,
  kEncodeFailure,
};

std::string_view to_string(ErrorKind kind);

// Every failure in the library is reported as a toklab::Error. The kind lets
// callers (CLI exit codes, HTTP status mapping) branch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  // Utf8Error carries the byte offset of the first invalid byte.
  static Error utf8(std::size_t offset, const std::string& context = {}) {
    std::string msg = "invalid UTF-8 at byte offset " + std::to_string(offset);
    if (!context.empty()) msg += " (" + context + ")";
    Error e(ErrorKind::kUtf8Error, msg);
    e.offset_ = offset;
    return e;
  }

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<std::size_t> offset() const noexcept { return offset_; }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> offset_;
};

}  // namespace toklab
