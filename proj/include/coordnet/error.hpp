#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace coordnet {

enum class ErrorCode {
  MalformedLine,
  MalformedRecord,
  DuplicateActor,
  DuplicatePost,
  UnknownCohort,
  UnknownAuthor,
  KindConflict,
  NegativeLatency,
  EmptySample,
  InvalidConfig,
  FileNotFound,
  IoError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedLine: return "MALFORMED_LINE";
    case ErrorCode::MalformedRecord: return "MALFORMED_RECORD";
    case ErrorCode::DuplicateActor: return "DUPLICATE_ACTOR";
    case ErrorCode::DuplicatePost: return "DUPLICATE_POST";
    case ErrorCode::UnknownCohort: return "UNKNOWN_COHORT";
    case ErrorCode::UnknownAuthor: return "UNKNOWN_AUTHOR";
    case ErrorCode::KindConflict: return "KIND_CONFLICT";
    case ErrorCode::NegativeLatency: return "NEGATIVE_LATENCY";
    case ErrorCode::EmptySample: return "EMPTY_SAMPLE";
    case ErrorCode::InvalidConfig: return "INVALID_CONFIG";
    case ErrorCode::FileNotFound: return "FILE_NOT_FOUND";
    case ErrorCode::IoError: return "IO_ERROR";
  }
  return "UNKNOWN";
}

// Data errors map to exit code 1, usage and I/O errors to exit code 2.
inline bool is_data_error(ErrorCode code) {
  return code != ErrorCode::InvalidConfig && code != ErrorCode::FileNotFound &&
         code != ErrorCode::IoError;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string subject, std::optional<std::size_t> line = std::nullopt)
      : std::runtime_error(format_message(code, subject, line)),
        code_(code),
        subject_(std::move(subject)),
        line_(line) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& subject() const noexcept { return subject_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  static std::string format_message(ErrorCode code, const std::string& subject,
                                    std::optional<std::size_t> line) {
    std::string msg(to_string(code));
    if (line) msg += " at line " + std::to_string(*line);
    if (!subject.empty()) msg += ": " + subject;
    return msg;
  }

  ErrorCode code_;
  std::string subject_;
  std::optional<std::size_t> line_;
};

}  // namespace coordnet
