#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace orgcoupling {

enum class ErrorKind {
  MalformedRecord,
  TimestampOutOfRange,
  ConflictingAlias,
  AuthFailure,
  RateLimited,
  PartialFetch,
  FetchError,
  EmptyTimeline,
  OutOfWindow,
  InvalidConfig,
  UnknownDeveloper,
  EmptyProject,
  EmptySequence,
  SingleService,
  GridMismatch,
  TooFewWindows,
  InvalidSpec,
  GraphTooLarge,
  InputMissing,
  MissingAnalysis,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedRecord: return "MalformedRecord";
    case ErrorKind::TimestampOutOfRange: return "TimestampOutOfRange";
    case ErrorKind::ConflictingAlias: return "ConflictingAlias";
    case ErrorKind::AuthFailure: return "AuthFailure";
    case ErrorKind::RateLimited: return "RateLimited";
    case ErrorKind::PartialFetch: return "PartialFetch";
    case ErrorKind::FetchError: return "FetchError";
    case ErrorKind::EmptyTimeline: return "EmptyTimeline";
    case ErrorKind::OutOfWindow: return "OutOfWindow";
    case ErrorKind::InvalidConfig: return "ConfigError";
    case ErrorKind::UnknownDeveloper: return "UnknownDeveloper";
    case ErrorKind::EmptyProject: return "EmptyProject";
    case ErrorKind::EmptySequence: return "EmptySequence";
    case ErrorKind::SingleService: return "SingleService";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::TooFewWindows: return "TooFewWindows";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::GraphTooLarge: return "GraphTooLarge";
    case ErrorKind::InputMissing: return "InputMissing";
    case ErrorKind::MissingAnalysis: return "MissingAnalysis";
  }
  return "Unknown";
}

// Base exception for everything the library throws on contract violations.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class MalformedRecord : public Error {
 public:
  MalformedRecord(std::size_t line_no, const std::string& reason)
      : Error(ErrorKind::MalformedRecord, "line " + std::to_string(line_no) + ": " + reason),
        line_no_(line_no),
        reason_(reason) {}

  std::size_t line_no() const noexcept { return line_no_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_no_;
  std::string reason_;
};

class ConflictingAlias : public Error {
 public:
  ConflictingAlias(std::string raw, std::string first, std::string second)
      : Error(ErrorKind::ConflictingAlias,
              "'" + raw + "' maps to both '" + first + "' and '" + second + "'"),
        raw_(std::move(raw)),
        first_(std::move(first)),
        second_(std::move(second)) {}

  const std::string& raw() const noexcept { return raw_; }
  const std::string& first() const noexcept { return first_; }
  const std::string& second() const noexcept { return second_; }

 private:
  std::string raw_, first_, second_;
};

class RateLimited : public Error {
 public:
  explicit RateLimited(long retry_after_s, const std::string& cursor = {})
      : Error(ErrorKind::RateLimited, "retry after " + std::to_string(retry_after_s) + "s"),
        retry_after_(retry_after_s),
        cursor_(cursor) {}

  long retry_after() const noexcept { return retry_after_; }
  const std::string& cursor() const noexcept { return cursor_; }

 private:
  long retry_after_;
  std::string cursor_;
};

class PartialFetch : public Error {
 public:
  PartialFetch(std::string cursor, const std::string& cause)
      : Error(ErrorKind::PartialFetch, cause + " (resume from " + cursor + ")"),
        cursor_(std::move(cursor)) {}

  // Path of the cursor file that a rerun resumes from.
  const std::string& cursor() const noexcept { return cursor_; }

 private:
  std::string cursor_;
};

}  // namespace orgcoupling
