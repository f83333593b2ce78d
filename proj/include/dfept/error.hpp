#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dfept {

enum class ErrorKind {
  EmptySource,
  ParseRejected,
  UnsupportedFormat,
  FormatError,
  DataError,
  InvalidDimension,
  EmptyGraph,
  ShapeError,
  ContractViolation,
  EmptyDataset,
  TooSmall,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Byte span [start, end) into a source buffer.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  bool contains(const Span& other) const { return start <= other.start && other.end <= end; }
  bool operator==(const Span&) const = default;
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Strict parse found a grammar-error node; span is the first one in source order.
class ParseRejected : public Error {
 public:
  explicit ParseRejected(Span span)
      : Error(ErrorKind::ParseRejected, "grammar error at bytes [" + std::to_string(span.start) + ", " +
                                            std::to_string(span.end) + ")"),
        span_(span) {}

  Span span() const noexcept { return span_; }

 private:
  Span span_;
};

/// Malformed input, optionally tied to a 1-based line number.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& message, std::optional<std::size_t> line = std::nullopt)
      : Error(ErrorKind::FormatError, line ? "line " + std::to_string(*line) + ": " + message : message),
        line_(line) {}

  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  std::optional<std::size_t> line_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptySource: return "EmptySource";
    case ErrorKind::ParseRejected: return "ParseRejected";
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::FormatError: return "FormatError";
    case ErrorKind::DataError: return "DataError";
    case ErrorKind::InvalidDimension: return "InvalidDimension";
    case ErrorKind::EmptyGraph: return "EmptyGraph";
    case ErrorKind::ShapeError: return "ShapeError";
    case ErrorKind::ContractViolation: return "ContractViolation";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::TooSmall: return "TooSmall";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace dfept
