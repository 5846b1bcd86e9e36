#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mql {

// Machine-readable failure categories. Each maps to a stable `MQL-xxx` code
// used in diagnostics and CLI output.
enum class ErrorCode {
  IoError,
  FormatError,
  UnknownColumn,
  DuplicateColumn,
  TypeMismatch,
  EmptyColumn,
  LexError,
  ParseError,
  ExclusivityError,
  RangeError,
  NotNumeric,
  TooFewValues,
  DomainError,
  TrainTooLarge,
  DegenerateDesign,
  KTooLarge,
  KExceedsRows,
  SchemaMismatch,
  EmptyTestSet,
  NameCollision,
  UnknownModel,
  CorruptManifest,
  UnknownTable,
  UnknownAlgorithm,
  UnknownLabels,
  AmbiguousTarget,
  TargetInFeatures,
  DatatypeFail,
  SupervisionMismatch,
  AccuracyBelowThreshold,
  BestBelowThreshold,
  EmptyResult,
  MissingActuals,
  TooFewFeatures,
  UnsupportedForEmission,
  MissingInput,
  Usage,
  Unsupported,
};

std::string_view error_code_name(ErrorCode code);

// "MQL-001" style identifier.
std::string error_code_id(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Lexer/parser failures carry a source position.
class SyntaxError : public Error {
 public:
  SyntaxError(ErrorCode code, const std::string& message, int line, int column)
      : Error(code, message), line_(line), column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace mql
