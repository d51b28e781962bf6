#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mpnet {

enum class ErrorKind {
  Syntax,
  UnboundVariable,
  TypeMismatch,
  OpaqueInspection,
  DivisionByZero,
  ConditionNotBoolean,
  UnknownFunction,
  UnresolvedChoice,
  ColorMismatch,
  NotServiceable,
  InvalidNet,
  CompoundKindMismatch,
  CompoundColorMismatch,
  TargetPlaceMissing,
  InvalidLocation,
  InvalidFragment,
  UnknownPlace,
  DuplicateLabel,
  UnsupportedPattern,
  BindingSearchBudgetExceeded,
  StaleCandidate,
  RankCountTooSmall,
  UnknownVariable,
  UnknownCall,
  MissingArgument,
  Format,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

/// Source position, 1-based.
struct SourcePos {
  int line = 1;
  int column = 1;
};

class SyntaxError : public Error {
 public:
  SyntaxError(SourcePos pos, const std::string& message, std::vector<std::string> expected = {});

  SourcePos pos() const { return pos_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  SourcePos pos_;
  std::vector<std::string> expected_;
};

}  // namespace mpnet
