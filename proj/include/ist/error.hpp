#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ist {

enum class ErrorKind {
  EmptyWeights,
  NegativeWeight,
  ZeroMass,
  InvalidId,
  InvalidSpec,
  UnknownDimension,
  NotALeaf,
  ChildWeightSum,
  Syntax,
  Schema,
  Validation,
  LengthMismatch,
  Range,
  BadConfig,
  UnknownTask,
  InvalidDistribution,
  UnknownVariable,
  DomainMismatch,
  WorldTooLarge,
  MissingCondition,
  ZeroSignal,
  BadBudget,
  BadPerturbation,
  Inconsistent,
  MissingScores,
  Io,
  Internal,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the toolkit. `where` carries a JSON path
// ("dimensions[2].weight") or a dimension id; `line`/`column` are set for
// syntax errors and per-line record errors.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message, std::string where = {});
  Error(ErrorKind kind, std::string message, std::size_t line, std::size_t column);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& where() const noexcept { return where_; }
  std::optional<std::size_t> line() const noexcept { return line_; }
  std::optional<std::size_t> column() const noexcept { return column_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

  Error& with_index(std::size_t index) {
    index_ = index;
    return *this;
  }

 private:
  ErrorKind kind_;
  std::string where_;
  std::optional<std::size_t> line_;
  std::optional<std::size_t> column_;
  std::optional<std::size_t> index_;
};

}  // namespace ist
