#include "ist/error.hpp"

namespace ist {

namespace {

std::string compose(ErrorKind kind, const std::string& message, const std::string& where) {
  std::string out{to_string(kind)};
  if (!where.empty()) out += " at " + where;
  out += ": " + message;
  return out;
}

}  // namespace

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyWeights: return "EmptyWeights";
    case ErrorKind::NegativeWeight: return "NegativeWeight";
    case ErrorKind::ZeroMass: return "ZeroMass";
    case ErrorKind::InvalidId: return "InvalidId";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::UnknownDimension: return "UnknownDimension";
    case ErrorKind::NotALeaf: return "NotALeaf";
    case ErrorKind::ChildWeightSum: return "ChildWeightSum";
    case ErrorKind::Syntax: return "SyntaxError";
    case ErrorKind::Schema: return "SchemaError";
    case ErrorKind::Validation: return "ValidationError";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::Range: return "RangeError";
    case ErrorKind::BadConfig: return "BadConfig";
    case ErrorKind::UnknownTask: return "UnknownTask";
    case ErrorKind::InvalidDistribution: return "InvalidDistribution";
    case ErrorKind::UnknownVariable: return "UnknownVariable";
    case ErrorKind::DomainMismatch: return "DomainMismatch";
    case ErrorKind::WorldTooLarge: return "WorldTooLarge";
    case ErrorKind::MissingCondition: return "MissingCondition";
    case ErrorKind::ZeroSignal: return "ZeroSignal";
    case ErrorKind::BadBudget: return "BadBudget";
    case ErrorKind::BadPerturbation: return "BadPerturbation";
    case ErrorKind::Inconsistent: return "Inconsistent";
    case ErrorKind::MissingScores: return "MissingScores";
    case ErrorKind::Io: return "IoError";
    case ErrorKind::Internal: return "InternalError";
  }
  return "UnknownError";
}

Error::Error(ErrorKind kind, std::string message, std::string where)
    : std::runtime_error(compose(kind, message, where)), kind_(kind), where_(std::move(where)) {}

Error::Error(ErrorKind kind, std::string message, std::size_t line, std::size_t column)
    : std::runtime_error(compose(kind, message,
                                 "line " + std::to_string(line) + ", column " + std::to_string(column))),
      kind_(kind),
      where_("line " + std::to_string(line)),
      line_(line),
      column_(column) {}

}  // namespace ist
