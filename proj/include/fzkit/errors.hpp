#pragma once

#include <stdexcept>
#include <string>

namespace fzkit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line, int column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

#define FZKIT_ERROR(Name)          \
  class Name : public Error {      \
   public:                         \
    using Error::Error;            \
  }

FZKIT_ERROR(AlphabetError);
FZKIT_ERROR(NotAnAutomorphism);
FZKIT_ERROR(NonComposable);
FZKIT_ERROR(NotIrreducible);
FZKIT_ERROR(UnclassifiableStratum);
FZKIT_ERROR(NotARepresentative);
FZKIT_ERROR(AuditFailed);
FZKIT_ERROR(WNotInVertexGroup);
FZKIT_ERROR(TrivialEdgeGroup);
FZKIT_ERROR(PreconditionFailed);
FZKIT_ERROR(BasisAdaptationFailed);
FZKIT_ERROR(NumericUnderflow);
FZKIT_ERROR(InversionUnavailable);
FZKIT_ERROR(BudgetExceeded);

#undef FZKIT_ERROR

// Three-valued outcome for anything bounded by a cap.
enum class Status { pass, fail, unknown };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    default: return "unknown";
  }
}

}  // namespace fzkit
