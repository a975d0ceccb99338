#pragma once

#include <stdexcept>
#include <string>

namespace foldocp {

// Failure categories. The CLI maps each one onto a process exit code.
enum class ErrorKind {
  Validation,         // bad input or violated precondition
  SkewViolation,
  OutOfChart,
  TooFarFromGroup,
  Singular,           // singular Jacobian, block or tangent map
  RegularityViolation,
  NoConvergence,
  NonFinite,
  GimbalLock,
  Parse,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define FOLDOCP_DEFINE_ERROR(Name, Kind)                              \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what) : Error(Kind, what) {}     \
  }

FOLDOCP_DEFINE_ERROR(ValidationError, ErrorKind::Validation);
FOLDOCP_DEFINE_ERROR(SkewViolation, ErrorKind::SkewViolation);
FOLDOCP_DEFINE_ERROR(OutOfChart, ErrorKind::OutOfChart);
FOLDOCP_DEFINE_ERROR(TooFarFromGroup, ErrorKind::TooFarFromGroup);
FOLDOCP_DEFINE_ERROR(SingularError, ErrorKind::Singular);
FOLDOCP_DEFINE_ERROR(RegularityViolation, ErrorKind::RegularityViolation);
FOLDOCP_DEFINE_ERROR(NoConvergence, ErrorKind::NoConvergence);
FOLDOCP_DEFINE_ERROR(NonFinite, ErrorKind::NonFinite);
FOLDOCP_DEFINE_ERROR(GimbalLock, ErrorKind::GimbalLock);
FOLDOCP_DEFINE_ERROR(ParseError, ErrorKind::Parse);
FOLDOCP_DEFINE_ERROR(IoError, ErrorKind::Io);

#undef FOLDOCP_DEFINE_ERROR

// Process exit code for an error kind: 2 validation, 3 no convergence,
// 4 singularity, 5 I/O.
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Validation:
    case ErrorKind::SkewViolation:
    case ErrorKind::TooFarFromGroup:
    case ErrorKind::GimbalLock:
    case ErrorKind::Parse:
      return 2;
    case ErrorKind::OutOfChart:
    case ErrorKind::NoConvergence:
    case ErrorKind::NonFinite:
      return 3;
    case ErrorKind::Singular:
    case ErrorKind::RegularityViolation:
      return 4;
    case ErrorKind::Io:
      return 5;
  }
  return 1;
}

}  // namespace foldocp
