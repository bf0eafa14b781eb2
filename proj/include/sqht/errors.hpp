#ifndef SQHT_ERRORS_HPP
#define SQHT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sqht {

// Every failure mode carries a stable machine-parsable tag. Tags with
// kind() < ErrorKind::Internal are input/validation problems (CLI exit 2);
// the rest are internal numerical failures (CLI exit 3).
enum class ErrorKind {
  NonFinite,
  NotHermitian,
  DomainError,
  Overflow,
  DimensionMismatch,
  Validation,
  Schema,
  NotFullSupport,
  OutOfRange,
  SupportViolation,
  TauTooLarge,
  NotDistinguishable,
  ZeroProbabilityOutcome,
  EmptyInput,
  TruncatedPresent,
  NoTrajectories,
  WrongDimension,
  DegenerateRegion,
  Config,
  Internal,
};

const char* error_tag(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(error_tag(kind)) + ": " + detail),
        kind_(kind),
        detail_(detail) {}

  ErrorKind kind() const { return kind_; }
  const char* tag() const { return error_tag(kind_); }
  const std::string& detail() const { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace sqht

#endif
