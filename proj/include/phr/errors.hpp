#pragma once

#include <stdexcept>
#include <string>

namespace phr {

struct InvalidInputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct PencilSingularError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularEvaluationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A supplied Q does not qualify as a certificate (singular where
/// nonsingularity is required).
struct SingularCertificateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotACertificateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Evidence against positive realness surfaced by a construction that
/// assumes it.
struct NotPositiveRealError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotCompletelyControllableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PreconditionViolationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A condensed-form step found structure that contradicts its
/// assumptions (e.g. index > 2); carries the failing step name.
struct StructureError : std::runtime_error {
  explicit StructureError(const std::string& step, const std::string& what)
      : std::runtime_error(step + ": " + what), step_(step) {}
  const std::string& step() const { return step_; }

 private:
  std::string step_;
};

struct InconclusiveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace phr
