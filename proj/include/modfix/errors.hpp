#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "modfix/element.hpp"

namespace modfix {

struct IterationTrace;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (bad constants, dimension
/// mismatch, missing certificate). The CLI maps these to exit status 2.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// ρ evaluated to +inf or NaN.
class ModularOverflow : public Error {
 public:
  using Error::Error;
};

/// A mapping produced a point outside its declared domain.
class DomainViolation : public Error {
 public:
  using Error::Error;
};

/// The mathematics said no: a certification failed, a hypothesis was not
/// observed, or an iteration could not be carried out. Carries the witness
/// elements and, when a solver had started, the partial trace.
class Rejection : public Error {
 public:
  explicit Rejection(const std::string& what, std::vector<Element> witness = {},
                     std::shared_ptr<const IterationTrace> trace = nullptr)
      : Error(what), witness_(std::move(witness)), trace_(std::move(trace)) {}

  const std::vector<Element>& witness() const noexcept { return witness_; }
  const std::shared_ptr<const IterationTrace>& trace() const noexcept { return trace_; }

 private:
  std::vector<Element> witness_;
  std::shared_ptr<const IterationTrace> trace_;
};

}  // namespace modfix
