#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace recode {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of an operation (e.g. k <= 0 for a universal code).
class DomainError : public Error {
public:
  using Error::Error;
};

/// A bit string ended in the middle of a codeword.
class TruncationError : public Error {
public:
  using Error::Error;
};

/// A payload that cannot have been produced by the matching encoder.
class MalformedCodeword : public Error {
public:
  using Error::Error;
};

class UndefinedRatio : public Error {
public:
  using Error::Error;
};

class UnboundedRatio : public Error {
public:
  using Error::Error;
};

class ZeroProbabilitySymbol : public Error {
public:
  using Error::Error;
};

class InsufficientSamples : public Error {
public:
  using Error::Error;
};

class LowExpectedCount : public Error {
public:
  using Error::Error;
};

/// Container header or record file could not be parsed.
class FormatError : public Error {
public:
  using Error::Error;
};

/// A selection sampler hit its step budget before terminating.
///
/// Carries the diagnostics of the run so far: the number of proposals
/// examined and the index the sampler would have returned at this point.
class BudgetExhausted : public Error {
public:
  BudgetExhausted(std::uint64_t steps, std::uint64_t best_index)
      : Error("selection budget exhausted after " + std::to_string(steps) +
              " steps (best index so far " + std::to_string(best_index) + ")"),
        steps_(steps),
        best_index_(best_index) {}

  std::uint64_t steps() const noexcept { return steps_; }
  std::uint64_t best_index() const noexcept { return best_index_; }

private:
  std::uint64_t steps_;
  std::uint64_t best_index_;
};

}  // namespace recode
