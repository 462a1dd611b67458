#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace harsanyi {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mismatched vector lengths, variable counts out of range, bad masks.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A value function produced a non-finite output.
class EvaluationError : public Error {
 public:
  EvaluationError(std::uint32_t mask, const std::string& what)
      : Error(what), mask_(mask) {}
  std::uint32_t mask() const { return mask_; }

 private:
  std::uint32_t mask_;
};

// Violations of the evaluator line protocol (malformed lines, duplicate or
// missing ids, timeouts, non-finite values).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Table files that do not match the documented format.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Metrics whose normalizer vanishes (e.g. zero output range of a model).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class TrainingError : public Error {
 public:
  TrainingError(int epoch, const std::string& what)
      : Error(what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

}  // namespace harsanyi
