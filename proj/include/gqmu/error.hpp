#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gqmu {

// Every failure raised by the library derives from Error so callers (and the
// CLI) can tell library faults apart from std::bad_alloc and friends.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes or values that violate an operation's precondition.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Inconsistent configuration, detected before any heavy compute.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Linear-algebra failure inside a solve (e.g. a non-positive pivot).
class SolverError : public Error {
 public:
  SolverError(const std::string& what, std::size_t pivot)
      : Error(what), pivot_(pivot) {}
  explicit SolverError(const std::string& what) : Error(what) {}

  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_ = 0;
};

// The data cannot support the requested decomposition.
class DegenerateData : public Error {
 public:
  using Error::Error;
};

class UnsupportedTau : public Error {
 public:
  using Error::Error;
};

// A pluggable component returned something outside its contract.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class TrainingDiverged : public Error {
 public:
  TrainingDiverged(const std::string& what, std::size_t iteration)
      : Error(what), iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

class MetricError : public Error {
 public:
  MetricError(const std::string& what, std::size_t index)
      : Error(what), index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Malformed file; offset is the byte position where decoding failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"),
        detail_(what),
        offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string detail_;
  std::uint64_t offset_;
};

}  // namespace gqmu
