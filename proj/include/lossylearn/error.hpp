#pragma once

#include <stdexcept>
#include <string>

namespace lossylearn {

enum class ErrorKind {
  dimension,         // label or shape mismatch
  domain,            // argument outside the operation's domain
  degenerate,        // zero-mass joint rows, empty regions
  stochasticity,     // rows not summing to one, negative mass
  support,           // structural-zero or absolute-continuity violation
  schema,            // malformed scenario file
  enumeration_cap,   // dataset universe larger than the configured cap
  solver,            // rate-distortion solver did not converge
  capability,        // algorithm lacks a dataset size the caller needs
  hypothesis,        // a theorem's hypothesis does not hold at this point
  io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind), detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace lossylearn
