#pragma once

#include <stdexcept>
#include <string>

namespace ranslice {

// Raised when a caller breaks an operation's precondition. The message names
// the offending entity (MU, SP, slot) so the harness can surface it verbatim.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Raised for malformed configuration or input files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ContractViolation(what);
}

}  // namespace ranslice
