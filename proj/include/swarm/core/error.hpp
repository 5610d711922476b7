#pragma once

#include <stdexcept>
#include <string>

namespace swarm {

enum class ErrorKind {
  Config,
  InfeasibleInstance,
  Unassigned,
  RoundComplete,
  Divergence,
  IncompatibleEncoding,
  Io,
};

const char* to_string(ErrorKind kind);

/// Exception carrying a machine-readable category. The CLI maps the
/// category onto its exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

/// Process exit code for an error category (0 is reserved for success).
int exit_code(ErrorKind kind);

}  // namespace swarm
