#include "swarm/core/error.hpp"

namespace swarm {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return "config-error";
    case ErrorKind::InfeasibleInstance: return "infeasible-instance";
    case ErrorKind::Unassigned: return "unassigned";
    case ErrorKind::RoundComplete: return "round-complete";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::IncompatibleEncoding: return "incompatible-encoding";
    case ErrorKind::Io: return "io-error";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return 2;
    case ErrorKind::IncompatibleEncoding: return 3;
    case ErrorKind::Divergence: return 4;
    default: return 1;
  }
}

}  // namespace swarm
