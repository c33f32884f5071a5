#pragma once

#include <stdexcept>
#include <string>

namespace pst {

/// Thrown when an operation requires connectivity that the input lacks
/// (e.g. MST of a disconnected induced subgraph).
class InfeasibleError : public std::runtime_error {
public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown by the pressure solver when the boundary vertices do not share
/// one live component, or the iteration fails to reach the residual target.
class SingularSystemError : public std::runtime_error {
public:
  explicit SingularSystemError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown by the exact solver when the terminal count exceeds its guard.
class TerminalLimitError : public std::invalid_argument {
public:
  explicit TerminalLimitError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace pst
