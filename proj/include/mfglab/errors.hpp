#pragma once

#include <stdexcept>
#include <string>

namespace mfglab {

// Error taxonomy mirrors CLI exit codes: config -> 2, solver -> 3,
// everything else surfaces as a check failure (1).
struct GeometryError : std::runtime_error {
  explicit GeometryError(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

struct PreconditionError : std::runtime_error {
  explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

struct SolverError : std::runtime_error {
  SolverError(const std::string& what, double residual = -1.0)
      : std::runtime_error(what), final_residual(residual) {}
  double final_residual;
};

struct DivergenceError : SolverError {
  explicit DivergenceError(const std::string& what) : SolverError(what) {}
};

struct AmbiguityError : std::runtime_error {
  explicit AmbiguityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mfglab
