#pragma once

#include <stdexcept>
#include <string>

namespace rclqr {

/// Base class for all errors thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// The closed loop A - B*K has spectral radius >= 1 (within margin).
class UnstableClosedLoop : public Error {
 public:
  explicit UnstableClosedLoop(const std::string& what) : Error(what) {}
};

/// A linear solve was too ill-conditioned to trust.
class SingularSystem : public Error {
 public:
  explicit SingularSystem(const std::string& what) : Error(what) {}
};

/// The Riccati fixed-point iteration did not produce a stabilizing solution.
class NoStabilizingSolution : public Error {
 public:
  explicit NoStabilizingSolution(const std::string& what) : Error(what) {}
};

/// Backtracking shrank the stepsize below the underflow floor.
class LineSearchFailed : public Error {
 public:
  explicit LineSearchFailed(const std::string& what) : Error(what) {}
};

/// A simulated state exceeded the overflow guard (diverging rollout).
class Overflow : public Error {
 public:
  explicit Overflow(const std::string& what) : Error(what) {}
};

/// Monte-Carlo noise statistics produced a non-PD covariance estimate.
class DegenerateCovariance : public Error {
 public:
  explicit DegenerateCovariance(const std::string& what) : Error(what) {}
};

/// Invalid configuration or malformed input file.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

}  // namespace rclqr
