#pragma once

#include <stdexcept>
#include <string>

namespace transwave {

enum class ErrorKind {
  Topology,
  Validation,
  Domain,
  SingularLine,
  Divergence,
  Configuration,
  IsolatedNode,
  InsufficientArrivals,
  Underdetermined,
  Parse,
};

const char* to_string(ErrorKind kind);

/// Base exception for everything the library throws on bad input or failed runs.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when an integrator produces a non-finite state.
class DivergenceError : public Error {
 public:
  DivergenceError(std::string engine, int bus, double t, const std::string& what)
      : Error(ErrorKind::Divergence, what), engine_(std::move(engine)), bus_(bus), t_(t) {}

  const std::string& engine() const noexcept { return engine_; }
  int bus() const noexcept { return bus_; }
  double time() const noexcept { return t_; }

 private:
  std::string engine_;
  int bus_;
  double t_;
};

}  // namespace transwave
