#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace nrhc {

/// Bad input to an operation (wrong dimension, index out of range, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operation called on an object in the wrong mode or phase.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A configuration field failed validation. `field()` names the offending key.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A non-finite value appeared while integrating the horizon problem.
///
/// The sweep only knows the artificial time `tau`; the simulator re-throws with
/// the agent index and the sampling instant filled in.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::string stage, double tau,
                  std::optional<std::size_t> agent = std::nullopt,
                  double t = std::numeric_limits<double>::quiet_NaN())
      : std::runtime_error(describe(stage, tau, agent, t)),
        stage_(std::move(stage)),
        tau_(tau),
        agent_(agent),
        t_(t) {}

  DivergenceError with_context(std::size_t agent, double t) const {
    return DivergenceError(stage_, tau_, agent, t);
  }

  const std::string& stage() const noexcept { return stage_; }
  double tau() const noexcept { return tau_; }
  std::optional<std::size_t> agent() const noexcept { return agent_; }
  double t() const noexcept { return t_; }

 private:
  static std::string describe(const std::string& stage, double tau,
                              std::optional<std::size_t> agent, double t) {
    std::string msg = "divergence in " + stage + " at tau=" + std::to_string(tau);
    if (agent) {
      msg += " (agent " + std::to_string(*agent) + ", t=" + std::to_string(t) + ")";
    }
    return msg;
  }

  std::string stage_;
  double tau_;
  std::optional<std::size_t> agent_;
  double t_;
};

}  // namespace nrhc
