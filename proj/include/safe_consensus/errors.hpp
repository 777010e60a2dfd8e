#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace safe_consensus {

enum class TerminationStatus {
  completed,
  singular_jacobian,
  qp_infeasible,
  unfilterable_constraint,
  integrator_failure,
};

std::string_view to_string(TerminationStatus status);

/// Base for controller failures that abort a simulation run.
class SimulationError : public std::runtime_error {
 public:
  SimulationError(TerminationStatus status, const std::string& what)
      : std::runtime_error(what), status_(status) {}
  TerminationStatus status() const noexcept { return status_; }

 private:
  TerminationStatus status_;
};

class SingularJacobian : public SimulationError {
 public:
  explicit SingularJacobian(const std::string& what)
      : SimulationError(TerminationStatus::singular_jacobian, what) {}
};

class QpInfeasible : public SimulationError {
 public:
  explicit QpInfeasible(const std::string& what)
      : SimulationError(TerminationStatus::qp_infeasible, what) {}
};

class UnfilterableConstraint : public SimulationError {
 public:
  explicit UnfilterableConstraint(const std::string& what)
      : SimulationError(TerminationStatus::unfilterable_constraint, what) {}
};

class IntegratorFailure : public SimulationError {
 public:
  explicit IntegratorFailure(const std::string& what)
      : SimulationError(TerminationStatus::integrator_failure, what) {}
};

}  // namespace safe_consensus
