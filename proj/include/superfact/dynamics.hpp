#pragma once

// Hamilton's equations, trajectory integration with conservation monitoring,
// and closed-orbit detection.

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "superfact/factorization.hpp"

namespace superfact {

enum class Method { dopri5, implicit_midpoint };

std::string_view method_name(Method m);
Method parse_method(std::string_view name);

struct IntegratorControls {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = 0.05;
  double sample_dt = 0.01;
  Method method = Method::dopri5;
  /// Integration stops once the state comes within margin/2 of a singular surface.
  double margin = kDefaultMargin;
};

/// One recorded state with the conserved quantities evaluated on it.
struct Sample {
  double t = 0.0;
  PhasePoint point;
  double energy = 0.0;
  double second = 0.0;
  double x = 0.0;
  double y = 0.0;
};

struct Trajectory {
  SystemSpec spec;
  PhasePoint initial;
  IntegratorControls controls;
  std::vector<Sample> samples;
};

/// State left the valid region; `partial` holds everything recorded before.
class DomainBreach : public DomainError {
 public:
  DomainBreach(const std::string& what, Trajectory partial, double t, PhasePoint last_good)
      : DomainError(what), partial_(std::move(partial)), t_(t), last_good_(last_good) {}
  const Trajectory& partial() const { return partial_; }
  double time() const { return t_; }
  const PhasePoint& last_good() const { return last_good_; }

 private:
  Trajectory partial_;
  double t_;
  PhasePoint last_good_;
};

/// Step size underflow or non-converging implicit solve.
class StepFailure : public std::runtime_error {
 public:
  StepFailure(const std::string& what, Trajectory partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

class InsufficientSpan : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// (∂H/∂p₁, ∂H/∂p₂, −∂H/∂q₁, −∂H/∂q₂) from exact dual derivatives.
std::array<double, 4> hamilton_rhs(const SystemSpec& spec, const PhasePoint& p);

/// Samples at every multiple of sample_dt up to t_end, plus t_end itself.
Trajectory integrate(const SystemSpec& spec, const PhasePoint& p0, double t_end,
                     const IntegratorControls& controls = {});

/// 2π/ω for the oscillators, π/ω for TTW (no 1/2 in its kinetic term).
double characteristic_period(const SystemSpec& spec);

struct QuantityDrift {
  std::string name;
  double max_abs = 0.0;
  double relative = 0.0;
};

/// Drift of H, the second integral, X and Y. X and Y are measured against
/// |X⁺(0)| = √(X² + Y²), since either may start near zero.
struct DriftReport {
  std::vector<QuantityDrift> quantities;

  const QuantityDrift& at(std::string_view name) const;
};

DriftReport drift_report(const Trajectory& traj);

struct ClosureResult {
  bool closed = false;
  std::optional<double> period;
  double return_distance = 0.0;
};

/// First return to the initial point within `eps` (Euclidean norm on internal
/// coordinates), refined between samples by cubic Hermite interpolation.
ClosureResult detect_closure(const Trajectory& traj, double eps);

/// Target levels for finding a starting point on a prescribed orbit.
struct LevelTargets {
  double energy = 0.0;
  double second = 0.0;
  enum class Symmetry { x, y } symmetry = Symmetry::x;
  double symmetry_value = 0.0;
};

class NoSolution : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Damped minimum-norm Newton from a grid of starts inside the default box.
/// Succeeds when every level matches within tol·(1 + |level|).
PhasePoint find_level_point(const SystemSpec& spec, const LevelTargets& targets,
                            double tol = 1e-9);

}  // namespace superfact
