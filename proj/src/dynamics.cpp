#include "superfact/dynamics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <limits>
#include <numbers>

namespace superfact {

namespace odeint = boost::numeric::odeint;

std::string_view method_name(Method m) {
  return m == Method::dopri5 ? "dopri5" : "implicit_midpoint";
}

Method parse_method(std::string_view name) {
  if (name == "dopri5" || name == "rk45") return Method::dopri5;
  if (name == "implicit_midpoint" || name == "midpoint") return Method::implicit_midpoint;
  throw ConfigError("unknown integration method '" + std::string(name) + "'");
}

namespace {

using Vec4 = std::array<double, 4>;

Vec4 rhs_of(const Observable& h, const PhasePoint& p) {
  const auto g = gradient(h, p);
  return {g[2].real(), g[3].real(), -g[0].real(), -g[1].real()};
}

Sample make_sample(const SystemSpec& spec, double t, const PhasePoint& p) {
  Sample s;
  s.t = t;
  s.point = p;
  s.energy = hamiltonian(spec, p);
  s.second = second_integral(spec, p);
  const IntegralPair xy = higher_integral(spec, p);
  s.x = xy.x_real;
  s.y = xy.y_real;
  return s;
}

class Recorder {
 public:
  Recorder(const SystemSpec& spec, const PhasePoint& p0, const IntegratorControls& c)
      : traj_{spec, p0, c, {}}, breach_margin_(0.5 * c.margin) {}

  // Records a sample or throws DomainBreach when the point is too close to
  // a singular surface.
  void record(double t, const PhasePoint& p) {
    check(t, p);
    traj_.samples.push_back(make_sample(traj_.spec, t, p));
  }

  void check(double t, const PhasePoint& p) {
    const DomainVerdict v = domain_check(traj_.spec, p, breach_margin_);
    if (!v) {
      throw_breach(t, "domain breach at t=" + std::to_string(t) + ": " + v.violated);
    }
  }

  [[noreturn]] void throw_breach(double t, const std::string& what) {
    const PhasePoint last = traj_.samples.empty() ? traj_.initial : traj_.samples.back().point;
    throw DomainBreach(what, traj_, t, last);
  }

  [[noreturn]] void throw_step_failure(const std::string& what) { throw StepFailure(what, traj_); }

  double last_time() const { return traj_.samples.back().t; }
  Trajectory take() { return std::move(traj_); }

 private:
  Trajectory traj_;
  double breach_margin_;
};

void finish(Recorder& rec, double t_end, double dt, const auto& state_at) {
  if (t_end - rec.last_time() > 1e-9 * dt) {
    rec.record(t_end, state_at(t_end));
  }
}

Trajectory integrate_dopri5(const SystemSpec& spec, const Observable& h, const PhasePoint& p0,
                            double t_end, const IntegratorControls& c) {
  Recorder rec(spec, p0, c);
  rec.record(0.0, p0);

  auto system = [&h](const Vec4& x, Vec4& dxdt, double /*t*/) {
    dxdt = rhs_of(h, PhasePoint::from_array(x));
  };
  auto stepper = odeint::make_dense_output(c.abs_tol, c.rel_tol, c.max_step,
                                           odeint::runge_kutta_dopri5<Vec4>());
  stepper.initialize(p0.to_array(), 0.0, std::min(c.max_step, c.sample_dt) * 0.1);

  const double dt = c.sample_dt;
  std::size_t k = 1;
  Vec4 x{};
  while (stepper.current_time() < t_end) {
    try {
      stepper.do_step(system);
    } catch (const DomainError& e) {
      rec.throw_breach(stepper.current_time(), std::string("stage left the domain: ") + e.what());
    } catch (const odeint::step_adjustment_error& e) {
      rec.throw_step_failure(e.what());
    }
    const double t = stepper.current_time();
    while (static_cast<double>(k) * dt <= std::min(t, t_end)) {
      const double ts = static_cast<double>(k) * dt;
      stepper.calc_state(ts, x);
      rec.record(ts, PhasePoint::from_array(x));
      ++k;
    }
    rec.check(t, PhasePoint::from_array(stepper.current_state()));
    if (t < t_end && stepper.current_time_step() < 1e-14 * std::max(1.0, t)) {
      rec.throw_step_failure("step size underflow at t=" + std::to_string(t));
    }
  }
  finish(rec, t_end, dt, [&](double ts) {
    stepper.calc_state(ts, x);
    return PhasePoint::from_array(x);
  });
  return rec.take();
}

constexpr double kMidpointTol = 1e-13;
constexpr int kMidpointMaxIter = 50;
constexpr int kMidpointMaxHalvings = 8;

Trajectory integrate_midpoint(const SystemSpec& spec, const Observable& h, const PhasePoint& p0,
                              double t_end, const IntegratorControls& c) {
  Recorder rec(spec, p0, c);
  rec.record(0.0, p0);

  // Fixed-point solve of one step; nullopt when the iteration does not contract.
  auto solve = [&](const Vec4& x, double hstep) -> std::optional<Vec4> {
    Vec4 y = x;
    for (int it = 0; it < kMidpointMaxIter; ++it) {
      Vec4 mid{};
      for (std::size_t i = 0; i < 4; ++i) mid[i] = 0.5 * (x[i] + y[i]);
      const Vec4 f = rhs_of(h, PhasePoint::from_array(mid));
      double change = 0.0;
      double size = 0.0;
      Vec4 next{};
      for (std::size_t i = 0; i < 4; ++i) {
        next[i] = x[i] + hstep * f[i];
        change = std::max(change, std::abs(next[i] - y[i]));
        size = std::max(size, std::abs(next[i]));
      }
      y = next;
      if (change <= kMidpointTol * (1.0 + size)) {
        return y;
      }
    }
    return std::nullopt;
  };

  // Stiff stretches near the walls are taken in halved substeps.
  auto step = [&](auto&& self, const Vec4& x, double hstep, int depth) -> Vec4 {
    if (const auto y = solve(x, hstep)) return *y;
    if (depth >= kMidpointMaxHalvings) {
      rec.throw_step_failure("implicit midpoint iteration did not converge");
    }
    return self(self, self(self, x, 0.5 * hstep, depth + 1), 0.5 * hstep, depth + 1);
  };

  const double dt = c.sample_dt;
  const double nominal = dt / std::ceil(dt / std::min(c.max_step, dt));
  Vec4 x = p0.to_array();
  double t = 0.0;
  std::size_t k = 1;
  while (t < t_end) {
    double target = std::min(static_cast<double>(k) * dt, t_end);
    if (t_end - target <= 1e-9 * dt) {
      target = t_end;
    }
    const auto substeps = static_cast<int>(std::max(1.0, std::round((target - t) / nominal)));
    const double hstep = (target - t) / substeps;
    for (int j = 0; j < substeps; ++j) {
      try {
        x = step(step, x, hstep, 0);
      } catch (const DomainError& e) {
        rec.throw_breach(t, std::string("stage left the domain: ") + e.what());
      }
      rec.check(t + (j + 1) * hstep, PhasePoint::from_array(x));
    }
    t = target;
    rec.record(t, PhasePoint::from_array(x));
    ++k;
  }
  return rec.take();
}

}  // namespace

std::array<double, 4> hamilton_rhs(const SystemSpec& spec, const PhasePoint& p) {
  return rhs_of(hamiltonian_observable(spec), p);
}

Trajectory integrate(const SystemSpec& spec, const PhasePoint& p0, double t_end,
                     const IntegratorControls& controls) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) {
    throw PreconditionError("t_end must be positive");
  }
  if (!(controls.rel_tol > 0.0) || !(controls.abs_tol > 0.0) || !(controls.max_step > 0.0) ||
      !(controls.sample_dt > 0.0)) {
    throw PreconditionError("integrator tolerances and steps must be positive");
  }
  const DomainVerdict v = domain_check(spec, p0, 0.0);
  if (!v) {
    throw DomainError("initial point outside the domain: " + v.violated);
  }
  const Observable h = hamiltonian_observable(spec);
  return controls.method == Method::dopri5 ? integrate_dopri5(spec, h, p0, t_end, controls)
                                           : integrate_midpoint(spec, h, p0, t_end, controls);
}

double characteristic_period(const SystemSpec& spec) {
  const double base = spec.family() == Family::ttw ? std::numbers::pi : 2.0 * std::numbers::pi;
  return base / spec.omega();
}

const QuantityDrift& DriftReport::at(std::string_view name) const {
  for (const auto& q : quantities) {
    if (q.name == name) {
      return q;
    }
  }
  throw std::out_of_range("no drift entry named " + std::string(name));
}

DriftReport drift_report(const Trajectory& traj) {
  if (traj.samples.empty()) {
    throw PreconditionError("drift_report needs a non-empty trajectory");
  }
  const Sample& s0 = traj.samples.front();
  const double pair_scale = std::hypot(s0.x, s0.y);
  struct Spec {
    const char* name;
    double Sample::*field;
    double scale;
  };
  const std::array<Spec, 4> specs{{{"H", &Sample::energy, std::abs(s0.energy)},
                                   {"I2", &Sample::second, std::abs(s0.second)},
                                   {"X", &Sample::x, pair_scale},
                                   {"Y", &Sample::y, pair_scale}}};
  DriftReport report;
  for (const auto& q : specs) {
    QuantityDrift d{q.name, 0.0, 0.0};
    for (const auto& s : traj.samples) {
      d.max_abs = std::max(d.max_abs, std::abs(s.*q.field - s0.*q.field));
    }
    if (d.max_abs > 0.0) {
      d.relative = q.scale > 0.0 ? d.max_abs / q.scale : std::numeric_limits<double>::infinity();
    }
    report.quantities.push_back(d);
  }
  return report;
}

namespace {

double distance(const Vec4& a, const Vec4& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < 4; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Cubic Hermite interpolant between two samples using the vector field.
Vec4 hermite(const Vec4& x0, const Vec4& f0, const Vec4& x1, const Vec4& f1, double t0, double t1,
             double t) {
  const double h = t1 - t0;
  const double s = (t - t0) / h;
  const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
  const double h10 = s * (1.0 - s) * (1.0 - s);
  const double h01 = s * s * (3.0 - 2.0 * s);
  const double h11 = s * s * (s - 1.0);
  Vec4 out{};
  for (std::size_t i = 0; i < 4; ++i) {
    out[i] = h00 * x0[i] + h10 * h * f0[i] + h01 * x1[i] + h11 * h * f1[i];
  }
  return out;
}

}  // namespace

ClosureResult detect_closure(const Trajectory& traj, double eps) {
  if (!(eps > 0.0)) {
    throw PreconditionError("closure tolerance must be positive");
  }
  const auto& s = traj.samples;
  if (s.size() < 3) {
    throw InsufficientSpan("trajectory too short for closure detection");
  }
  const Vec4 start = s.front().point.to_array();
  std::vector<double> d(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    d[i] = distance(s[i].point.to_array(), start);
  }
  const double leave = 10.0 * eps;
  std::size_t i0 = 1;
  while (i0 < s.size() && d[i0] <= leave) ++i0;
  if (i0 >= s.size()) {
    throw InsufficientSpan("trajectory never leaves the neighbourhood of its start");
  }

  const Observable h = hamiltonian_observable(traj.spec);
  auto refine = [&](std::size_t i) {
    std::array<Vec4, 3> x{};
    std::array<Vec4, 3> f{};
    for (std::size_t j = 0; j < 3; ++j) {
      x[j] = s[i - 1 + j].point.to_array();
      f[j] = rhs_of(h, s[i - 1 + j].point);
    }
    auto at = [&](double t) {
      const std::size_t seg = t <= s[i].t ? 0 : 1;
      return hermite(x[seg], f[seg], x[seg + 1], f[seg + 1], s[i - 1 + seg].t, s[i + seg].t, t);
    };
    auto objective = [&](double t) { return distance(at(t), start); };
    return boost::math::tools::brent_find_minima(objective, s[i - 1].t, s[i + 1].t,
                                                 std::numeric_limits<double>::digits / 2);
  };

  ClosureResult result;
  result.return_distance = std::numeric_limits<double>::infinity();
  bool candidate = false;
  for (std::size_t i = i0 + 1; i + 1 < s.size(); ++i) {
    if (d[i] > d[i - 1] || d[i] > d[i + 1]) {
      continue;
    }
    candidate = true;
    const auto [t_star, dist] = refine(i);
    result.return_distance = std::min(result.return_distance, dist);
    if (dist <= eps) {
      result.closed = true;
      result.period = t_star - s.front().t;
      result.return_distance = dist;
      return result;
    }
  }
  if (!candidate) {
    throw InsufficientSpan("no return towards the initial point within the trajectory");
  }
  return result;
}

PhasePoint find_level_point(const SystemSpec& spec, const LevelTargets& targets, double tol) {
  const std::array<Observable, 3> fs{
      hamiltonian_observable(spec), second_integral_observable(spec),
      targets.symmetry == LevelTargets::Symmetry::x ? integral_x_observable(spec)
                                                    : integral_y_observable(spec)};
  const std::array<double, 3> levels{targets.energy, targets.second, targets.symmetry_value};
  const DomainBox box = default_box(spec);

  // Scaled residuals; nullopt when the point cannot be evaluated.
  auto residual = [&](const PhasePoint& p) -> std::optional<Eigen::Vector3d> {
    if (!domain_check(spec, p, box.margin)) return std::nullopt;
    try {
      Eigen::Vector3d r;
      for (int i = 0; i < 3; ++i) {
        r(i) = (fs[i](p).real() - levels[i]) / (1.0 + std::abs(levels[i]));
      }
      return r;
    } catch (const DomainError&) {
      return std::nullopt;
    }
  };

  // One damped minimum-norm Newton step; false when no trial reduces the residual.
  auto newton_step = [&](PhasePoint& p, Eigen::Vector3d& r) {
    Eigen::Matrix<double, 3, 4> jac;
    try {
      for (int i = 0; i < 3; ++i) {
        const auto g = gradient(fs[i], p);
        for (int k = 0; k < 4; ++k) jac(i, k) = g[k].real() / (1.0 + std::abs(levels[i]));
      }
    } catch (const DomainError&) {
      return false;
    }
    const Eigen::Vector4d step = -jac.completeOrthogonalDecomposition().solve(r);
    for (double lambda = 1.0; lambda >= 1.0 / 1024.0; lambda *= 0.5) {
      PhasePoint trial = p;
      for (std::size_t c = 0; c < 4; ++c) {
        trial[kAllCoords[c]] += lambda * step(static_cast<Eigen::Index>(c));
      }
      const auto rt = residual(trial);
      if (rt && rt->norm() < r.norm()) {
        p = trial;
        r = *rt;
        return true;
      }
    }
    return false;
  };

  constexpr int kGrid = 4;
  constexpr int kMaxIter = 100;
  constexpr int kPolish = 4;
  std::array<int, 4> idx{};
  for (int start = 0; start < kGrid * kGrid * kGrid * kGrid; ++start) {
    int code = start;
    PhasePoint p;
    for (std::size_t c = 0; c < 4; ++c) {
      idx[c] = code % kGrid;
      code /= kGrid;
      const Interval& iv = box.ranges[c];
      p[kAllCoords[c]] = iv.lo + (iv.hi - iv.lo) * (idx[c] + 0.5) / kGrid;
    }
    const auto r0 = residual(p);
    if (!r0) continue;
    Eigen::Vector3d r = *r0;
    for (int it = 0; it < kMaxIter && r.cwiseAbs().maxCoeff() > tol; ++it) {
      if (!newton_step(p, r)) break;
    }
    if (r.cwiseAbs().maxCoeff() <= tol) {
      // Quadratic convergence makes a few more steps nearly free.
      for (int it = 0; it < kPolish && newton_step(p, r); ++it) {
      }
      return p;
    }
  }
  throw NoSolution("no phase point matches the requested levels");
}

}  // namespace superfact
