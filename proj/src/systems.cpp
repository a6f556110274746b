#include "superfact/systems.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace superfact {

std::string_view family_name(Family f) {
  switch (f) {
    case Family::euclidean: return "euclidean";
    case Family::sphere: return "sphere";
    case Family::ttw: return "ttw";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  if (name == "euclidean") return Family::euclidean;
  if (name == "sphere") return Family::sphere;
  if (name == "ttw") return Family::ttw;
  throw ConfigError("unknown system family '" + std::string(name) + "'");
}

RationalGamma::RationalGamma(int m, int n) {
  if (m < 1 || n < 1) {
    throw ConfigError("gamma = m/n needs positive integers m, n");
  }
  const int g = std::gcd(m, n);
  m_ = m / g;
  n_ = n / g;
}

RationalGamma RationalGamma::parse(std::string_view text) {
  auto parse_int = [&](std::string_view part) {
    int v = 0;
    const auto* end = part.data() + part.size();
    auto [ptr, ec] = std::from_chars(part.data(), end, v);
    if (ec != std::errc() || ptr != end || part.empty()) {
      throw ConfigError("gamma must be written m/n with integers, got '" + std::string(text) + "'");
    }
    return v;
  };
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    return {parse_int(text), 1};
  }
  return {parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1))};
}

std::string RationalGamma::to_string() const {
  return std::to_string(m_) + "/" + std::to_string(n_);
}

SystemSpec::SystemSpec(Family family, double omega, RationalGamma gamma,
                       std::optional<double> alpha, std::optional<double> beta)
    : family_(family), omega_(omega), gamma_(gamma), alpha_(alpha), beta_(beta) {
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw ConfigError("omega must be a positive finite number");
  }
  const bool ttw = family == Family::ttw;
  if (ttw != (alpha.has_value() && beta.has_value()) || ttw != (alpha.has_value() || beta.has_value())) {
    throw ConfigError("alpha and beta are required for ttw and not accepted otherwise");
  }
  if (ttw && (!std::isfinite(*alpha) || !std::isfinite(*beta))) {
    throw ConfigError("alpha and beta must be finite");
  }
  // Compare in integers: 2m >= n and 4m >= n.
  if (family == Family::sphere && 2 * gamma.m() < gamma.n()) {
    throw ConfigError("sphere oscillator needs gamma >= 1/2, got " + gamma.to_string());
  }
  if (ttw && 4 * gamma.m() < gamma.n()) {
    throw ConfigError("ttw system needs gamma >= 1/4, got " + gamma.to_string());
  }
}

SystemSpec SystemSpec::euclidean(double omega, RationalGamma gamma) {
  return {Family::euclidean, omega, gamma, std::nullopt, std::nullopt};
}

SystemSpec SystemSpec::sphere(double omega, RationalGamma gamma) {
  return {Family::sphere, omega, gamma, std::nullopt, std::nullopt};
}

SystemSpec SystemSpec::ttw(double omega, RationalGamma gamma, double alpha, double beta) {
  return {Family::ttw, omega, gamma, alpha, beta};
}

std::string SystemSpec::describe() const {
  std::ostringstream os;
  os << family_name(family_) << "(omega=" << omega_ << ", gamma=" << gamma_.to_string();
  if (alpha_) {
    os << ", alpha=" << *alpha_ << ", beta=" << *beta_;
  }
  os << ")";
  return os.str();
}

namespace detail {

Params params_of(const SystemSpec& spec) {
  return {spec.family(),       spec.omega(),        spec.gamma().value(), spec.gamma().m(),
          spec.gamma().n(),    spec.alpha().value_or(0.0), spec.beta().value_or(0.0)};
}

void guard(const Params& k, const PhasePoint& p) {
  const Family f = k.family;
  // Re-use the verdict logic with zero margin: only true singularities throw.
  constexpr double half_pi = std::numbers::pi / 2.0;
  if (!p.finite()) {
    throw DomainError("non-finite phase point");
  }
  if (f == Family::sphere && !(std::abs(p.q1) < half_pi && std::abs(p.q2) < half_pi)) {
    throw DomainError("sphere coordinates outside |xi|, |y| < pi/2");
  }
  if (f == Family::ttw && !(p.q1 > 0.0 && p.q2 > 0.0 && p.q2 < half_pi)) {
    throw DomainError("ttw coordinates outside r > 0, 0 < theta < pi/2");
  }
}

}  // namespace detail

DomainVerdict domain_check(const SystemSpec& spec, const PhasePoint& p, double margin) {
  constexpr double half_pi = std::numbers::pi / 2.0;
  if (!p.finite()) {
    return {false, "all coordinates finite"};
  }
  switch (spec.family()) {
    case Family::euclidean:
      return {};
    case Family::sphere:
      if (!(std::abs(p.q1) < half_pi - margin)) return {false, "|xi| < pi/2 - margin"};
      if (!(std::abs(p.q2) < half_pi - margin)) return {false, "|y| < pi/2 - margin"};
      return {};
    case Family::ttw:
      if (!(p.q1 > margin)) return {false, "r > margin"};
      if (!(p.q2 > margin)) return {false, "theta > margin"};
      if (!(p.q2 < half_pi - margin)) return {false, "theta < pi/2 - margin"};
      return {};
  }
  return {false, "unknown family"};
}

bool DomainBox::contains(const PhasePoint& p) const {
  const auto a = p.to_array();
  for (std::size_t i = 0; i < 4; ++i) {
    if (!ranges[i].contains(a[i])) {
      return false;
    }
  }
  return true;
}

DomainBox default_box(const SystemSpec& spec, double margin) {
  if (!(margin >= 0.0)) {
    throw PreconditionError("margin must be non-negative");
  }
  constexpr double half_pi = std::numbers::pi / 2.0;
  const Interval momentum{-2.0, 2.0};
  switch (spec.family()) {
    case Family::euclidean:
      return {{Interval{-2.0, 2.0}, Interval{-2.0, 2.0}, momentum, momentum}, margin};
    case Family::sphere: {
      const Interval angle{-half_pi + margin, half_pi - margin};
      return {{angle, angle, momentum, momentum}, margin};
    }
    case Family::ttw:
      return {{Interval{margin, 3.0}, Interval{margin, half_pi - margin}, momentum, momentum},
              margin};
  }
  throw PreconditionError("unknown family");
}

PhasePoint to_internal(const SystemSpec& spec, const PhasePoint& external) {
  const double g = spec.gamma().value();
  PhasePoint out = external;
  if (spec.family() == Family::ttw) {
    out.q2 = g * external.q2;
    out.p2 = external.p2 / g;
  } else {
    out.q1 = g * external.q1;
    out.p1 = external.p1 / g;
  }
  if (!domain_check(spec, out, 0.0)) {
    throw DomainError("point maps outside the internal domain: " +
                      domain_check(spec, out, 0.0).violated);
  }
  return out;
}

PhasePoint to_external(const SystemSpec& spec, const PhasePoint& internal) {
  const double g = spec.gamma().value();
  PhasePoint out = internal;
  if (spec.family() == Family::ttw) {
    out.q2 = internal.q2 / g;
    out.p2 = g * internal.p2;
  } else {
    out.q1 = internal.q1 / g;
    out.p1 = g * internal.p1;
  }
  return out;
}

double hamiltonian(const SystemSpec& spec, const PhasePoint& p) {
  return detail::hamiltonian_expr(detail::params_of(spec), lift<double>(p));
}

double second_integral(const SystemSpec& spec, const PhasePoint& p) {
  return detail::second_integral_expr(detail::params_of(spec), lift<double>(p));
}

double epsilon(const SystemSpec& spec, const PhasePoint& p) {
  if (spec.family() == Family::euclidean) {
    throw UnsupportedError("epsilon is not defined for the Euclidean oscillator");
  }
  return detail::epsilon_expr(detail::params_of(spec), lift<double>(p));
}

double y_sector_integral(const SystemSpec& spec, const PhasePoint& p) {
  return detail::y_sector_expr(detail::params_of(spec), lift<double>(p));
}

std::pair<double, double> higgs_potential_identity(double x, double y) {
  const double cx = std::cos(x);
  const double cy = std::cos(y);
  constexpr double half_pi = std::numbers::pi / 2.0;
  if (!(std::abs(x) < half_pi && std::abs(y) < half_pi) || cx * cy <= 0.0) {
    throw DomainError("higgs identity needs |x|, |y| < pi/2");
  }
  const double tx = std::tan(x);
  const double ty = std::tan(y);
  const double lhs = tx * tx / (cy * cy) + ty * ty;
  const double c2 = cx * cx * cy * cy;
  const double rhs = (1.0 - c2) / c2;
  return {lhs, rhs};
}

GeodesicPolar geodesic_polar(double x, double y) {
  const double x0 = std::cos(x) * std::cos(y);
  const double x1 = std::sin(x) * std::cos(y);
  const double x2 = std::sin(y);
  const double r = std::atan2(std::hypot(x1, x2), x0);
  double phi = std::atan2(x2, x1);
  if (phi < 0.0) {
    phi += 2.0 * std::numbers::pi;
  }
  return {r, phi};
}

namespace {

template <class Expr>
Observable make_system_observable(std::string label, const SystemSpec& spec, Expr expr) {
  const detail::Params k = detail::params_of(spec);
  return {std::move(label), [k, expr]<class S>(const State<S>& s) { return expr(k, s); }};
}

}  // namespace

Observable hamiltonian_observable(const SystemSpec& spec) {
  return make_system_observable("H", spec, [](const auto& k, const auto& s) {
    return detail::hamiltonian_expr(k, s);
  });
}

Observable second_integral_observable(const SystemSpec& spec) {
  return make_system_observable(spec.family() == Family::ttw ? "H_theta" : "H_xi", spec,
                                [](const auto& k, const auto& s) {
                                  return detail::second_integral_expr(k, s);
                                });
}

Observable epsilon_observable(const SystemSpec& spec) {
  if (spec.family() == Family::euclidean) {
    throw UnsupportedError("epsilon is not defined for the Euclidean oscillator");
  }
  return make_system_observable("E", spec, [](const auto& k, const auto& s) {
    return detail::epsilon_expr(k, s);
  });
}

Observable y_sector_observable(const SystemSpec& spec) {
  if (spec.family() != Family::euclidean) {
    throw UnsupportedError("H^y is defined for the Euclidean oscillator only");
  }
  return make_system_observable("H_y", spec, [](const auto& k, const auto& s) {
    return detail::y_sector_expr(k, s);
  });
}

Observable pullback_to_external(const SystemSpec& spec, const Observable& f) {
  const double g = spec.gamma().value();
  const bool angular = spec.family() == Family::ttw;
  return {f.label() + "@external", [f, g, angular]<class S>(const State<S>& ext) {
            State<S> in = ext;
            if (angular) {
              in[1] = g * ext[1];
              in[3] = ext[3] / g;
            } else {
              in[0] = g * ext[0];
              in[2] = ext[2] / g;
            }
            return f.eval(in);
          }};
}

}  // namespace superfact
