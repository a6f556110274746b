#pragma once

// The three Hamiltonian families, their parameters, domain guards and the
// quadratic integrals that separate them.

#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "superfact/phase_core.hpp"

namespace superfact {

enum class Family { euclidean, sphere, ttw };

std::string_view family_name(Family f);
Family parse_family(std::string_view name);

/// Rational anisotropy γ = m/n kept as a reduced integer pair.
class RationalGamma {
 public:
  RationalGamma(int m, int n);

  /// Accepts "m/n" or a bare integer "m" (read as m/1).
  static RationalGamma parse(std::string_view text);

  int m() const { return m_; }
  int n() const { return n_; }
  double value() const { return static_cast<double>(m_) / static_cast<double>(n_); }
  std::string to_string() const;

  friend bool operator==(const RationalGamma&, const RationalGamma&) = default;

 private:
  int m_;
  int n_;
};

/// Immutable description of one system: family, ω, γ and (TTW only) α, β.
/// The sphere has unit radius.
class SystemSpec {
 public:
  static SystemSpec euclidean(double omega, RationalGamma gamma);
  static SystemSpec sphere(double omega, RationalGamma gamma);
  static SystemSpec ttw(double omega, RationalGamma gamma, double alpha, double beta);

  Family family() const { return family_; }
  double omega() const { return omega_; }
  const RationalGamma& gamma() const { return gamma_; }
  std::optional<double> alpha() const { return alpha_; }
  std::optional<double> beta() const { return beta_; }
  std::string describe() const;

  friend bool operator==(const SystemSpec&, const SystemSpec&) = default;

 private:
  SystemSpec(Family family, double omega, RationalGamma gamma, std::optional<double> alpha,
             std::optional<double> beta);

  Family family_;
  double omega_;
  RationalGamma gamma_;
  std::optional<double> alpha_;
  std::optional<double> beta_;
};

/// Distance kept from singular surfaces when sampling and integrating.
inline constexpr double kDefaultMargin = 0.05;
/// Smallest second-integral value accepted under a square root.
inline constexpr double kPositivityFloor = 1e-8;

struct DomainVerdict {
  bool valid = true;
  std::string violated;  // empty when valid

  explicit operator bool() const { return valid; }
};

/// Validity of an internal-coordinate point, keeping `margin` away from
/// every singular surface. Total: never throws.
DomainVerdict domain_check(const SystemSpec& spec, const PhasePoint& p,
                           double margin = kDefaultMargin);

struct Interval {
  double lo;
  double hi;
  bool contains(double v) const { return v > lo && v < hi; }
};

/// Open per-coordinate sampling intervals (q1, q2, p1, p2) lying inside the
/// valid region shrunk by `margin`.
struct DomainBox {
  std::array<Interval, 4> ranges;
  double margin = kDefaultMargin;

  bool contains(const PhasePoint& p) const;
};

/// Full valid region minus the margin, with coordinates and momenta of
/// Euclidean and TTW radial sectors capped to |·| < 2 (r < 3).
DomainBox default_box(const SystemSpec& spec, double margin = kDefaultMargin);

/// External (x, y, p_x, p_y) or (r, φ, p_r, p_φ) to internal coordinates
/// (ξ, y, p_ξ, p_y) or (r, θ, p_r, p_θ) via ξ = γx, p_ξ = p_x/γ (θ = γφ).
PhasePoint to_internal(const SystemSpec& spec, const PhasePoint& external);
PhasePoint to_external(const SystemSpec& spec, const PhasePoint& internal);

double hamiltonian(const SystemSpec& spec, const PhasePoint& p);
/// H^ξ for the oscillators, H_θ for TTW.
double second_integral(const SystemSpec& spec, const PhasePoint& p);
/// ℰ = √(2H^ξ) on the sphere, ℰ = √H_θ for TTW.
double epsilon(const SystemSpec& spec, const PhasePoint& p);
/// H^y = p_y²/2 + ω²y²/2 (Euclidean only).
double y_sector_integral(const SystemSpec& spec, const PhasePoint& p);

/// Both closed forms of the γ = 1 sphere potential shape:
/// tan²x/cos²y + tan²y and (1 − cos²x cos²y)/(cos²x cos²y).
std::pair<double, double> higgs_potential_identity(double x, double y);

/// Geodesic polar coordinates (r, φ) of a sphere point given in geodesic
/// parallel coordinates (x, y). Output conversion only.
struct GeodesicPolar {
  double r;
  double phi;
};
GeodesicPolar geodesic_polar(double x, double y);

// Observables of the same quantities, for brackets and Jacobians.
Observable hamiltonian_observable(const SystemSpec& spec);
Observable second_integral_observable(const SystemSpec& spec);
Observable epsilon_observable(const SystemSpec& spec);
Observable y_sector_observable(const SystemSpec& spec);

/// Transport an internal-coordinate observable to external coordinates
/// (f ∘ T with T = to_internal).
Observable pullback_to_external(const SystemSpec& spec, const Observable& f);

namespace detail {

/// Plain numbers the formula templates read.
struct Params {
  Family family;
  double omega;
  double gamma;
  int m;
  int n;
  double alpha;
  double beta;
};

Params params_of(const SystemSpec& spec);

/// Throws DomainError when the base point sits on a singular surface.
void guard(const Params& k, const PhasePoint& p);

template <class S>
S hamiltonian_expr(const Params& k, const State<S>& s) {
  guard(k, real_point(s));
  const double w2 = k.omega * k.omega;
  const double g2 = k.gamma * k.gamma;
  const auto& [a, b, pa, pb] = s;
  switch (k.family) {
    case Family::euclidean:
      return 0.5 * (g2 * pa * pa + pb * pb) + 0.5 * w2 * (a * a + b * b);
    case Family::sphere: {
      const S cy = cos(b);
      const S tx = tan(a);
      const S ty = tan(b);
      return 0.5 * (g2 * pa * pa / (cy * cy) + pb * pb) + 0.5 * w2 * (tx * tx / (cy * cy) + ty * ty);
    }
    case Family::ttw: {
      const S c = cos(b);
      const S sn = sin(b);
      const S angular = g2 * pb * pb + g2 * k.alpha * k.alpha / (c * c) +
                        g2 * k.beta * k.beta / (sn * sn);
      return pa * pa + w2 * a * a + angular / (a * a);
    }
  }
  return S(0.0);
}

template <class S>
S second_integral_expr(const Params& k, const State<S>& s) {
  guard(k, real_point(s));
  const double w2 = k.omega * k.omega;
  const double g2 = k.gamma * k.gamma;
  const auto& [a, b, pa, pb] = s;
  switch (k.family) {
    case Family::euclidean:
      return 0.5 * pa * pa + w2 / (2.0 * g2) * a * a;
    case Family::sphere: {
      const S c = cos(a);
      return 0.5 * pa * pa + w2 / (2.0 * g2) / (c * c);
    }
    case Family::ttw: {
      const S c = cos(b);
      const S sn = sin(b);
      return pb * pb + k.alpha * k.alpha / (c * c) + k.beta * k.beta / (sn * sn);
    }
  }
  return S(0.0);
}

template <class S>
S epsilon_expr(const Params& k, const State<S>& s) {
  const S second = second_integral_expr(k, s);
  if (!(base_value(second).real() > kPositivityFloor)) {
    throw PositivityError("second integral below positivity floor");
  }
  switch (k.family) {
    case Family::sphere: return positive_sqrt(2.0 * second);
    case Family::ttw: return positive_sqrt(second);
    case Family::euclidean: break;
  }
  throw UnsupportedError("epsilon is not defined for the Euclidean oscillator");
}

template <class S>
S y_sector_expr(const Params& k, const State<S>& s) {
  if (k.family != Family::euclidean) {
    throw UnsupportedError("H^y is defined for the Euclidean oscillator only");
  }
  const auto& b = s[1];
  const auto& pb = s[3];
  return 0.5 * pb * pb + 0.5 * k.omega * k.omega * b * b;
}

}  // namespace detail

}  // namespace superfact
