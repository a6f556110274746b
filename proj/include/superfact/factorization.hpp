#pragma once

// Ladder functions B±, shift functions A± and the higher-order integrals
// X± = (B±)ⁿ(A±)ᵐ built from them for rational γ = m/n.

#include "superfact/systems.hpp"

namespace superfact {

enum class Branch { plus, minus };

inline double sign_of(Branch b) { return b == Branch::plus ? 1.0 : -1.0; }
inline Branch opposite(Branch b) { return b == Branch::plus ? Branch::minus : Branch::plus; }

/// A conjugate pair of factor functions and the constant λ completing the
/// factorization (point-dependent when it involves ℰ).
struct FactorValue {
  Complex plus;
  Complex minus;
  double lambda = 0.0;
};

struct IntegralPair {
  Complex x_plus;
  Complex x_minus;
  double x_real = 0.0;  // (X⁺ + X⁻)/2
  double y_real = 0.0;  // (X⁺ − X⁻)/(2i)
};

/// TTW radial factors: the two mixed ladder-shift pairs and the pure shift
/// pair A⁺ = A₁⁺A₂⁻, A⁻ = A₁⁻A₂⁺.
struct TtwShifts {
  FactorValue a1;
  FactorValue a2;
  FactorValue pure;
};

FactorValue ladder(const SystemSpec& spec, const PhasePoint& p);
/// Euclidean and sphere only; TTW uses shift_ttw.
FactorValue shift(const SystemSpec& spec, const PhasePoint& p);
TtwShifts shift_ttw(const SystemSpec& spec, const PhasePoint& p);
IntegralPair higher_integral(const SystemSpec& spec, const PhasePoint& p);

/// Sphere only: h^ξ = cos²ξ (p_ξ²/2 − H^ξ), identically −ω²/(2γ²).
double sphere_h_xi(const SystemSpec& spec, const PhasePoint& p);

// Observable forms. ℰ enters as the full phase-space function, never frozen.
Observable ladder_observable(const SystemSpec& spec, Branch b);
Observable ladder_lambda_observable(const SystemSpec& spec);
/// A± for Euclidean/sphere; the pure shift pair for TTW.
Observable shift_observable(const SystemSpec& spec, Branch b);
/// λ_A (Euclidean/sphere only).
Observable shift_lambda_observable(const SystemSpec& spec);
/// TTW mixed shift A₁± (kind = 1) or A₂± (kind = 2).
Observable ttw_mixed_shift_observable(const SystemSpec& spec, int kind, Branch b);
Observable ttw_mixed_lambda_observable(const SystemSpec& spec, int kind);
Observable sphere_h_xi_observable(const SystemSpec& spec);
Observable higher_integral_observable(const SystemSpec& spec, Branch b);
Observable integral_x_observable(const SystemSpec& spec);
Observable integral_y_observable(const SystemSpec& spec);

namespace detail {

inline const Complex kI{0.0, 1.0};

template <class S>
S ladder_expr(const Params& k, const State<S>& s, Branch br) {
  const double sg = sign_of(br);
  const auto& [a, b, pa, pb] = s;
  switch (k.family) {
    case Family::euclidean:
      return (-sg * kI / std::sqrt(2.0)) * pa + (k.omega / (k.gamma * std::sqrt(2.0))) * a;
    case Family::sphere: {
      const S root = positive_sqrt(second_integral_expr(k, s));
      return (-sg * kI / std::sqrt(2.0)) * cos(a) * pa + root * sin(a);
    }
    case Family::ttw: {
      const S root = epsilon_expr(k, s);
      const double split = k.beta * k.beta - k.alpha * k.alpha;
      return (sg * kI) * sin(2.0 * b) * pb + root * cos(2.0 * b) + split / root;
    }
  }
  return S(0.0);
}

template <class S>
S ladder_lambda_expr(const Params& k, const State<S>& s) {
  switch (k.family) {
    case Family::euclidean: return S(0.0);
    case Family::sphere: return -second_integral_expr(k, s);
    case Family::ttw: break;
  }
  throw UnsupportedError("TTW ladder functions factorize through a product identity, not a constant");
}

template <class S>
S mixed_shift_expr(const Params& k, const State<S>& s, int kind, Branch br) {
  if (k.family != Family::ttw) {
    throw UnsupportedError("mixed shift functions exist for the TTW system only");
  }
  const double sg = sign_of(br);
  const S& r = s[0];
  const S& pr = s[2];
  const S centrifugal = k.gamma * epsilon_expr(k, s) / r;
  const S base = (-sg * kI) * pr + k.omega * r;
  return kind == 1 ? base - centrifugal : base + centrifugal;
}

template <class S>
S shift_expr(const Params& k, const State<S>& s, Branch br) {
  const double sg = sign_of(br);
  const S& b = s[1];
  const S& pb = s[3];
  switch (k.family) {
    case Family::euclidean:
      return (-sg * kI / std::sqrt(2.0)) * pb - (k.omega / std::sqrt(2.0)) * b;
    case Family::sphere:
      return (-sg * kI / std::sqrt(2.0)) * pb - (k.gamma / std::sqrt(2.0)) * epsilon_expr(k, s) * tan(b);
    case Family::ttw:
      return mixed_shift_expr(k, s, 1, br) * mixed_shift_expr(k, s, 2, opposite(br));
  }
  return S(0.0);
}

template <class S>
S shift_lambda_expr(const Params& k, const State<S>& s) {
  switch (k.family) {
    case Family::euclidean: return S(0.0);
    case Family::sphere: {
      const S e = epsilon_expr(k, s);
      return 0.5 * (k.gamma * k.gamma * e * e - k.omega * k.omega);
    }
    case Family::ttw: break;
  }
  throw UnsupportedError("TTW shift constants belong to the mixed pairs");
}

template <class S>
S mixed_lambda_expr(const Params& k, const State<S>& s, int kind) {
  if (k.family != Family::ttw) {
    throw UnsupportedError("mixed shift functions exist for the TTW system only");
  }
  const S v = 2.0 * k.omega * k.gamma * epsilon_expr(k, s);
  return kind == 1 ? v : -v;
}

template <class S>
S h_xi_expr(const Params& k, const State<S>& s) {
  if (k.family != Family::sphere) {
    throw UnsupportedError("h^xi is defined on the sphere only");
  }
  const S c = cos(s[0]);
  return c * c * (0.5 * s[2] * s[2] - second_integral_expr(k, s));
}

/// X± = (B±)ⁿ (A^σ)ᵐ. The shift branch σ is ± for the oscillators and ∓ for
/// TTW, where the pure shift rotates in the same sense as the ladder.
template <class S>
S higher_integral_expr(const Params& k, const State<S>& s, Branch br) {
  const Branch shift_branch = k.family == Family::ttw ? opposite(br) : br;
  return ipow(ladder_expr(k, s, br), k.n) * ipow(shift_expr(k, s, shift_branch), k.m);
}

}  // namespace detail

}  // namespace superfact
