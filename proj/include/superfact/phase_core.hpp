#pragma once

// Phase-space points, observables and the canonical Poisson bracket.

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "superfact/dual.hpp"

namespace superfact {

/// Index of a canonical coordinate: positions first, then their momenta.
enum class Coord : std::size_t { q1 = 0, q2 = 1, p1 = 2, p2 = 3 };

inline constexpr std::array<Coord, 4> kAllCoords{Coord::q1, Coord::q2, Coord::p1, Coord::p2};

/// Point of a two-degree-of-freedom phase space. The meaning of the four
/// slots is fixed by the owning system: (x, y, p_x, p_y), (ξ, y, p_ξ, p_y)
/// or (r, θ, p_r, p_θ).
struct PhasePoint {
  double q1{};
  double q2{};
  double p1{};
  double p2{};

  double operator[](Coord c) const;
  double& operator[](Coord c);
  bool finite() const;
  std::array<double, 4> to_array() const { return {q1, q2, p1, p2}; }
  static PhasePoint from_array(const std::array<double, 4>& a) { return {a[0], a[1], a[2], a[3]}; }

  friend bool operator==(const PhasePoint&, const PhasePoint&) = default;
};

template <class S>
using State = std::array<S, 4>;

/// Lift a real point into scalar type S, optionally seeding one direction.
template <class S>
State<S> lift(const PhasePoint& p) {
  return {S(p.q1), S(p.q2), S(p.p1), S(p.p2)};
}

/// Real parts of the base values of a lifted state.
template <class S>
PhasePoint real_point(const State<S>& s) {
  return {base_value(s[0]).real(), base_value(s[1]).real(), base_value(s[2]).real(),
          base_value(s[3]).real()};
}

/// A pure scalar function on phase space, evaluable over the dual tower.
///
/// The first level (DualComplex) gives values and first derivatives. The
/// second level (DualComplex2) is available for observables built from
/// generic callables and is what brackets of brackets consume.
class Observable {
 public:
  using FirstOrder = std::function<DualComplex(const State<DualComplex>&)>;
  using SecondOrder = std::function<DualComplex2(const State<DualComplex2>&)>;

  Observable() = default;

  /// Wrap a generic callable `f(const State<S>&) -> S` for every scalar in the tower.
  template <class F>
    requires std::invocable<const F&, const State<DualComplex>&> &&
             std::invocable<const F&, const State<DualComplex2>&>
  Observable(std::string label, F f)
      : label_(std::move(label)),
        first_([f](const State<DualComplex>& s) { return DualComplex(f(s)); }),
        second_([f](const State<DualComplex2>& s) { return DualComplex2(f(s)); }) {}

  /// Observable with only a first-order evaluator (no nested derivatives).
  Observable(std::string label, FirstOrder first)
      : label_(std::move(label)), first_(std::move(first)) {}

  const std::string& label() const { return label_; }
  bool has_second_order() const { return static_cast<bool>(second_); }

  Complex operator()(const PhasePoint& p) const;
  DualComplex eval(const State<DualComplex>& s) const { return first_(s); }
  DualComplex2 eval(const State<DualComplex2>& s) const;

  Observable relabeled(std::string label) const;

  friend Observable operator+(const Observable& f, const Observable& g);
  friend Observable operator-(const Observable& f, const Observable& g);
  friend Observable operator*(const Observable& f, const Observable& g);
  friend Observable operator/(const Observable& f, const Observable& g);
  friend Observable operator-(const Observable& f);
  friend Observable operator*(const Complex& c, const Observable& f);
  friend Observable operator+(const Observable& f, const Complex& c);

 private:
  std::string label_;
  FirstOrder first_;
  SecondOrder second_;
};

/// Observable returning a fixed complex constant.
Observable constant_observable(Complex c, std::string label = {});

/// Observable returning one canonical coordinate.
Observable coordinate_observable(Coord c);

/// ∂f/∂c at p, exact to rounding via dual propagation.
Complex partial_derivative(const Observable& f, const PhasePoint& p, Coord which);

/// All four partials (∂/∂q1, ∂/∂q2, ∂/∂p1, ∂/∂p2).
std::array<Complex, 4> gradient(const Observable& f, const PhasePoint& p);

/// Bracket value together with the magnitude of its constituent products,
/// Σ_k |∂f/∂q_k ∂g/∂p_k| + |∂f/∂p_k ∂g/∂q_k|. The magnitude is the natural
/// scale against which rounding in the bracket should be judged.
struct BracketValue {
  Complex value;
  double scale = 0.0;
};

BracketValue poisson_bracket_scaled(const Observable& f, const Observable& g, const PhasePoint& p);

/// {f, g}(p) = Σ_k ∂f/∂q_k ∂g/∂p_k − ∂f/∂p_k ∂g/∂q_k.
Complex poisson_bracket(const Observable& f, const Observable& g, const PhasePoint& p);

/// {f, g} as an observable with first derivatives; requires f and g to carry
/// second-order evaluators.
Observable bracket_observable(const Observable& f, const Observable& g);

inline constexpr double kDefaultRankTolerance = 1e-8;

/// Numerical rank of the |fs|×4 Jacobian. Rows are normalised to unit length
/// before the singular value decomposition, so observables of very different
/// magnitude are compared by direction only; singular values below
/// tol × σ_max are treated as zero.
int jacobian_rank(std::span<const Observable> fs, const PhasePoint& p,
                  double tol = kDefaultRankTolerance);

}  // namespace superfact
