#include "superfact/phase_core.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace superfact {

double PhasePoint::operator[](Coord c) const {
  switch (c) {
    case Coord::q1: return q1;
    case Coord::q2: return q2;
    case Coord::p1: return p1;
    case Coord::p2: return p2;
  }
  return q1;
}

double& PhasePoint::operator[](Coord c) {
  switch (c) {
    case Coord::q1: return q1;
    case Coord::q2: return q2;
    case Coord::p1: return p1;
    case Coord::p2: return p2;
  }
  return q1;
}

bool PhasePoint::finite() const {
  return std::isfinite(q1) && std::isfinite(q2) && std::isfinite(p1) && std::isfinite(p2);
}

Complex Observable::operator()(const PhasePoint& p) const {
  if (!p.finite()) {
    throw DomainError("non-finite phase point");
  }
  return first_(lift<DualComplex>(p)).value;
}

DualComplex2 Observable::eval(const State<DualComplex2>& s) const {
  if (!second_) {
    throw UnsupportedError("observable '" + label_ + "' has no second-order evaluator");
  }
  return second_(s);
}

Observable Observable::relabeled(std::string label) const {
  Observable out = *this;
  out.label_ = std::move(label);
  return out;
}

namespace {

// Combine two observables level by level; the second level is kept only when
// both operands provide it.
template <class Op>
Observable combine(const Observable& f, const Observable& g, std::string label, Op op) {
  Observable out(std::move(label), Observable::FirstOrder([f, g, op](const State<DualComplex>& s) {
                   return op(f.eval(s), g.eval(s));
                 }));
  if (f.has_second_order() && g.has_second_order()) {
    struct Both {
      Observable f, g;
      Op op;
      DualComplex operator()(const State<DualComplex>& s) const { return op(f.eval(s), g.eval(s)); }
      DualComplex2 operator()(const State<DualComplex2>& s) const {
        return op(f.eval(s), g.eval(s));
      }
    };
    out = Observable(out.label(), Both{f, g, op});
  }
  return out;
}

}  // namespace

Observable operator+(const Observable& f, const Observable& g) {
  return combine(f, g, "(" + f.label() + " + " + g.label() + ")",
                 [](const auto& a, const auto& b) { return a + b; });
}

Observable operator-(const Observable& f, const Observable& g) {
  return combine(f, g, "(" + f.label() + " - " + g.label() + ")",
                 [](const auto& a, const auto& b) { return a - b; });
}

Observable operator*(const Observable& f, const Observable& g) {
  return combine(f, g, f.label() + "*" + g.label(),
                 [](const auto& a, const auto& b) { return a * b; });
}

Observable operator/(const Observable& f, const Observable& g) {
  return combine(f, g, f.label() + "/" + g.label(),
                 [](const auto& a, const auto& b) { return a / b; });
}

Observable operator-(const Observable& f) {
  return Complex(-1.0, 0.0) * f;
}

Observable operator*(const Complex& c, const Observable& f) {
  return constant_observable(c) * f;
}

Observable operator+(const Observable& f, const Complex& c) {
  return f + constant_observable(c);
}

Observable constant_observable(Complex c, std::string label) {
  if (label.empty()) {
    label = c.imag() == 0.0 ? std::to_string(c.real())
                            : "(" + std::to_string(c.real()) + "+" + std::to_string(c.imag()) + "i)";
  }
  return {std::move(label), [c]<class S>(const State<S>&) { return S(c); }};
}

Observable coordinate_observable(Coord c) {
  static constexpr std::array<const char*, 4> kNames{"q1", "q2", "p1", "p2"};
  const auto idx = static_cast<std::size_t>(c);
  return {kNames[idx], [idx]<class S>(const State<S>& s) { return s[idx]; }};
}

Complex partial_derivative(const Observable& f, const PhasePoint& p, Coord which) {
  if (!p.finite()) {
    throw DomainError("non-finite phase point");
  }
  auto s = lift<DualComplex>(p);
  s[static_cast<std::size_t>(which)].deriv = Complex(1.0, 0.0);
  return f.eval(s).deriv;
}

std::array<Complex, 4> gradient(const Observable& f, const PhasePoint& p) {
  std::array<Complex, 4> g{};
  for (Coord c : kAllCoords) {
    g[static_cast<std::size_t>(c)] = partial_derivative(f, p, c);
  }
  return g;
}

BracketValue poisson_bracket_scaled(const Observable& f, const Observable& g, const PhasePoint& p) {
  const auto df = gradient(f, p);
  const auto dg = gradient(g, p);
  BracketValue out;
  for (std::size_t k = 0; k < 2; ++k) {
    const Complex a = df[k] * dg[k + 2];
    const Complex b = df[k + 2] * dg[k];
    out.value += a - b;
    out.scale += std::abs(a) + std::abs(b);
  }
  return out;
}

Complex poisson_bracket(const Observable& f, const Observable& g, const PhasePoint& p) {
  return poisson_bracket_scaled(f, g, p).value;
}

Observable bracket_observable(const Observable& f, const Observable& g) {
  if (!f.has_second_order() || !g.has_second_order()) {
    throw UnsupportedError("bracket_observable needs second-order evaluators");
  }
  auto first = [f, g](const State<DualComplex>& s) {
    // Outer dual level seeds coordinate k; the inner level carries the
    // caller's direction, so each partial comes back with its own derivative.
    std::array<DualComplex, 4> df{};
    std::array<DualComplex, 4> dg{};
    for (std::size_t k = 0; k < 4; ++k) {
      State<DualComplex2> x{};
      for (std::size_t j = 0; j < 4; ++j) {
        x[j] = DualComplex2(s[j], DualComplex(j == k ? 1.0 : 0.0));
      }
      df[k] = f.eval(x).deriv;
      dg[k] = g.eval(x).deriv;
    }
    return df[0] * dg[2] - df[2] * dg[0] + df[1] * dg[3] - df[3] * dg[1];
  };
  return {"{" + f.label() + "," + g.label() + "}", Observable::FirstOrder(first)};
}

int jacobian_rank(std::span<const Observable> fs, const PhasePoint& p, double tol) {
  if (fs.empty()) {
    return 0;
  }
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(fs.size()), 4);
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const auto g = gradient(fs[i], p);
    double norm = 0.0;
    double imag = 0.0;
    for (const auto& z : g) {
      norm += std::norm(z);
      imag = std::max(imag, std::abs(z.imag()));
    }
    norm = std::sqrt(norm);
    if (imag > tol * std::max(norm, 1.0)) {
      throw PreconditionError("jacobian_rank: observable '" + fs[i].label() + "' is not real");
    }
    for (std::size_t k = 0; k < 4; ++k) {
      jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          norm > 0.0 ? g[k].real() / norm : 0.0;
    }
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) {
    return 0;
  }
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol * sv(0)) {
      ++rank;
    }
  }
  return rank;
}

}  // namespace superfact
