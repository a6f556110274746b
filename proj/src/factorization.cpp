#include "superfact/factorization.hpp"

#include <string>

namespace superfact {

namespace {

using detail::Params;

std::string branch_suffix(Branch b) { return b == Branch::plus ? "+" : "-"; }

template <class Expr>
Observable make_observable(std::string label, const SystemSpec& spec, Expr expr) {
  const Params k = detail::params_of(spec);
  return {std::move(label), [k, expr]<class S>(const State<S>& s) { return expr(k, s); }};
}

State<Complex> lifted(const SystemSpec& spec, const PhasePoint& p) {
  detail::guard(detail::params_of(spec), p);
  return lift<Complex>(p);
}

}  // namespace

FactorValue ladder(const SystemSpec& spec, const PhasePoint& p) {
  const Params k = detail::params_of(spec);
  const auto s = lifted(spec, p);
  FactorValue out;
  out.plus = detail::ladder_expr(k, s, Branch::plus);
  out.minus = detail::ladder_expr(k, s, Branch::minus);
  // TTW has no additive constant; its product identity is checked separately.
  out.lambda = spec.family() == Family::ttw ? 0.0 : detail::ladder_lambda_expr(k, s).real();
  return out;
}

FactorValue shift(const SystemSpec& spec, const PhasePoint& p) {
  if (spec.family() == Family::ttw) {
    throw UnsupportedError("use shift_ttw for the TTW system");
  }
  const Params k = detail::params_of(spec);
  const auto s = lifted(spec, p);
  return {detail::shift_expr(k, s, Branch::plus), detail::shift_expr(k, s, Branch::minus),
          detail::shift_lambda_expr(k, s).real()};
}

TtwShifts shift_ttw(const SystemSpec& spec, const PhasePoint& p) {
  if (spec.family() != Family::ttw) {
    throw UnsupportedError("shift_ttw needs the TTW system");
  }
  const Params k = detail::params_of(spec);
  const auto s = lifted(spec, p);
  TtwShifts out;
  for (int kind : {1, 2}) {
    FactorValue& f = kind == 1 ? out.a1 : out.a2;
    f.plus = detail::mixed_shift_expr(k, s, kind, Branch::plus);
    f.minus = detail::mixed_shift_expr(k, s, kind, Branch::minus);
    f.lambda = detail::mixed_lambda_expr(k, s, kind).real();
  }
  out.pure.plus = out.a1.plus * out.a2.minus;
  out.pure.minus = out.a1.minus * out.a2.plus;
  return out;
}

IntegralPair higher_integral(const SystemSpec& spec, const PhasePoint& p) {
  const Params k = detail::params_of(spec);
  const auto s = lifted(spec, p);
  IntegralPair out;
  out.x_plus = detail::higher_integral_expr(k, s, Branch::plus);
  out.x_minus = detail::higher_integral_expr(k, s, Branch::minus);
  out.x_real = (0.5 * (out.x_plus + out.x_minus)).real();
  out.y_real = ((out.x_plus - out.x_minus) / (2.0 * detail::kI)).real();
  return out;
}

double sphere_h_xi(const SystemSpec& spec, const PhasePoint& p) {
  return detail::h_xi_expr(detail::params_of(spec), lifted(spec, p)).real();
}

Observable ladder_observable(const SystemSpec& spec, Branch b) {
  return make_observable("B" + branch_suffix(b), spec,
                         [b](const auto& k, const auto& s) { return detail::ladder_expr(k, s, b); });
}

Observable ladder_lambda_observable(const SystemSpec& spec) {
  if (spec.family() == Family::ttw) {
    throw UnsupportedError("TTW ladder functions have no additive constant");
  }
  return make_observable("lambda_B", spec, [](const auto& k, const auto& s) {
    return detail::ladder_lambda_expr(k, s);
  });
}

Observable shift_observable(const SystemSpec& spec, Branch b) {
  return make_observable("A" + branch_suffix(b), spec,
                         [b](const auto& k, const auto& s) { return detail::shift_expr(k, s, b); });
}

Observable shift_lambda_observable(const SystemSpec& spec) {
  if (spec.family() == Family::ttw) {
    throw UnsupportedError("TTW shift constants belong to the mixed pairs");
  }
  return make_observable("lambda_A", spec, [](const auto& k, const auto& s) {
    return detail::shift_lambda_expr(k, s);
  });
}

Observable ttw_mixed_shift_observable(const SystemSpec& spec, int kind, Branch b) {
  if (spec.family() != Family::ttw || (kind != 1 && kind != 2)) {
    throw UnsupportedError("mixed shifts A1/A2 exist for the TTW system only");
  }
  return make_observable("A" + std::to_string(kind) + branch_suffix(b), spec,
                         [kind, b](const auto& k, const auto& s) {
                           return detail::mixed_shift_expr(k, s, kind, b);
                         });
}

Observable ttw_mixed_lambda_observable(const SystemSpec& spec, int kind) {
  if (spec.family() != Family::ttw || (kind != 1 && kind != 2)) {
    throw UnsupportedError("mixed shifts A1/A2 exist for the TTW system only");
  }
  return make_observable("lambda_" + std::to_string(kind) + "A", spec,
                         [kind](const auto& k, const auto& s) {
                           return detail::mixed_lambda_expr(k, s, kind);
                         });
}

Observable sphere_h_xi_observable(const SystemSpec& spec) {
  if (spec.family() != Family::sphere) {
    throw UnsupportedError("h^xi is defined on the sphere only");
  }
  return make_observable("h_xi", spec,
                         [](const auto& k, const auto& s) { return detail::h_xi_expr(k, s); });
}

Observable higher_integral_observable(const SystemSpec& spec, Branch b) {
  return make_observable("X" + branch_suffix(b), spec, [b](const auto& k, const auto& s) {
    return detail::higher_integral_expr(k, s, b);
  });
}

Observable integral_x_observable(const SystemSpec& spec) {
  return make_observable("X", spec, [](const auto& k, const auto& s) {
    return 0.5 * (detail::higher_integral_expr(k, s, Branch::plus) +
                  detail::higher_integral_expr(k, s, Branch::minus));
  });
}

Observable integral_y_observable(const SystemSpec& spec) {
  return make_observable("Y", spec, [](const auto& k, const auto& s) {
    return (detail::higher_integral_expr(k, s, Branch::plus) -
            detail::higher_integral_expr(k, s, Branch::minus)) /
           (2.0 * detail::kI);
  });
}

}  // namespace superfact
