#include "superfact/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace superfact {

std::uint64_t CounterRng::next_u64() {
  std::uint64_t z = key_ + (++counter_) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double CounterRng::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::vector<PhasePoint> sample_points(const SystemSpec& spec, const DomainBox& box,
                                      std::size_t count, std::uint64_t seed) {
  if (count == 0) {
    throw PreconditionError("sample count must be positive");
  }
  for (const auto& r : box.ranges) {
    if (!(r.lo < r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
      throw PreconditionError("sampling box intervals must be finite and non-empty");
    }
  }
  CounterRng rng(seed);
  const bool needs_positive = spec.family() != Family::euclidean;
  const std::size_t max_draws = 100 * count;
  std::vector<PhasePoint> out;
  out.reserve(count);
  for (std::size_t draw = 0; draw < max_draws && out.size() < count; ++draw) {
    std::array<double, 4> a{};
    for (std::size_t i = 0; i < 4; ++i) {
      const auto& r = box.ranges[i];
      a[i] = r.lo + (r.hi - r.lo) * rng.next_unit();
    }
    const PhasePoint p = PhasePoint::from_array(a);
    if (!box.contains(p) || !domain_check(spec, p, box.margin)) {
      continue;
    }
    if (needs_positive && !(second_integral(spec, p) > kPositivityFloor)) {
      continue;
    }
    out.push_back(p);
  }
  if (out.size() < count) {
    throw SamplerExhausted("accepted " + std::to_string(out.size()) + " of " +
                           std::to_string(count) + " points after " + std::to_string(max_draws) +
                           " draws");
  }
  return out;
}

Side side_of(const Observable& f) {
  return [f](const PhasePoint& p) {
    const Complex v = f(p);
    return SideValue{v, std::abs(v)};
  };
}

Side bracket_side(const Observable& f, const Observable& g) {
  return [f, g](const PhasePoint& p) {
    const BracketValue b = poisson_bracket_scaled(f, g, p);
    return SideValue{b.value, b.scale};
  };
}

Side conj_side(const Observable& f) {
  return [f](const PhasePoint& p) {
    const Complex v = std::conj(f(p));
    return SideValue{v, std::abs(v)};
  };
}

Side real_part_side(const Observable& f) {
  return [f](const PhasePoint& p) {
    const Complex v = f(p);
    return SideValue{Complex(v.real(), 0.0), std::abs(v)};
  };
}

double symmetry_tolerance(const RationalGamma& gamma) {
  return gamma.m() + gamma.n() >= 5 ? tolerance::high_order : tolerance::chained;
}

double relative_residual(const SideValue& lhs, const SideValue& rhs) {
  const double denom =
      1.0 + std::max({std::abs(lhs.value), std::abs(rhs.value), lhs.scale, rhs.scale});
  return std::abs(lhs.value - rhs.value) / denom;
}

IdentitySpec negate_rhs(const IdentitySpec& id) {
  Side rhs = id.rhs;
  return {id.label + ".negated",
          id.lhs,
          [rhs](const PhasePoint& p) {
            SideValue v = rhs(p);
            v.value = -v.value;
            return v;
          },
          id.tolerance};
}

namespace {

const Complex kI{0.0, 1.0};

Side zero_side() {
  return [](const PhasePoint&) { return SideValue{}; };
}

template <class Expr>
Observable system_observable(std::string label, const SystemSpec& spec, Expr expr) {
  const detail::Params k = detail::params_of(spec);
  return {std::move(label), [k, expr]<class S>(const State<S>& s) -> S { return expr(k, s); }};
}

const char* sign_name(Branch b) { return b == Branch::plus ? "+" : "-"; }

struct SuiteBuilder {
  std::string prefix;
  std::vector<IdentitySpec> ids;

  void add(const std::string& name, Side lhs, Side rhs, double tol) {
    ids.push_back({prefix + "." + name, std::move(lhs), std::move(rhs), tol});
  }
};

// Conjugacy of the factor pairs and the integrals, realness of X and Y, and
// {H, X±} = 0.
void add_integral_identities(SuiteBuilder& sb, const SystemSpec& spec, const Observable& h) {
  const Observable bp = ladder_observable(spec, Branch::plus);
  const Observable bm = ladder_observable(spec, Branch::minus);
  const Observable ap = shift_observable(spec, Branch::plus);
  const Observable am = shift_observable(spec, Branch::minus);
  const Observable xp = higher_integral_observable(spec, Branch::plus);
  const Observable xm = higher_integral_observable(spec, Branch::minus);
  const Observable x = integral_x_observable(spec);
  const Observable y = integral_y_observable(spec);
  sb.add("conj.B", side_of(bm), conj_side(bp), tolerance::polynomial);
  sb.add("conj.A", side_of(am), conj_side(ap), tolerance::polynomial);
  sb.add("conj.X", side_of(xm), conj_side(xp), tolerance::polynomial);
  sb.add("real.X", side_of(x), real_part_side(x), tolerance::polynomial);
  sb.add("real.Y", side_of(y), real_part_side(y), tolerance::polynomial);
  const double tol = symmetry_tolerance(spec.gamma());
  sb.add("symmetry.HX+", bracket_side(h, xp), zero_side(), tol);
  sb.add("symmetry.HX-", bracket_side(h, xm), zero_side(), tol);
  sb.add("symmetry.HX", bracket_side(h, x), zero_side(), tol);
  sb.add("symmetry.HY", bracket_side(h, y), zero_side(), tol);
}

std::vector<IdentitySpec> euclidean_suite(const SystemSpec& spec) {
  SuiteBuilder sb{"euclid", {}};
  const double w = spec.omega();
  const double g = spec.gamma().value();
  const Observable h = hamiltonian_observable(spec);
  const Observable hxi = second_integral_observable(spec);
  const Observable hy = y_sector_observable(spec);
  const Observable bp = ladder_observable(spec, Branch::plus);
  const Observable bm = ladder_observable(spec, Branch::minus);
  const Observable ap = shift_observable(spec, Branch::plus);
  const Observable am = shift_observable(spec, Branch::minus);
  const double tol = tolerance::polynomial;

  sb.add("decomposition", side_of(h), side_of(hy + Complex(g * g) * hxi), tol);
  sb.add("commute.HHxi", bracket_side(h, hxi), zero_side(), tol);
  sb.add("commute.HHy", bracket_side(h, hy), zero_side(), tol);
  sb.add("commute.HxiHy", bracket_side(hxi, hy), zero_side(), tol);
  sb.add("factor.Hxi", side_of(hxi), side_of(bp * bm), tol);
  sb.add("factor.Hy", side_of(hy), side_of(ap * am), tol);
  sb.add("factor.H", side_of(h), side_of(ap * am + Complex(g * g) * (bp * bm)), tol);
  for (Branch b : {Branch::plus, Branch::minus}) {
    const double s = sign_of(b);
    const Observable& bb = b == Branch::plus ? bp : bm;
    const Observable& ab = b == Branch::plus ? ap : am;
    const std::string sg = sign_name(b);
    sb.add("commpt20.HxiB" + sg, bracket_side(hxi, bb), side_of((-s * kI * w / g) * bb), tol);
    sb.add("commpt20.HyA" + sg, bracket_side(hy, ab), side_of((s * kI * w) * ab), tol);
    sb.add("commpt20.HB" + sg, bracket_side(h, bb), side_of((-s * kI * g * w) * bb), tol);
    sb.add("commpt20.HA" + sg, bracket_side(h, ab), side_of((s * kI * w) * ab), tol);
    sb.add("commpt20.HxiA" + sg, bracket_side(hxi, ab), zero_side(), tol);
    sb.add("commpt20.HyB" + sg, bracket_side(hy, bb), zero_side(), tol);
  }
  sb.add("commpt20.BmBp", bracket_side(bm, bp), side_of(constant_observable(-kI * w / g)), tol);
  sb.add("commpt20.AmAp", bracket_side(am, ap), side_of(constant_observable(kI * w)), tol);
  add_integral_identities(sb, spec, h);
  return std::move(sb.ids);
}

std::vector<IdentitySpec> sphere_suite(const SystemSpec& spec) {
  SuiteBuilder sb{"sphere", {}};
  const double w = spec.omega();
  const double g = spec.gamma().value();
  const Observable h = hamiltonian_observable(spec);
  const Observable hxi = second_integral_observable(spec);
  const Observable eps = epsilon_observable(spec);
  const Observable bp = ladder_observable(spec, Branch::plus);
  const Observable bm = ladder_observable(spec, Branch::minus);
  const Observable ap = shift_observable(spec, Branch::plus);
  const Observable am = shift_observable(spec, Branch::minus);
  const Observable lam_b = ladder_lambda_observable(spec);
  const Observable lam_a = shift_lambda_observable(spec);
  const Observable hxi_small = sphere_h_xi_observable(spec);
  // γℰ/cos²y, the rate shared by the shift brackets.
  const Observable rate = system_observable("gE/cos2y", spec, [](const auto& k, const auto& s) {
    const auto c = cos(s[1]);
    return k.gamma * detail::epsilon_expr(k, s) / (c * c);
  });
  const Observable decomposition =
      system_observable("decomposition", spec, [](const auto& k, const auto& s) {
        const auto c = cos(s[1]);
        return 0.5 * s[3] * s[3] + k.gamma * k.gamma * detail::second_integral_expr(k, s) / (c * c) -
               0.5 * k.omega * k.omega;
      });
  const Observable higgs_lhs = system_observable("higgs.lhs", spec, [](const auto&, const auto& s) {
    const auto tx = tan(s[0]);
    const auto ty = tan(s[1]);
    const auto cy = cos(s[1]);
    return tx * tx / (cy * cy) + ty * ty;
  });
  const Observable higgs_rhs = system_observable("higgs.rhs", spec, [](const auto&, const auto& s) {
    const auto cx = cos(s[0]);
    const auto cy = cos(s[1]);
    const auto c2 = cx * cx * cy * cy;
    return (1.0 - c2) / c2;
  });
  const double tt = tolerance::transcendental;
  const double tc = tolerance::chained;

  sb.add("decomposition", side_of(h), side_of(decomposition), tt);
  sb.add("higgs", side_of(higgs_lhs), side_of(higgs_rhs), tolerance::polynomial);
  sb.add("commute.HHxi", bracket_side(h, hxi), zero_side(), tt);
  sb.add("hxi.constant", side_of(hxi_small),
         side_of(constant_observable(Complex(-w * w / (2.0 * g * g)))), tt);
  sb.add("factor.hxi", side_of(hxi_small), side_of(bp * bm + lam_b), tt);
  sb.add("factor.H", side_of(h), side_of(ap * am + lam_a), tt);
  for (Branch b : {Branch::plus, Branch::minus}) {
    const double s = sign_of(b);
    const Observable& bb = b == Branch::plus ? bp : bm;
    const Observable& ab = b == Branch::plus ? ap : am;
    const std::string sg = sign_name(b);
    sb.add("commpt1.HxiB" + sg, bracket_side(hxi, bb), side_of((-s * kI) * (eps * bb)), tt);
    sb.add("commpt1.HB" + sg, bracket_side(h, bb),
           side_of((-s * kI * g) * (rate * bb)), tc);
    sb.add("commpt1.HA" + sg, bracket_side(h, ab), side_of((s * kI) * (rate * ab)), tc);
    sb.add("commpt1.HxiA" + sg, bracket_side(hxi, ab), zero_side(), tt);
  }
  sb.add("commpt1.BmBp", bracket_side(bm, bp), side_of(-kI * eps), tt);
  sb.add("commpt1.AmAp", bracket_side(am, ap), side_of(kI * rate), tc);
  add_integral_identities(sb, spec, h);
  return std::move(sb.ids);
}

std::vector<IdentitySpec> ttw_suite(const SystemSpec& spec) {
  SuiteBuilder sb{"ttw", {}};
  const double a2 = *spec.alpha() * *spec.alpha();
  const double b2 = *spec.beta() * *spec.beta();
  const double g = spec.gamma().value();
  const double w = spec.omega();
  const Observable h = hamiltonian_observable(spec);
  const Observable ht = second_integral_observable(spec);
  const Observable eps = epsilon_observable(spec);
  const Observable bp = ladder_observable(spec, Branch::plus);
  const Observable bm = ladder_observable(spec, Branch::minus);
  const Observable ap = shift_observable(spec, Branch::plus);
  const Observable am = shift_observable(spec, Branch::minus);
  // γℰ/r², the centrifugal rate.
  const Observable rate = system_observable("gE/r2", spec, [](const auto& k, const auto& s) {
    return k.gamma * detail::epsilon_expr(k, s) / (s[0] * s[0]);
  });
  const Observable decomposition =
      system_observable("decomposition", spec, [](const auto& k, const auto& s) {
        return s[2] * s[2] + k.omega * k.omega * s[0] * s[0] +
               k.gamma * k.gamma * detail::second_integral_expr(k, s) / (s[0] * s[0]);
      });
  const Observable product = system_observable("B+B-", spec, [a2, b2](const auto& k, const auto& s) {
    const auto v = detail::second_integral_expr(k, s);
    return v + (b2 - a2) * (b2 - a2) / v - 2.0 * (b2 + a2);
  });
  const Observable bmbp = system_observable("{B-,B+}", spec, [a2, b2](const auto& k, const auto& s) {
    const auto v = detail::second_integral_expr(k, s);
    return -4.0 * kI * detail::epsilon_expr(k, s) * (1.0 - (b2 - a2) * (b2 - a2) / (v * v));
  });
  const double tt = tolerance::transcendental;
  const double tc = tolerance::chained;

  sb.add("decomposition", side_of(h), side_of(decomposition), tt);
  sb.add("commute.HHtheta", bracket_side(h, ht), zero_side(), tt);
  sb.add("factor.B+B-", side_of(bp * bm), side_of(product), tt);
  for (int kind : {1, 2}) {
    const std::string tag = "A" + std::to_string(kind);
    const Observable kp = ttw_mixed_shift_observable(spec, kind, Branch::plus);
    const Observable km = ttw_mixed_shift_observable(spec, kind, Branch::minus);
    const Observable lam = ttw_mixed_lambda_observable(spec, kind);
    // ω ± γℰ/r²: plus for the first pair, minus for the second.
    const Observable freq = constant_observable(Complex(w)) + (kind == 1 ? rate : -rate);
    sb.add("factor.H" + tag, side_of(h), side_of(kp * km + lam), tt);
    for (Branch b : {Branch::plus, Branch::minus}) {
      const double s = sign_of(b);
      const Observable& kb = b == Branch::plus ? kp : km;
      sb.add("mixed.H" + tag + sign_name(b), bracket_side(h, kb),
             side_of((-2.0 * s * kI) * (freq * kb)), tc);
    }
    sb.add("mixed." + tag + "m" + tag + "p", bracket_side(km, kp), side_of(-2.0 * kI * freq), tc);
  }
  for (Branch b : {Branch::plus, Branch::minus}) {
    const double s = sign_of(b);
    const Observable& bb = b == Branch::plus ? bp : bm;
    const Observable& ab = b == Branch::plus ? ap : am;
    const std::string sg = sign_name(b);
    sb.add("hbb.HthetaB" + sg, bracket_side(ht, bb), side_of((-4.0 * s * kI) * (eps * bb)), tt);
    sb.add("hbb.HB" + sg, bracket_side(h, bb), side_of((-4.0 * s * kI * g) * (rate * bb)), tc);
    sb.add("pure.HA" + sg, bracket_side(h, ab), side_of((-4.0 * s * kI) * (rate * ab)), tc);
    sb.add("pure.HthetaA" + sg, bracket_side(ht, ab), zero_side(), tt);
  }
  sb.add("hbb.BmBp", bracket_side(bm, bp), side_of(bmbp), tt);
  sb.add("pure.AmAp", bracket_side(am, ap), side_of((-8.0 * kI) * (rate * h)), tc);
  add_integral_identities(sb, spec, h);
  return std::move(sb.ids);
}

}  // namespace

std::vector<IdentitySpec> identity_suite(const SystemSpec& spec) {
  switch (spec.family()) {
    case Family::euclidean: return euclidean_suite(spec);
    case Family::sphere: return sphere_suite(spec);
    case Family::ttw: return ttw_suite(spec);
  }
  return {};
}

std::vector<IdentitySpec> symmetry_suite(const SystemSpec& spec) {
  std::vector<IdentitySpec> out;
  for (auto& id : identity_suite(spec)) {
    if (id.label.find(".symmetry.") != std::string::npos) {
      out.push_back(std::move(id));
    }
  }
  return out;
}

bool BracketReport::pass() const {
  return std::all_of(identities.begin(), identities.end(),
                     [](const IdentityResult& r) { return r.pass; });
}

const IdentityResult& BracketReport::at(std::string_view label) const {
  for (const auto& r : identities) {
    if (r.label == label) {
      return r;
    }
  }
  throw std::out_of_range("no identity labelled '" + std::string(label) + "'");
}

BracketReport run_suite(const SystemSpec& spec, const std::vector<IdentitySpec>& suite,
                        const std::vector<PhasePoint>& points, std::uint64_t seed,
                        std::optional<DomainBox> box) {
  BracketReport report{spec, seed, box, {}};
  report.identities.reserve(suite.size());
  for (const auto& id : suite) {
    IdentityResult r;
    r.label = id.label;
    r.tolerance = id.tolerance;
    for (const auto& p : points) {
      ++r.samples;
      try {
        const double res = relative_residual(id.lhs(p), id.rhs(p));
        if (!std::isfinite(res)) {
          throw DomainError("non-finite residual");
        }
        r.max_residual = std::max(r.max_residual, res);
        if (res > id.tolerance) {
          ++r.violations;
        }
      } catch (const std::exception& e) {
        if (r.failed_evaluations++ == 0) {
          r.first_error = e.what();
        }
      }
    }
    r.pass = r.violations == 0 && r.failed_evaluations == 0;
    report.identities.push_back(std::move(r));
  }
  return report;
}

IndependenceStats rank_statistics(std::string name, const std::vector<Observable>& fs,
                                  const std::vector<PhasePoint>& points, double tol) {
  IndependenceStats st;
  st.triple = std::move(name);
  st.rank_histogram.assign(fs.size() + 1, 0);
  for (const auto& p : points) {
    const int rank = jacobian_rank(fs, p, tol);
    ++st.points;
    ++st.rank_histogram[static_cast<std::size_t>(rank)];
    if (rank == 3) {
      ++st.full_rank;
    }
  }
  return st;
}

IndependenceStats independence_report(const SystemSpec& spec, const std::vector<PhasePoint>& points,
                                      ThirdIntegral which, double tol) {
  const Observable third =
      which == ThirdIntegral::x ? integral_x_observable(spec) : integral_y_observable(spec);
  const std::vector<Observable> fs{hamiltonian_observable(spec), second_integral_observable(spec),
                                   third};
  const std::string name =
      std::string("H,") + fs[1].label() + (which == ThirdIntegral::x ? ",X" : ",Y");
  return rank_statistics(name, fs, points, tol);
}

nlohmann::json to_json(const DomainBox& box) {
  nlohmann::json ranges = nlohmann::json::array();
  for (const auto& r : box.ranges) {
    ranges.push_back({r.lo, r.hi});
  }
  return {{"ranges", ranges}, {"margin", box.margin}};
}

nlohmann::json to_json(const BracketReport& report) {
  nlohmann::json ids = nlohmann::json::array();
  for (const auto& r : report.identities) {
    nlohmann::json j{{"label", r.label},
                     {"samples", r.samples},
                     {"max_residual", r.max_residual},
                     {"tolerance", r.tolerance},
                     {"violations", r.violations},
                     {"failed_evaluations", r.failed_evaluations},
                     {"pass", r.pass}};
    if (!r.first_error.empty()) {
      j["first_error"] = r.first_error;
    }
    ids.push_back(std::move(j));
  }
  std::size_t failed = 0;
  for (const auto& r : report.identities) {
    failed += r.pass ? 0 : 1;
  }
  nlohmann::json out{{"spec", report.spec.describe()},
                     {"seed", report.seed},
                     {"identities", ids},
                     {"summary", {{"pass", report.pass()},
                                  {"identities", report.identities.size()},
                                  {"failed", failed}}}};
  out["box"] = report.box ? to_json(*report.box) : nlohmann::json();
  return out;
}

nlohmann::json to_json(const IndependenceStats& stats) {
  return {{"triple", stats.triple},
          {"points", stats.points},
          {"full_rank", stats.full_rank},
          {"fraction_full", stats.fraction_full()},
          {"rank_histogram", stats.rank_histogram}};
}

}  // namespace superfact
