#include <doctest.h>

#include <numbers>

#include "oracles.hpp"
#include "superfact/errors.hpp"
#include "superfact/spec_json.hpp"
#include "superfact/systems.hpp"
#include "superfact/verification.hpp"

using namespace superfact;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<SystemSpec> all_families(RationalGamma g) {
  return {SystemSpec::euclidean(1.0, g), SystemSpec::sphere(1.0, g),
          SystemSpec::ttw(1.0, g, 1.0, 2.0)};
}

const std::vector<RationalGamma> kGammas{{1, 1}, {2, 1}, {1, 2}, {3, 2}, {2, 3}};

}  // namespace

TEST_CASE("RationalGamma is stored reduced and parsed strictly") {
  const RationalGamma g(4, 6);
  CHECK(g.m() == 2);
  CHECK(g.n() == 3);
  CHECK(RationalGamma::parse("3/2") == RationalGamma(3, 2));
  CHECK(RationalGamma::parse("2") == RationalGamma(2, 1));
  CHECK_THROWS_AS(RationalGamma(0, 1), ConfigError);
  CHECK_THROWS_AS(RationalGamma(1, -2), ConfigError);
  CHECK_THROWS_AS(RationalGamma::parse("1.5"), ConfigError);
  CHECK_THROWS_AS(RationalGamma::parse("1/"), ConfigError);
  CHECK_THROWS_AS(RationalGamma::parse("a/b"), ConfigError);
}

TEST_CASE("SystemSpec validates the family bounds") {
  CHECK_NOTHROW(SystemSpec::sphere(1.0, {1, 2}));
  CHECK_THROWS_AS(SystemSpec::sphere(1.0, {1, 3}), ConfigError);
  CHECK_NOTHROW(SystemSpec::ttw(1.0, {1, 4}, 1.0, 1.0));
  CHECK_THROWS_AS(SystemSpec::ttw(1.0, {1, 5}, 1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(SystemSpec::euclidean(0.0, {1, 1}), ConfigError);
  CHECK_THROWS_AS(SystemSpec::euclidean(-1.0, {1, 1}), ConfigError);
  CHECK_NOTHROW(SystemSpec::euclidean(0.5, {1, 7}));
}

TEST_CASE("spec JSON round trip and validation") {
  for (const auto& spec : all_families({3, 2})) {
    CHECK(spec_from_json(to_json(spec)) == spec);
  }
  const auto j = nlohmann::json::parse(R"({"family":"ttw","omega":1,"gamma":{"m":3,"n":2},"alpha":1,"beta":2})");
  CHECK(spec_from_json(j) == SystemSpec::ttw(1.0, {3, 2}, 1.0, 2.0));
  CHECK_THROWS_AS(spec_from_json(nlohmann::json::parse(R"({"family":"ttw","omega":1,"gamma":{"m":1,"n":1}})")),
                  ConfigError);
  CHECK_THROWS_AS(spec_from_json(nlohmann::json::parse(R"({"family":"sphere","omega":1,"gamma":{"m":1,"n":3}})")),
                  ConfigError);
  CHECK_THROWS_AS(spec_from_json(nlohmann::json::parse(R"({"family":"euclidean","omega":1,"gamma":{"m":1,"n":1},"alpha":1})")),
                  ConfigError);
  CHECK_THROWS_AS(spec_from_json(nlohmann::json::parse(R"({"family":"torus","omega":1,"gamma":{"m":1,"n":1}})")),
                  ConfigError);
  CHECK_THROWS_AS(spec_from_json(nlohmann::json::parse(R"({"family":"euclidean","omega":"1","gamma":{"m":1,"n":1}})")),
                  ConfigError);
}

TEST_CASE("to_internal examples") {
  const auto e = SystemSpec::euclidean(1.0, {2, 1});
  CHECK(to_internal(e, {0.5, 1, 2, 3}) == PhasePoint{1, 1, 1, 3});
  const auto t = SystemSpec::ttw(1.0, {3, 2}, 1.0, 1.0);
  const PhasePoint in = to_internal(t, {2, kPi / 6, 0, 3});
  CHECK(in.q1 == 2.0);
  CHECK(in.q2 == doctest::Approx(kPi / 4).epsilon(1e-15));
  CHECK(in.p2 == 2.0);
  for (const auto& spec : all_families({1, 1})) {
    const PhasePoint p{0.3, 0.4, -0.2, 0.7};
    CHECK(to_internal(spec, p) == p);
    CHECK(to_external(spec, p) == p);
  }
  // The sphere image must satisfy |xi| < pi/2.
  CHECK_THROWS_AS(to_internal(SystemSpec::sphere(1.0, {2, 1}), {1.0, 0, 0, 0}), DomainError);
}

TEST_CASE("to_internal and to_external are inverse") {
  const auto pts = oracle::uniform_points(5, 50, {{{0.2, 0.7}, {0.1, 0.6}, {-1, 1}, {-1, 1}}});
  for (const auto& g : kGammas) {
    for (const auto& spec : all_families(g)) {
      for (const auto& p : pts) {
        const PhasePoint back = to_external(spec, to_internal(spec, p));
        for (auto c : kAllCoords) {
          CHECK(back[c] == doctest::Approx(p[c]).epsilon(1e-15));
        }
      }
    }
  }
}

TEST_CASE("hamiltonian examples") {
  CHECK(hamiltonian(SystemSpec::euclidean(1.0, {2, 1}), {0, 0, 1, 1}) == doctest::Approx(2.5));
  CHECK(hamiltonian(SystemSpec::sphere(1.0, {1, 1}), {0, 0, 0, 0}) == 0.0);
  const auto t = SystemSpec::ttw(1.0, {1, 1}, 1.0, 1.0);
  CHECK(hamiltonian(t, {std::sqrt(2.0), kPi / 4, 0, 0}) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("hamiltonian agrees with the printed external forms") {
  const auto pts = oracle::uniform_points(8, 200, {{{0.15, 0.6}, {0.1, 1.2}, {-1.5, 1.5}, {-1.5, 1.5}}});
  for (const auto& g : kGammas) {
    const double gv = g.value();
    for (const auto& ext : pts) {
      const auto e = SystemSpec::euclidean(1.3, g);
      CHECK(hamiltonian(e, to_internal(e, ext)) ==
            doctest::Approx(oracle::euclid_h(1.3, gv, ext.q1, ext.q2, ext.p1, ext.p2)).epsilon(1e-13));
      const auto s = SystemSpec::sphere(0.8, g);
      if (std::abs(gv * ext.q1) < kPi / 2 - 0.05 && std::abs(ext.q2) < kPi / 2 - 0.05) {
        CHECK(hamiltonian(s, to_internal(s, ext)) ==
              doctest::Approx(oracle::sphere_h(0.8, gv, ext.q1, ext.q2, ext.p1, ext.p2)).epsilon(1e-12));
      }
      const auto t = SystemSpec::ttw(1.1, g, 0.7, 1.4);
      const PhasePoint polar{1.0 + ext.q2, ext.q1 / gv * 1.2, ext.p1, ext.p2};
      if (domain_check(t, to_internal(t, polar))) {
        CHECK(hamiltonian(t, to_internal(t, polar)) ==
              doctest::Approx(oracle::ttw_h(1.1, gv, 0.7, 1.4, polar.q1, polar.q2, polar.p1, polar.p2))
                  .epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("second_integral examples") {
  CHECK(second_integral(SystemSpec::euclidean(1.0, {2, 1}), {0, 0.3, 1, -2}) == 0.5);
  CHECK(second_integral(SystemSpec::sphere(1.0, {1, 1}), {0, 0.2, 0, 0.4}) == 0.5);
  const auto t = SystemSpec::ttw(1.0, {1, 1}, 1.0, 1.0);
  CHECK(second_integral(t, {1.7, kPi / 4, 0.3, 0}) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("epsilon examples") {
  CHECK(epsilon(SystemSpec::sphere(1.0, {1, 1}), {0, 0, 0, 0}) == 1.0);
  const auto t = SystemSpec::ttw(1.0, {1, 1}, 1.0, 1.0);
  CHECK(epsilon(t, {1.0, kPi / 4, 0, 0}) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(epsilon(SystemSpec::euclidean(1.0, {1, 1}), {0, 0, 0, 0}), UnsupportedError);
  // Sphere H^xi = p^2/2 + w^2/(2 g^2 cos^2 xi) never vanishes for w > 0; use
  // TTW with alpha = beta = 0 and p_theta = 0 to reach a zero second integral.
  const auto flat = SystemSpec::ttw(1.0, {1, 1}, 0.0, 0.0);
  CHECK_THROWS_AS(epsilon(flat, {1.0, 0.5, 0.2, 0.0}), DomainError);
  CHECK_THROWS_AS(epsilon(flat, {1.0, 0.5, 0.2, 0.0}), PositivityError);
}

TEST_CASE("domain_check examples") {
  const auto s = SystemSpec::sphere(1.0, {1, 1});
  const DomainVerdict v = domain_check(s, {kPi / 2, 0, 0, 0});
  CHECK_FALSE(v.valid);
  CHECK(v.violated.find("xi") != std::string::npos);
  CHECK(domain_check(SystemSpec::ttw(1.0, {1, 1}, 1, 1), {1.0, kPi / 4, 0, 0}).valid);
  CHECK(domain_check(SystemSpec::euclidean(1.0, {1, 1}), {1e6, -1e6, 3, 4}).valid);
  CHECK_FALSE(domain_check(SystemSpec::euclidean(1.0, {1, 1}), {std::nan(""), 0, 0, 0}).valid);
  CHECK_FALSE(domain_check(SystemSpec::ttw(1.0, {1, 1}, 1, 1), {0.04, 0.5, 0, 0}).valid);
  CHECK_FALSE(domain_check(SystemSpec::ttw(1.0, {1, 1}, 1, 1), {1.0, kPi / 2 - 0.01, 0, 0}).valid);
  CHECK(domain_check(SystemSpec::ttw(1.0, {1, 1}, 1, 1), {1.0, kPi / 2 - 0.01, 0, 0}, 0.0).valid);
}

TEST_CASE("singular evaluations raise DomainError") {
  CHECK_THROWS_AS(hamiltonian(SystemSpec::sphere(1.0, {1, 1}), {kPi / 2, 0, 0, 0}), DomainError);
  CHECK_THROWS_AS(hamiltonian(SystemSpec::ttw(1.0, {1, 1}, 1, 1), {0.0, 0.5, 0, 0}), DomainError);
  CHECK_THROWS_AS(second_integral(SystemSpec::ttw(1.0, {1, 1}, 1, 1), {1.0, 0.0, 0, 0}), DomainError);
}

TEST_CASE("higgs_potential_identity examples") {
  auto [l0, r0] = higgs_potential_identity(0.0, 0.0);
  CHECK(l0 == 0.0);
  CHECK(r0 == 0.0);
  auto [l1, r1] = higgs_potential_identity(0.4, 0.0);
  CHECK(l1 == doctest::Approx(std::tan(0.4) * std::tan(0.4)).epsilon(1e-15));
  CHECK(r1 == doctest::Approx(std::tan(0.4) * std::tan(0.4)).epsilon(1e-14));
  auto [l2, r2] = higgs_potential_identity(0.4, 0.3);
  CHECK(std::abs(l2 - r2) <= 1e-12 * (1.0 + std::abs(l2)));
  CHECK_THROWS_AS(higgs_potential_identity(kPi / 2, 0.0), DomainError);
}

TEST_CASE("Higgs potential equals tan^2 of the geodesic radius") {
  const auto pts = oracle::uniform_points(17, 500, {{{-1.5, 1.5}, {-1.5, 1.5}, {0, 1}, {0, 1}}});
  for (const auto& p : pts) {
    const auto [lhs, rhs] = higgs_potential_identity(p.q1, p.q2);
    const double r = geodesic_polar(p.q1, p.q2).r;
    CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(lhs)));
    CHECK(std::cos(r) == doctest::Approx(std::cos(p.q1) * std::cos(p.q2)).epsilon(1e-12));
    const double t = std::tan(r);
    CHECK(std::abs(t * t - lhs) <= 1e-9 * (1.0 + lhs));
  }
}

TEST_CASE("decompositions hold at random valid points") {
  for (const auto& g : kGammas) {
    for (const auto& spec : all_families(g)) {
      const auto pts = sample_points(spec, default_box(spec), 1000, 99);
      const double gv = g.value();
      const double w2 = spec.omega() * spec.omega();
      for (const auto& p : pts) {
        const double h = hamiltonian(spec, p);
        const double i2 = second_integral(spec, p);
        double rhs = 0.0;
        double tol = 0.0;
        switch (spec.family()) {
          case Family::euclidean:
            rhs = y_sector_integral(spec, p) + gv * gv * i2;
            tol = 1e-13 * std::max(1.0, std::abs(h));
            break;
          case Family::sphere: {
            const double c = std::cos(p.q2);
            rhs = 0.5 * p.p2 * p.p2 + gv * gv * i2 / (c * c) - 0.5 * w2;
            tol = 1e-12 * (1.0 + std::abs(h) + gv * gv * i2 / (c * c));
            break;
          }
          case Family::ttw:
            rhs = p.p1 * p.p1 + w2 * p.q1 * p.q1 + gv * gv * i2 / (p.q1 * p.q1);
            tol = 1e-12 * (1.0 + std::abs(h));
            break;
        }
        CHECK(std::abs(h - rhs) <= tol);
      }
    }
  }
}

TEST_CASE("to_internal is canonical") {
  for (const auto& g : kGammas) {
    for (const auto& spec : all_families(g)) {
      const Observable h = hamiltonian_observable(spec);
      const Observable i2 = second_integral_observable(spec);
      const Observable hx = pullback_to_external(spec, h);
      const Observable ix = pullback_to_external(spec, i2);
      const auto pts = sample_points(spec, default_box(spec), 200, 3);
      for (const auto& p : pts) {
        const PhasePoint ext = to_external(spec, p);
        const BracketValue internal = poisson_bracket_scaled(h, i2, p);
        const BracketValue external = poisson_bracket_scaled(hx, ix, ext);
        CHECK(std::abs(internal.value - external.value) <=
              1e-10 * (1.0 + std::max(internal.scale, external.scale)));
        // A non-commuting pair must map too.
        const Observable q = coordinate_observable(Coord::q1);
        const Complex a = poisson_bracket(h, q, p);
        const Complex b = poisson_bracket(hx, pullback_to_external(spec, q), ext);
        CHECK(std::abs(a - b) <= 1e-10 * (1.0 + std::abs(a)));
      }
    }
  }
}

TEST_CASE("H commutes with the second integral") {
  for (const auto& g : kGammas) {
    for (const auto& spec : all_families(g)) {
      const Observable h = hamiltonian_observable(spec);
      const Observable i2 = second_integral_observable(spec);
      for (const auto& p : sample_points(spec, default_box(spec), 1000, 5)) {
        const BracketValue b = poisson_bracket_scaled(h, i2, p);
        CHECK(std::abs(b.value) <= 1e-10 * (1.0 + b.scale));
      }
    }
  }
}

TEST_CASE("dual derivatives of the built-in observables match finite differences") {
  for (const auto& g : kGammas) {
    for (const auto& spec : all_families(g)) {
      std::vector<Observable> fs{hamiltonian_observable(spec), second_integral_observable(spec)};
      if (spec.family() != Family::euclidean) {
        fs.push_back(epsilon_observable(spec));
      }
      const DomainBox box = default_box(spec, 0.1);
      for (const auto& p : sample_points(spec, box, 1000, 77)) {
        for (const auto& f : fs) {
          for (auto c : kAllCoords) {
            const Complex exact = partial_derivative(f, p, c);
            const Complex fd = oracle::fd_partial(f, p, c);
            CHECK(std::abs(exact - fd) <= 1e-5 * (1.0 + std::abs(exact)));
          }
        }
      }
    }
  }
}

TEST_CASE("default_box stays inside the valid region") {
  for (const auto& spec : all_families({1, 2})) {
    const DomainBox box = default_box(spec);
    for (const auto& p : sample_points(spec, box, 1000, 1)) {
      CHECK(domain_check(spec, p, box.margin).valid);
    }
  }
  CHECK_THROWS_AS(default_box(SystemSpec::euclidean(1.0, {1, 1}), -0.1), PreconditionError);
}

TEST_CASE("geodesic polar coordinates") {
  const auto gp = geodesic_polar(0.0, 0.5);
  CHECK(gp.r == doctest::Approx(0.5));
  CHECK(gp.phi == doctest::Approx(kPi / 2));
  const auto gq = geodesic_polar(0.5, 0.0);
  CHECK(gq.r == doctest::Approx(0.5));
  CHECK(gq.phi == doctest::Approx(0.0));
}
