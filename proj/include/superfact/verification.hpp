#pragma once

// Randomised certification of the bracket and factorization identities.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "superfact/factorization.hpp"

namespace superfact {

/// SplitMix64 used as a counter-based generator: the n-th output depends only
/// on (seed, n), so streams are identical on every platform.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : key_(seed) {}

  std::uint64_t next_u64();
  /// Uniform double in [0, 1) from the top 53 bits.
  double next_unit();
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

class SamplerExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Uniform rejection sampling in `box`; every returned point passes
/// domain_check(box.margin) and the positivity floor of the second integral.
std::vector<PhasePoint> sample_points(const SystemSpec& spec, const DomainBox& box,
                                      std::size_t count, std::uint64_t seed);

/// Evaluated side of an identity: a value and the magnitude against which
/// its rounding is judged (|value| for plain observables, the summed
/// product magnitudes for a bracket).
struct SideValue {
  Complex value;
  double scale = 0.0;
};

using Side = std::function<SideValue(const PhasePoint&)>;

Side side_of(const Observable& f);
Side bracket_side(const Observable& f, const Observable& g);
Side conj_side(const Observable& f);
Side real_part_side(const Observable& f);

/// Tolerance classes, loosest last.
namespace tolerance {
inline constexpr double polynomial = 1e-12;
inline constexpr double transcendental = 1e-10;  // one √ or tan
inline constexpr double chained = 1e-9;          // ℰ carried through a bracket
inline constexpr double high_order = 1e-8;       // {H, X±} with m + n ≥ 5
}  // namespace tolerance

/// Tolerance for {H, X±} = 0 at a given γ.
double symmetry_tolerance(const RationalGamma& gamma);

struct IdentitySpec {
  std::string label;
  Side lhs;
  Side rhs;
  double tolerance = tolerance::transcendental;
};

/// |lhs − rhs| / (1 + max(|lhs|, |rhs|, lhs.scale, rhs.scale)).
double relative_residual(const SideValue& lhs, const SideValue& rhs);

/// Every identity of the family: decompositions, commutation with the second
/// integral, factorizations, the ladder/shift bracket algebra, conjugacy,
/// realness of X and Y, and {H, X±} = 0.
std::vector<IdentitySpec> identity_suite(const SystemSpec& spec);

/// Only the {H, X±} = 0 identities.
std::vector<IdentitySpec> symmetry_suite(const SystemSpec& spec);

/// Same identity with its right-hand side negated.
IdentitySpec negate_rhs(const IdentitySpec& id);

struct IdentityResult {
  std::string label;
  std::size_t samples = 0;
  std::size_t failed_evaluations = 0;
  std::size_t violations = 0;  // points whose residual exceeds the tolerance
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  std::string first_error;
};

struct BracketReport {
  SystemSpec spec;
  std::uint64_t seed = 0;
  std::optional<DomainBox> box;
  std::vector<IdentityResult> identities;

  bool pass() const;
  const IdentityResult& at(std::string_view label) const;
};

BracketReport run_suite(const SystemSpec& spec, const std::vector<IdentitySpec>& suite,
                        const std::vector<PhasePoint>& points, std::uint64_t seed = 0,
                        std::optional<DomainBox> box = std::nullopt);

enum class ThirdIntegral { x, y };

struct IndependenceStats {
  std::string triple;
  std::size_t points = 0;
  std::size_t full_rank = 0;  // rank 3
  std::vector<std::size_t> rank_histogram;  // index = rank
  double fraction_full() const {
    return points == 0 ? 0.0 : static_cast<double>(full_rank) / static_cast<double>(points);
  }
};

/// Jacobian rank of (H, second integral, X or Y) at each point.
IndependenceStats independence_report(const SystemSpec& spec, const std::vector<PhasePoint>& points,
                                      ThirdIntegral which, double tol = kDefaultRankTolerance);

/// Rank statistics for an arbitrary list of observables.
IndependenceStats rank_statistics(std::string name, const std::vector<Observable>& fs,
                                  const std::vector<PhasePoint>& points,
                                  double tol = kDefaultRankTolerance);

nlohmann::json to_json(const DomainBox& box);
nlohmann::json to_json(const BracketReport& report);
nlohmann::json to_json(const IndependenceStats& stats);

}  // namespace superfact
