#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "balldyn/semimodel.hpp"

namespace balldyn {

enum class Tri { No, Yes, Unknown };
std::string to_string(Tri t);

// The three ways a commuting hyperbolic/parabolic pair can be ruled out.
enum class Clause {
  HyperbolicFullType = 1,    // hyperbolic member of type equal to the dimension
  ParabolicTypeZero = 2,     // parabolic member of type 0
  ParabolicTypeOneStep = 3,  // parabolic member of type 1 with a positive 1-step
};
std::string to_string(Clause c);

// What the rule engine needs to know about one map.
struct MapProfile {
  ClassKind kind = ClassKind::Unknown;
  std::optional<int> type;
  int ambient_dim = 1;
  Tri step_positive = Tri::Unknown;  // s_1(x0) > 0 for some x0
};

enum class VerdictKind { Consistent, Inconsistent, Unknown };
std::string to_string(VerdictKind k);

struct PairVerdict {
  VerdictKind kind = VerdictKind::Unknown;
  std::optional<Clause> clause;
  // The clashing profiles, hyperbolic member first.
  std::optional<MapProfile> hyperbolic;
  std::optional<MapProfile> parabolic;
  std::string reason;
};

// Symmetric in its arguments.
PairVerdict check_pair(const MapProfile& f, const MapProfile& g);

// Classification, type and step data of f as seen from the base point x.
MapProfile profile_map(const MapDescription& f, const DomainPoint& x,
                       const DynamicsParams& dyn = {}, const SemiModelParams& sm = {});

// f = ExampleHyperbolic{m, u}, g = ExampleParabolic{m, v, r}.
CommutingFamily counterexample(int m, int u, int v, double r);

struct DwVerdict {
  VerdictKind kind = VerdictKind::Unknown;
  std::vector<Classification> classes;
  std::vector<BoundaryPoint> points;  // distinct Denjoy-Wolff points
  std::optional<GeodesicRestriction> restriction;  // two-point case, member 0
  std::string reason;
};

DwVerdict common_dw_check(const CommutingFamily& F, const DynamicsParams& params = {});

// --- generators used by the property suites -----------------------------

// Ball automorphism conjugate through the Cayley transform to the normal form.
BallAutomorphism to_ball_automorphism(const SiegelHyperbolic& h);

struct NormalFormFamily {
  CommutingFamily family;
  std::vector<SiegelHyperbolic> forms;  // as constructed, before conjugation
  BallAutomorphism conjugator;
};

// k commuting hyperbolic automorphisms of B^q with dilations in [0.1, 0.6],
// member 0 attracted to the Cayley point at infinity and the others split at
// random between the two fixed points, conjugated by a random automorphism.
NormalFormFamily random_normal_form_family(int q, int k, std::mt19937_64& rng);

// Profiles violating the given clause, in random order.
std::pair<MapProfile, MapProfile> synthetic_violation(Clause c, std::mt19937_64& rng);

BallAutomorphism random_automorphism(int q, std::mt19937_64& rng, double radius = 0.8);

}  // namespace balldyn
