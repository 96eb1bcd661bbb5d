#include "balldyn/obstruction.hpp"

#include <algorithm>
#include <cmath>

namespace balldyn {

std::string to_string(Tri t) {
  switch (t) {
    case Tri::No: return "no";
    case Tri::Yes: return "yes";
    default: return "unknown";
  }
}

std::string to_string(Clause c) {
  switch (c) {
    case Clause::HyperbolicFullType: return "hyperbolic_full_type";
    case Clause::ParabolicTypeZero: return "parabolic_type_zero";
    default: return "parabolic_type_one_positive_step";
  }
}

std::string to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::Consistent: return "consistent";
    case VerdictKind::Inconsistent: return "inconsistent";
    default: return "unknown";
  }
}

PairVerdict check_pair(const MapProfile& f, const MapProfile& g) {
  PairVerdict v;
  auto unknown = [&](std::string why) {
    v.kind = VerdictKind::Unknown;
    v.reason = std::move(why);
    return v;
  };
  if (f.ambient_dim != g.ambient_dim) throw InvalidArgument("check_pair: ambient dimensions differ");
  for (const auto* p : {&f, &g}) {
    if (p->kind == ClassKind::Elliptic)
      return unknown("elliptic member: the question is settled by its fixed-point set");
    if (p->kind == ClassKind::Unknown) return unknown("a member could not be classified");
  }
  if (f.kind == g.kind) {
    v.kind = VerdictKind::Consistent;
    v.reason = "both members " + to_string(f.kind);
    return v;
  }
  const MapProfile& h = f.kind == ClassKind::Hyperbolic ? f : g;
  const MapProfile& p = f.kind == ClassKind::Hyperbolic ? g : f;
  v.hyperbolic = h;
  v.parabolic = p;
  auto clash = [&](Clause c, std::string why) {
    v.kind = VerdictKind::Inconsistent;
    v.clause = c;
    v.reason = std::move(why);
    return v;
  };
  if (h.type && *h.type == h.ambient_dim)
    return clash(Clause::HyperbolicFullType,
                 "hyperbolic member has full type, so its partner cannot be parabolic");
  if (p.type && *p.type == 0)
    return clash(Clause::ParabolicTypeZero, "parabolic member of type 0 forces a parabolic partner");
  if (p.type && *p.type == 1 && p.step_positive == Tri::Yes)
    return clash(Clause::ParabolicTypeOneStep,
                 "parabolic member of type 1 with positive step forces a parabolic partner");
  if (!h.type) return unknown("type of the hyperbolic member is missing");
  if (!p.type) return unknown("type of the parabolic member is missing");
  if (*p.type == 1)
    return unknown(p.step_positive == Tri::No
                       ? "parabolic member of type 1 with zero step: open case"
                       : "parabolic member of type 1, step sign undetermined");
  v.kind = VerdictKind::Consistent;
  v.reason = "no clause applies";
  return v;
}

MapProfile profile_map(const MapDescription& f, const DomainPoint& x, const DynamicsParams& dyn,
                       const SemiModelParams& sm) {
  MapProfile out;
  out.ambient_dim = f.dim();
  Classification c = denjoy_wolff(f, x, dyn);
  out.kind = c.kind;
  CommutingFamily F = make_family({f});
  try {
    out.type = type_estimate(F, x, sm).d;
  } catch (const Error&) {
    out.type.reset();
  }
  LimitEstimate s = step(F, MultiIndex({1}), x, dyn.max_iter, dyn.tol, dyn.conv);
  if (s.lower > 1e-8) out.step_positive = Tri::Yes;
  else if (s.upper < 1e-8) out.step_positive = Tri::No;
  return out;
}

CommutingFamily counterexample(int m, int u, int v, double r) {
  if (!(u >= 1 && u <= m - 1)) throw InvalidArgument("counterexample: need 1 <= u <= m-1");
  if (!(v >= 2 && v <= m)) throw InvalidArgument("counterexample: need 2 <= v <= m");
  if (!(r != 0.0) || !std::isfinite(r)) throw InvalidArgument("counterexample: r must be nonzero");
  CommutingFamily F = make_family({ExampleHyperbolic{m, u}, ExampleParabolic{m, v, r}});
  if (F.certificate.kind != CertificateKind::Exact)
    throw InvariantViolation("counterexample: commutation not certified exactly");
  return F;
}

DwVerdict common_dw_check(const CommutingFamily& F, const DynamicsParams& params) {
  if (F.maps.empty()) throw InvalidArgument("common_dw_check: empty family");
  DwVerdict out;
  int q = F.dim();
  DomainPoint base = F.domain() == DomainKind::Ball ? DomainPoint(BallPoint(CVec::Zero(q)))
                                                    : DomainPoint(SiegelPoint(kI, CVec::Zero(q - 1)));
  bool any_parabolic = false;
  for (const auto& f : F.maps) {
    Classification c = denjoy_wolff(f, base, params);
    if (c.kind == ClassKind::Elliptic || c.kind == ClassKind::Unknown || !c.dw) {
      out.classes.push_back(c);
      out.reason = "member is " + to_string(c.kind) + "; the check needs non-elliptic members";
      return out;
    }
    any_parabolic = any_parabolic || c.kind == ClassKind::Parabolic;
    bool seen = false;
    for (const auto& p : out.points) seen = seen || chordal_distance(p, *c.dw) < 1e-6;
    if (!seen) out.points.push_back(*c.dw);
    out.classes.push_back(std::move(c));
  }
  if (out.points.size() == 1) {
    out.kind = VerdictKind::Consistent;
    out.reason = "common Denjoy-Wolff point";
    return out;
  }
  if (any_parabolic) {
    out.kind = VerdictKind::Inconsistent;
    out.reason = "parabolic member but Denjoy-Wolff points differ";
    return out;
  }
  if (out.points.size() > 2) {
    out.kind = VerdictKind::Inconsistent;
    out.reason = "more than two Denjoy-Wolff points";
    return out;
  }
  for (int j = 0; j < F.size(); ++j) {
    GeodesicRestriction r = restrict_to_geodesic(F.maps[j], out.points[0], out.points[1]);
    if (!r.invariant || !r.is_automorphism || !r.is_hyperbolic) {
      out.kind = VerdictKind::Inconsistent;
      out.reason = "member " + std::to_string(j) +
                   " does not act as a hyperbolic automorphism on the connecting slice";
      out.restriction = r;
      return out;
    }
    if (j == 0) out.restriction = r;
  }
  out.kind = VerdictKind::Consistent;
  out.reason = "two Denjoy-Wolff points joined by an invariant slice";
  return out;
}

// ------------------------------------------------------------- generators

BallAutomorphism to_ball_automorphism(const SiegelHyperbolic& h) {
  int q = 1 + static_cast<int>(h.phases.size());
  double mu = 1.0 / h.lambda;
  // Cayley transform on homogeneous coordinates (z1, w, t).
  CMat C = CMat::Zero(q + 1, q + 1);
  C(0, 0) = kI;
  C(0, q) = kI;
  for (int k = 1; k < q; ++k) C(k, k) = kI;
  C(q, 0) = -1.0;
  C(q, q) = 1.0;
  CMat T = CMat::Zero(q + 1, q + 1);
  T(0, 0) = mu;
  for (int k = 1; k < q; ++k) T(k, k) = std::polar(std::sqrt(mu), h.phases[k - 1]);
  T(q, q) = 1.0;
  return from_lift(C.inverse() * T * C);
}

BallAutomorphism random_automorphism(int q, std::mt19937_64& rng, double radius) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CMat m(q, q);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) m(i, j) = cplx(g(rng), g(rng));
  CMat U = nearest_unitary(m);
  CVec a(q);
  for (int j = 0; j < q; ++j) a[j] = cplx(g(rng), g(rng));
  a *= radius * std::pow(u(rng), 1.0 / (2.0 * q)) / a.norm();
  return {U, a};
}

NormalFormFamily random_normal_form_family(int q, int k, std::mt19937_64& rng) {
  if (q < 1 || k < 1) throw InvalidArgument("random_normal_form_family: need q, k >= 1");
  std::uniform_real_distribution<double> lam(0.1, 0.6), ph(-M_PI, M_PI);
  std::bernoulli_distribution coin(0.5);
  NormalFormFamily out;
  out.conjugator = random_automorphism(q, rng, 0.6);
  std::vector<MapDescription> maps;
  for (int j = 0; j < k; ++j) {
    double l = lam(rng);
    SiegelHyperbolic h{(j == 0 || coin(rng)) ? l : 1.0 / l, RVec(q - 1)};
    for (int a = 0; a < q - 1; ++a) h.phases[a] = ph(rng);
    out.forms.push_back(h);
    const BallAutomorphism& g = out.conjugator;
    maps.push_back(compose(compose(inverse(g), to_ball_automorphism(h)), g));
  }
  out.family = make_family(maps);
  return out;
}

std::pair<MapProfile, MapProfile> synthetic_violation(Clause c, std::mt19937_64& rng) {
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto any_tri = [&] { return static_cast<Tri>(uniform(0, 2)); };
  int q = c == Clause::HyperbolicFullType ? uniform(1, 5) : uniform(2, 5);
  MapProfile h{ClassKind::Hyperbolic, std::nullopt, q, any_tri()};
  MapProfile p{ClassKind::Parabolic, std::nullopt, q, any_tri()};
  switch (c) {
    case Clause::HyperbolicFullType:
      h.type = q;
      if (uniform(0, 3)) p.type = uniform(0, q);
      break;
    case Clause::ParabolicTypeZero:
      if (uniform(0, 3)) h.type = uniform(1, q - 1);
      p.type = 0;
      break;
    case Clause::ParabolicTypeOneStep:
      if (uniform(0, 3)) h.type = uniform(1, q - 1);
      p.type = 1;
      p.step_positive = Tri::Yes;
      break;
  }
  if (uniform(0, 1)) return {p, h};
  return {h, p};
}

}  // namespace balldyn
