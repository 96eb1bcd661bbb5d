#include <doctest.h>

#include "balldyn/dynamics.hpp"
#include "oracles.hpp"

using namespace balldyn;

namespace {

// (z + s) / (1 + s z) on the disc: a = -s, U = 1; dilation (1-s)/(1+s) at 1.
MapDescription disc_hyperbolic(double s) {
  CVec a(1);
  a << -s;
  return BallAutomorphism{CMat::Identity(1, 1), a};
}

DomainPoint origin(int q) { return BallPoint(CVec::Zero(q)); }

DomainPoint siegel_axis(double t, int m) { return SiegelPoint({0, t}, CVec::Zero(m - 1)); }

MapDescription half_contraction() {
  SiegelPolynomial p = SiegelPolynomial::identity(1);
  p.alpha = 0.5;
  p.beta = cplx(0, 0.5);
  return p;
}

}  // namespace

TEST_CASE("orbits") {
  auto o = orbit(MapDescription::identity_ball(2), origin(2), 5);
  CHECK(o.size() == 6);
  for (const auto& p : o) CHECK(kobayashi_distance(p, origin(2)) == 0.0);
  auto h = orbit(ExampleHyperbolic{2, 1}, siegel_axis(1, 2), 3);
  for (int n = 0; n <= 3; ++n) {
    const auto& s = std::get<SiegelPoint>(h[n]);
    CHECK(std::abs(s.z_value() - cplx(0, std::ldexp(1.0, n))) < 1e-14);
    CHECK(s.w_value().norm() == 0.0);
  }
  std::mt19937_64 rng(31);
  for (const MapDescription& f : {MapDescription(ExampleParabolic{3, 2, 1.0}),
                                  MapDescription(ExampleHyperbolic{3, 1}), disc_hyperbolic(0.3)}) {
    DomainPoint x = f.domain() == DomainKind::Ball ? origin(1)
                                                   : DomainPoint(oracle::random_siegel(3, rng));
    // ball coordinates resolve pairs of near-boundary points only down to ~1e-16/gap,
    // so the ball orbit is kept short; Siegel orbits use scaled coordinates
    int len = f.domain() == DomainKind::Ball ? 12 : 60;
    auto orb = orbit(f, x, len);
    for (int n = 1; n < len; ++n)
      CHECK(kobayashi_distance(orb[n], orb[n + 1]) <=
            kobayashi_distance(orb[n - 1], orb[n]) + 1e-9);
  }
}

TEST_CASE("divergence rate") {
  LimitEstimate c = divergence_rate(disc_hyperbolic(0.5), origin(1));
  CHECK(std::abs(c.value - std::log(3.0)) < 1e-3);
  CHECK(c.lower <= c.value);
  CHECK(c.value <= c.upper);
  for (double s : {0.1, 0.3, 0.5, 0.8}) {
    double lambda = (1 - s) / (1 + s);
    LimitEstimate e = divergence_rate(disc_hyperbolic(s), origin(1));
    CHECK(std::abs(e.value + std::log(lambda)) < 1e-6);
    CHECK(e.converged);
  }
  LimitEstimate id = divergence_rate(MapDescription::identity_ball(2), origin(2));
  CHECK(id.value == 0.0);
  CHECK(id.converged);
  for (auto [m, q] : {std::pair{2, 1}, {3, 2}, {5, 3}}) {
    LimitEstimate e = divergence_rate(ExampleHyperbolic{m, q}, siegel_axis(1, m), 50);
    CHECK(std::abs(e.value - std::log(2.0)) < 1e-3);
    CHECK(e.lower <= std::log(2.0) + 1e-12);
    CHECK(std::log(2.0) <= e.upper + 1e-12);
  }
  // scale 1 halves the rate
  LimitEstimate half = divergence_rate(disc_hyperbolic(0.5), origin(1), 200, 1e-6, {1.0});
  CHECK(std::abs(half.value - 0.5 * std::log(3.0)) < 1e-6);
}

TEST_CASE("divergence rate is homogeneous under iteration") {
  std::mt19937_64 rng(32);
  std::vector<MapDescription> maps = {disc_hyperbolic(0.4), ExampleHyperbolic{3, 1},
                                      ExampleParabolic{3, 3, 1.0}};
  for (const auto& f : maps) {
    DomainPoint x = f.domain() == DomainKind::Ball ? origin(1)
                                                   : DomainPoint(oracle::random_siegel(3, rng));
    LimitEstimate c1 = divergence_rate(f, x, 120);
    for (int n : {2, 3}) {
      LimitEstimate cn = divergence_rate(MapDescription::iterate(f, n), x, 120);
      double slack = (c1.upper - c1.lower) * n + (cn.upper - cn.lower) + 1e-6;
      CHECK(std::abs(cn.value - n * c1.value) <= slack);
    }
  }
}

TEST_CASE("steps") {
  CommutingFamily F = make_family({disc_hyperbolic(0.5)});
  DomainPoint x = BallPoint(CVec::Constant(1, cplx(0.2, 0.3)));
  LimitEstimate s = step(F, MultiIndex({1}), x);
  CHECK(s.value == doctest::Approx(kobayashi_distance(x, eval(F.maps[0], x))).epsilon(1e-14));
  CHECK(s.converged);
  CommutingFamily I = make_family({MapDescription::identity_siegel(2)});
  CHECK(step(I, MultiIndex({3}), siegel_axis(2, 2)).value == 0.0);

  CommutingFamily P = make_family({ExampleHyperbolic{2, 1}, ExampleParabolic{2, 2, 1.0}});
  LimitEstimate s01 = step(P, MultiIndex({0, 1}), siegel_axis(5, 2));
  CHECK(s01.value < 1e-6);
  std::mt19937_64 rng(33);
  for (int i = 0; i < 10; ++i) {
    DomainPoint y = oracle::random_siegel(2, rng);
    MultiIndex M({i % 3, 1 + i % 2});
    auto seq = step_sequence(P, M, y, 40);
    for (size_t n = 1; n < seq.size(); ++n) CHECK(seq[n] <= seq[n - 1] + 1e-10);
    LimitEstimate e = step(P, M, y, 80);
    CHECK(e.value <= kobayashi_distance(y, iterate_multiindex(P, M, y)) + 1e-12);
  }
}

TEST_CASE("classification") {
  MapDescription rot = BallAutomorphism{CMat::Constant(1, 1, std::polar(1.0, 0.7)), CVec::Zero(1)};
  Classification e = denjoy_wolff(rot, BallPoint(CVec::Constant(1, 0.3)));
  CHECK(e.kind == ClassKind::Elliptic);
  REQUIRE(e.fixed_point.has_value());
  CHECK(std::get<BallPoint>(*e.fixed_point).coords().norm() < 1e-12);

  Classification h = denjoy_wolff(disc_hyperbolic(0.5), origin(1));
  CHECK(h.kind == ClassKind::Hyperbolic);
  CHECK(std::abs(h.lambda - 1.0 / 3.0) < 1e-4);
  REQUIRE(h.dw.has_value());
  CHECK(std::abs(h.dw->coords()[0] - 1.0) < 1e-9);
  CHECK(std::abs(std::exp(-h.rate.value) - h.lambda) < 0.05 * h.lambda);

  Classification p = denjoy_wolff(ExampleParabolic{2, 2, 1.0}, siegel_axis(1, 2));
  CHECK(p.kind == ClassKind::Parabolic);
  REQUIRE(p.dw.has_value());
  CHECK(chordal_distance(*p.dw, BoundaryPoint::e1(2)) < 1e-12);

  Classification f = denjoy_wolff(ExampleHyperbolic{3, 2}, siegel_axis(1, 3));
  CHECK(f.kind == ClassKind::Hyperbolic);
  CHECK(std::abs(f.lambda - 0.5) < 1e-4);

  Classification c = denjoy_wolff(half_contraction(), siegel_axis(7, 1));
  CHECK(c.kind == ClassKind::Elliptic);
  CHECK(kobayashi_distance(*c.fixed_point, siegel_axis(1, 1)) < 1e-9);
}

TEST_CASE("classification is invariant under conjugation") {
  std::mt19937_64 rng(34);
  for (int i = 0; i < 5; ++i) {
    int q = 1 + i % 3;
    BallAutomorphism base = *lower_to_automorphism(disc_hyperbolic(0.2 + 0.1 * i));
    if (q > 1) {
      // extend to the ball by the diagonal action on the remaining coordinates
      CVec a = CVec::Zero(q);
      a[0] = base.a[0];
      base = {CMat::Identity(q, q), a};
    }
    BallAutomorphism g = oracle::random_automorphism(q, rng, 0.5);
    BallAutomorphism conj = compose(compose(inverse(g), base), g);
    Classification a = denjoy_wolff(base, origin(q));
    Classification b = denjoy_wolff(conj, origin(q));
    CHECK(a.kind == ClassKind::Hyperbolic);
    CHECK(b.kind == a.kind);
    CHECK(std::abs(a.lambda - b.lambda) < 1e-6);
    // the attracting point moves with the conjugation
    BoundaryPoint moved(std::get<BallPoint>(eval(MapDescription(g), BallPoint(CVec(
                                                     0.999999999 * a.dw->coords()))))
                            .coords());
    CHECK(chordal_distance(moved, *b.dw) < 1e-4);
  }
}

TEST_CASE("geodesic restriction") {
  CVec a = CVec::Zero(2);
  a[0] = -0.5;
  MapDescription g = BallAutomorphism{CMat::Identity(2, 2), a};
  BoundaryPoint p = BoundaryPoint::e1(2), p2(CVec(-p.coords()));
  GeodesicRestriction r = restrict_to_geodesic(g, p, p2);
  CHECK(r.invariant);
  CHECK(r.is_hyperbolic);
  REQUIRE(r.boundary_fixed_points.size() == 2);
  double m1 = r.boundary_fixed_points[0].multiplier, m2 = r.boundary_fixed_points[1].multiplier;
  CHECK(m1 * m2 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.dilation == doctest::Approx(1.0 / 3.0).epsilon(1e-9));

  GeodesicRestriction id = restrict_to_geodesic(MapDescription::identity_ball(3),
                                                BoundaryPoint::e1(3),
                                                BoundaryPoint(CVec::Constant(3, 1.0)));
  CHECK(id.invariant);
  CHECK(id.is_identity);

  GeodesicRestriction f = restrict_to_geodesic(ExampleHyperbolic{2, 1}, p, p2);
  CHECK(f.invariant);
  CHECK(f.is_hyperbolic);
  CHECK(f.dilation == doctest::Approx(0.5).epsilon(1e-9));

  // a rotation of the second coordinate does not preserve a slice tilted into it
  MapDescription rot = BallAutomorphism{CMat(CVec((CVec(2) << 1.0, kI).finished()).asDiagonal()),
                                        CVec::Zero(2)};
  CVec t(2);
  t << 0.6, 0.8;
  GeodesicRestriction bad = restrict_to_geodesic(rot, BoundaryPoint(t), BoundaryPoint(CVec(-t)));
  CHECK(!bad.invariant);
  CHECK(bad.witness.has_value());
}
