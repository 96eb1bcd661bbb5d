#include <doctest.h>

#include "oracles.hpp"

using namespace balldyn;

namespace {

SiegelPoint sp(cplx z, std::initializer_list<cplx> w) {
  CVec v(static_cast<int>(w.size()));
  int j = 0;
  for (cplx c : w) v[j++] = c;
  return SiegelPoint(z, v);
}

double dist(const DomainPoint& a, const DomainPoint& b) { return kobayashi_distance(a, b); }

// Central differences of the represented map.
CMat fd_jacobian(const MapDescription& f, const DomainPoint& x) {
  int m = dim_of(x);
  CMat J(m, m);
  double h = 1e-6;
  auto shift = [&](int k, cplx d) -> DomainPoint {
    if (auto* b = std::get_if<BallPoint>(&x)) {
      CVec z = b->coords();
      z[k] += d;
      return BallPoint(z);
    }
    const auto& s = std::get<SiegelPoint>(x);
    cplx z = s.z_value();
    CVec w = s.w_value();
    if (k == 0) z += d;
    else w[k - 1] += d;
    return SiegelPoint(z, w);
  };
  auto coords = [](const DomainPoint& p) -> CVec {
    if (auto* b = std::get_if<BallPoint>(&p)) return b->coords();
    const auto& s = std::get<SiegelPoint>(p);
    CVec v(s.dim());
    v[0] = s.z_value();
    v.tail(s.dim() - 1) = s.w_value();
    return v;
  };
  for (int k = 0; k < m; ++k) {
    CVec d = (coords(eval(f, shift(k, h))) - coords(eval(f, shift(k, -h)))) / (2 * h);
    J.col(k) = d;
  }
  return J;
}

}  // namespace

TEST_CASE("multi-index order") {
  MultiIndex a({1, 2}), b({0, 2}), c({2, 0});
  CHECK(a.dominates(b));
  CHECK(!b.dominates(a));
  CHECK(!a.dominates(c));
  CHECK(!c.dominates(a));
  CHECK(MultiIndex::unit(1, 3) == MultiIndex({0, 1, 0}));
  CHECK(a + b == MultiIndex({1, 4}));
  CHECK_THROWS_AS(MultiIndex({-1}), InvalidArgument);
}

TEST_CASE("example maps evaluate as in the formulas") {
  MapDescription f = ExampleHyperbolic{2, 1};
  auto y = std::get<SiegelPoint>(eval(f, DomainPoint(sp(kI, {0.0}))));
  CHECK(std::abs(y.z_value() - 2.0 * kI) < 1e-15);
  CHECK(y.w_value().norm() < 1e-15);

  MapDescription g = ExampleParabolic{2, 2, 1.0};
  auto yg = std::get<SiegelPoint>(eval(g, DomainPoint(sp(kI, {0.0}))));
  CHECK(std::abs(yg.z_value() - 2.0 * kI) < 1e-15);
  CHECK(std::abs(yg.w_value()[0] + kI) < 1e-15);
  CHECK(yg.rho_value() == doctest::Approx(1.0));

  // general point, both examples in dimension 5
  MapDescription f5 = ExampleHyperbolic{5, 2};
  SiegelPoint x = sp({0.3, 9.0}, {{0.5, 0.2}, {1.0, -0.5}, {0.3, 0.3}, {-0.7, 0.1}});
  auto fx = std::get<SiegelPoint>(eval(f5, DomainPoint(x)));
  CVec w = x.w_value();
  CHECK(std::abs(fx.z_value() - (2.0 * x.z_value() + kI * w[0] * w[0])) < 1e-13);
  CHECK(std::abs(fx.w_value()[1] - M_SQRT2 * w[1]) < 1e-14);
  CHECK(std::abs(fx.w_value()[2]) == 0.0);
  CHECK(fx.rho_value() == doctest::Approx(fx.z_value().imag() - fx.w_value().squaredNorm()));

  MapDescription id0 = MapDescription::iterate(f, 0);
  auto x0 = eval(id0, DomainPoint(sp({1, 2}, {0.5})));
  CHECK(dist(x0, DomainPoint(sp({1, 2}, {0.5}))) == 0.0);

  CHECK_THROWS_AS(MapDescription(ExampleHyperbolic{3, 3}), InvalidArgument);
  CHECK_THROWS_AS(MapDescription(ExampleParabolic{3, 4, 1.0}), InvalidArgument);
  CHECK_THROWS_AS(MapDescription(ExampleParabolic{3, 2, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(eval(f, DomainPoint(BallPoint(CVec::Zero(2)))), InvalidArgument);
}

TEST_CASE("jacobians") {
  MapDescription f = ExampleHyperbolic{2, 1};
  cplx w0(0.4, 0.3);
  CMat J = jacobian(f, DomainPoint(sp({0.1, 2}, {w0})));
  CMat ref(2, 2);
  ref << 2.0, 2.0 * kI * w0, 0.0, 1.0;
  CHECK((J - ref).norm() < 1e-14);
  CHECK((jacobian(MapDescription::identity_ball(3), DomainPoint(BallPoint(CVec::Zero(3)))) -
         CMat::Identity(3, 3))
            .norm() == 0.0);

  std::mt19937_64 rng(21);
  std::vector<MapDescription> maps = {ExampleHyperbolic{3, 2}, ExampleParabolic{3, 2, 0.7},
                                      ExampleParabolic{4, 3, -1.2}};
  maps.push_back(MapDescription::then(maps[0], maps[1]));
  for (int q = 1; q <= 3; ++q) maps.push_back(oracle::random_automorphism(q, rng));
  for (const auto& m : maps) {
    for (int i = 0; i < 5; ++i) {
      DomainPoint x = m.domain() == DomainKind::Ball
                          ? DomainPoint(BallPoint(oracle::random_ball_vec(m.dim(), rng, 0.7)))
                          : DomainPoint(oracle::random_siegel(m.dim(), rng));
      CMat Ja = jacobian(m, x), Jf = fd_jacobian(m, x);
      CHECK((Ja - Jf).norm() < 1e-6 * std::max(1.0, Ja.norm()));
    }
  }
  // iterate Jacobian equals the product along the orbit
  MapDescription it = MapDescription::iterate(maps[3], 4);
  DomainPoint x = oracle::random_siegel(3, rng);
  CMat prod = CMat::Identity(3, 3);
  DomainPoint y = x;
  for (int n = 0; n < 4; ++n) {
    prod = jacobian(maps[3], y) * prod;
    y = eval(maps[3], y);
  }
  CHECK((jacobian(it, x) - prod).norm() < 1e-8 * prod.norm());
}

TEST_CASE("ball automorphism algebra") {
  std::mt19937_64 rng(22);
  for (int i = 0; i < 30; ++i) {
    int q = 1 + i % 4;
    BallAutomorphism f = oracle::random_automorphism(q, rng), g = oracle::random_automorphism(q, rng);
    BallAutomorphism h = compose(f, g), fi = inverse(f);
    for (int k = 0; k < 5; ++k) {
      DomainPoint x = BallPoint(oracle::random_ball_vec(q, rng));
      DomainPoint gfx = eval(MapDescription(g), eval(MapDescription(f), x));
      CHECK(dist(gfx, eval(MapDescription(h), x)) < 1e-9);
      CHECK(dist(eval(MapDescription(fi), eval(MapDescription(f), x)), x) < 1e-9);
    }
    BallAutomorphism back = from_lift(lift(f) * cplx(0.3, 2.0));
    CHECK((back.U - f.U).norm() < 1e-10);
    CHECK((back.a - f.a).norm() < 1e-10);
  }
}

TEST_CASE("polynomial composition matches evaluation") {
  std::mt19937_64 rng(23);
  SiegelPolynomial p = *lower_to_polynomial(ExampleHyperbolic{4, 2});
  SiegelPolynomial r = *lower_to_polynomial(ExampleParabolic{4, 3, 0.5});
  SiegelPolynomial pr = compose(p, r);
  for (int i = 0; i < 10; ++i) {
    DomainPoint x = oracle::random_siegel(4, rng);
    DomainPoint a = eval(MapDescription(pr), x);
    DomainPoint b = eval(MapDescription(r), eval(MapDescription(p), x));
    CHECK(dist(a, b) < 1e-10);
  }
  SiegelPolynomial p5 = *lower_to_polynomial(MapDescription::iterate(ExampleParabolic{3, 2, 1.0}, 5));
  DomainPoint x = oracle::random_siegel(3, rng);
  CHECK(dist(eval(MapDescription(p5), x),
             eval(MapDescription::iterate(ExampleParabolic{3, 2, 1.0}, 5), x)) < 1e-10);
}

TEST_CASE("commutation checks") {
  Certificate c = commute_check(ExampleHyperbolic{4, 2}, ExampleParabolic{4, 3, 1.0});
  CHECK(c.valid);
  CHECK(c.kind == CertificateKind::Exact);
  CHECK(commute_check(ExampleHyperbolic{4, 2}, MapDescription::identity_siegel(4)).valid);
  // the two sides with different translation lengths disagree
  MapDescription f = ExampleHyperbolic{2, 1};
  MapDescription lhs = MapDescription::then(ExampleParabolic{2, 2, 1.0}, f);
  MapDescription rhs = MapDescription::then(f, ExampleParabolic{2, 2, 2.0});
  Certificate bad = compare_maps(lhs, rhs, 50, 1e-9, 0);
  CHECK(!bad.valid);
  CHECK(bad.residual > 0.1);
  CHECK(bad.witness.has_value());

  std::mt19937_64 rng(24);
  BallAutomorphism g = oracle::random_automorphism(2, rng);
  MapDescription g2 = MapDescription::iterate(g, 2);
  CHECK(commute_check(g, g2).valid);
  CHECK(!commute_check(g, oracle::random_automorphism(2, rng)).valid);
}

TEST_CASE("multi-index iteration") {
  CommutingFamily F = make_family({ExampleHyperbolic{2, 1}, ExampleParabolic{2, 2, 1.0}});
  CHECK(F.certificate.kind == CertificateKind::Exact);
  DomainPoint x = sp({0.2, 3.0}, {{0.3, 0.1}});
  CHECK(dist(iterate_multiindex(F, MultiIndex::zero(2), x), x) == 0.0);
  CHECK(dist(iterate_multiindex(F, MultiIndex::unit(0, 2), x), eval(F.maps[0], x)) == 0.0);
  CHECK(dist(iterate_multiindex(F, MultiIndex::unit(1, 2), x), eval(F.maps[1], x)) == 0.0);
  DomainPoint a = iterate_multiindex(F, MultiIndex({2, 1}), x);
  DomainPoint b = eval(F.maps[1], eval(F.maps[0], eval(F.maps[0], x)));
  CHECK(dist(a, b) < 1e-10);
  MultiIndex M({1, 2}), N({3, 1});
  DomainPoint c = iterate_multiindex(F, M + N, x);
  DomainPoint d = iterate_multiindex(F, M, iterate_multiindex(F, N, x));
  CHECK(dist(c, d) < 1e-9);
  CHECK_THROWS_AS(iterate_multiindex(F, MultiIndex({1}), x), InvalidArgument);
  CHECK_THROWS_AS(make_family({ExampleHyperbolic{2, 1}, MapDescription::identity_ball(2)}),
                  InvalidArgument);
}

TEST_CASE("self-map validation") {
  CHECK(validate_self_map(ExampleParabolic{3, 2, 1.0}).valid);
  Certificate id = validate_self_map(MapDescription::identity_siegel(3));
  CHECK(id.valid);
  CHECK(id.kind == CertificateKind::Exact);
  SiegelPolynomial neg = SiegelPolynomial::identity(2);
  neg.alpha = -1.0;
  Certificate bad = validate_self_map(neg, 100, 0);
  CHECK(!bad.valid);
  REQUIRE(bad.witness.has_value());
  CHECK_THROWS_AS(eval(MapDescription(neg), *bad.witness), DomainViolation);

  // w -> 2w with alpha = 1 violates the height inequality
  SiegelPolynomial stretch = SiegelPolynomial::linear(1.0, 2.0 * CMat::Identity(1, 1));
  Certificate s = validate_self_map(stretch, 100, 0);
  CHECK(!s.valid);
  REQUIRE(s.witness.has_value());
  CHECK_THROWS_AS(eval(MapDescription(stretch), *s.witness), DomainViolation);
  // the example family as a general polynomial passes the analytic test
  CHECK(validate_self_map(*lower_to_polynomial(ExampleHyperbolic{4, 2})).valid);
}

TEST_CASE("holomorphic maps do not expand distances") {
  std::mt19937_64 rng(25);
  std::vector<MapDescription> maps = {ExampleHyperbolic{3, 1}, ExampleHyperbolic{4, 3},
                                      ExampleParabolic{3, 2, 1.0}, ExampleParabolic{4, 4, -0.5}};
  for (const auto& f : maps)
    for (int i = 0; i < 500; ++i) {
      DomainPoint x = oracle::random_siegel(f.dim(), rng), y = oracle::random_siegel(f.dim(), rng);
      CHECK(dist(eval(f, x), eval(f, y)) <= dist(x, y) + 1e-9);
    }
}
