#include <doctest.h>

#include <algorithm>

#include "balldyn/kernels.hpp"
#include "balldyn/semimodel.hpp"
#include "oracles.hpp"

using namespace balldyn;

namespace {

MapDescription disc_hyperbolic(double s) {
  CVec a(1);
  a << -s;
  return BallAutomorphism{CMat::Identity(1, 1), a};
}

MapDescription half_contraction() {
  SiegelPolynomial p = SiegelPolynomial::identity(1);
  p.alpha = 0.5;
  p.beta = cplx(0, 0.5);
  return p;
}

DomainPoint apply_multi(const std::vector<MapDescription>& maps, const MultiIndex& M,
                        DomainPoint y) {
  for (int j = 0; j < M.size(); ++j)
    for (int n = 0; n < M.entries[j]; ++n) y = eval(maps[j], y);
  return y;
}

std::vector<MapDescription> normal_maps(const SemiModel& s) {
  std::vector<MapDescription> out;
  for (const auto& t : s.autos) out.push_back(to_map(t));
  return out;
}

// k commuting hyperbolic automorphisms from normal-form data, conjugated by g.
CommutingFamily conjugated_family(const std::vector<double>& mu,
                                  const std::vector<std::vector<double>>& phases,
                                  const BallAutomorphism& g) {
  std::vector<MapDescription> maps;
  for (size_t j = 0; j < mu.size(); ++j) {
    BallAutomorphism f = oracle::from_siegel_linear(mu[j], phases[j]);
    maps.push_back(compose(compose(inverse(g), f), g));
  }
  return make_family(maps);
}

}  // namespace

TEST_CASE("normal forms are automorphisms of the Siegel domain") {
  RVec t(2);
  t << 0.3, -2.0;
  for (double lam : {0.25, 4.0}) {
    SiegelHyperbolic h{lam, t};
    CHECK(validate_self_map(to_map(h)).valid);
    CHECK(dilation(h) == doctest::Approx(0.25));
    SiegelPoint x(cplx(0.0, 1.0), CVec::Zero(2));
    auto y = std::get<SiegelPoint>(eval(to_map(h), x));
    CHECK(std::abs(y.z_value() - cplx(0.0, 1.0 / lam)) < 1e-14);
  }
  SiegelParabolicTranslation p{3, 1.5};
  CHECK(validate_self_map(to_map(p)).valid);
  CHECK(dilation(p) == 1.0);
  std::mt19937_64 rng(40);
  for (int i = 0; i < 20; ++i) {
    SiegelPoint x = oracle::random_siegel(3, rng);
    auto y = std::get<SiegelPoint>(eval(to_map(p), x));
    CHECK(y.rho_value() == doctest::Approx(x.rho_value()).epsilon(1e-10));
  }
  CHECK_THROWS_AS(to_map(ExplicitLinear{2.0, CVec::Ones(1)}), InvalidArgument);
}

TEST_CASE("limit pseudodistance") {
  std::mt19937_64 rng(41);
  CommutingFamily A = make_family({disc_hyperbolic(0.4)});
  BallPoint a(CVec::Constant(1, cplx(0.1, 0.2))), b(CVec::Constant(1, cplx(-0.5, 0.3)));
  LimitEstimate e = limit_pseudodistance(A, a, b);
  CHECK(e.value == kobayashi_distance(a, b));
  CHECK(e.converged);

  CommutingFamily C = make_family({half_contraction()});
  LimitEstimate z = limit_pseudodistance(C, SiegelPoint(cplx(1, 3), CVec(0)),
                                         SiegelPoint(cplx(-2, 0.5), CVec(0)));
  CHECK(z.value < 1e-6);
  CHECK(z.lower == 0.0);

  CommutingFamily H = make_family({ExampleHyperbolic{2, 1}});
  for (int i = 0; i < 10; ++i) {
    SiegelPoint x = oracle::random_siegel(2, rng), y = oracle::random_siegel(2, rng);
    LimitEstimate l = limit_pseudodistance(H, x, y);
    auto image = [](const SiegelPoint& s) {
      cplx v = s.z_value() + kI * s.w_value()[0] * s.w_value()[0];
      return oracle::lc(v.real(), v.imag());
    };
    double expected = static_cast<double>(oracle::siegel_distance(image(x), {}, image(y), {}));
    CHECK(std::abs(l.value - expected) < 1e-5);
    CHECK(l.lower <= expected + 1e-9);
    CHECK(l.value <= kobayashi_distance(x, y) + 1e-12);
  }
}

TEST_CASE("limit pullback form") {
  SiegelPoint x(cplx(0.3, 2.0), CVec::Constant(1, cplx(0.2, -0.4)));
  CommutingFamily I = make_family({MapDescription::identity_siegel(2)});
  PullbackResult id = limit_pullback_form(I, x);
  CHECK((id.form.matrix() - kobayashi_metric_form_siegel(x).matrix()).norm() < 1e-14);
  CHECK(id.spectrum.rank == 2);

  CommutingFamily H = make_family({ExampleHyperbolic{2, 1}});
  PullbackResult r = limit_pullback_form(H, SiegelPoint(cplx(0, 2), CVec::Zero(1)));
  CMat expected = CMat::Zero(2, 2);
  expected(0, 0) = 0.25;  // scale^2 / (4 Im(z)^2) at l(x) = 2i, dl = (1, 0)
  CHECK((r.form.matrix() - expected).norm() < 1e-4);
  CHECK(r.spectrum.rank == 1);
  CHECK(r.stabilized);

  std::mt19937_64 rng(42);
  std::vector<CommutingFamily> fams = {
      H, make_family({ExampleHyperbolic{4, 2}, ExampleParabolic{4, 3, 1.0}}),
      make_family({ExampleParabolic{3, 2, -0.7}}), make_family({half_contraction()})};
  for (const auto& F : fams) {
    for (int i = 0; i < 4; ++i) {
      SiegelPoint s = oracle::random_siegel(F.dim(), rng);
      PullbackResult p = limit_pullback_form(F, s);
      for (size_t n = 1; n < p.history.size(); ++n)
        for (int k = 0; k < F.dim(); ++k) CHECK(p.history[n][k] <= p.history[n - 1][k] + 1e-8);
    }
  }
}

TEST_CASE("type estimate") {
  std::mt19937_64 rng(43);
  for (auto [m, q] : {std::pair{2, 1}, {3, 1}, {3, 2}, {4, 3}}) {
    TypeEstimate t = type_estimate(make_family({ExampleHyperbolic{m, q}}), oracle::random_siegel(m, rng));
    REQUIRE(t.d.has_value());
    CHECK(*t.d == q);
    CHECK(t.gap >= 1e3);
  }
  for (auto [m, p] : {std::pair{2, 2}, {3, 2}, {3, 3}}) {
    TypeEstimate t = type_estimate(make_family({ExampleParabolic{m, p, 1.0}}),
                                   oracle::random_siegel(m, rng));
    REQUIRE(t.d.has_value());
    CHECK(*t.d == p);
  }
  for (auto [m, q, p] : {std::tuple{2, 1, 2}, {4, 2, 3}, {5, 3, 4}, {5, 4, 2}}) {
    CommutingFamily F = make_family({ExampleHyperbolic{m, q}, ExampleParabolic{m, p, 1.0}});
    TypeEstimate t = type_estimate(F, oracle::random_siegel(m, rng));
    REQUIRE(t.d.has_value());
    CHECK(*t.d == std::min(p - 1, q));
    CHECK(t.window.size() == 5);
  }
  TypeEstimate aut = type_estimate(make_family({disc_hyperbolic(0.3)}), BallPoint(CVec::Zero(1)));
  REQUIRE(aut.d.has_value());
  CHECK(*aut.d == 1);
}

TEST_CASE("simultaneous diagonalization") {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> ph(-3.0, 3.0);
  CVec d1(3), d2(3);
  d1 << std::polar(1.0, 0.5), std::polar(1.0, -1.0), std::polar(1.0, 2.0);
  d2 << std::polar(1.0, 0.1), std::polar(1.0, 0.1), std::polar(1.0, -0.3);
  auto sd = simultaneous_diagonalize({CMat(d1.asDiagonal()), CMat(d2.asDiagonal())});
  CHECK(sd.residual < 1e-12);
  CHECK((sd.Q.cwiseAbs() - sd.Q.cwiseAbs().cwiseMin(1.0)).norm() == 0.0);
  CHECK(sd.phases[0][0] == doctest::Approx(-1.0));
  CHECK(sd.phases[0][2] == doctest::Approx(2.0));

  for (int trial = 0; trial < 10; ++trial) {
    int n = 2 + trial % 3;
    CMat V = oracle::random_unitary(n, rng);
    std::vector<std::vector<double>> t(2, std::vector<double>(n));
    for (auto& row : t)
      for (auto& x : row) x = ph(rng);
    if (trial % 2) t[1][1] = t[1][0];  // degenerate second member
    std::vector<CMat> Us;
    for (const auto& row : t) {
      CVec d(n);
      for (int k = 0; k < n; ++k) d[k] = std::polar(1.0, row[k]);
      Us.push_back(V * d.asDiagonal() * V.adjoint());
    }
    auto r = simultaneous_diagonalize(Us, 1e-9, trial);
    CHECK(r.residual < 1e-10);
    CHECK(unitarity_defect(r.Q) < 1e-12);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return t[0][a] < t[0][b]; });
    for (int k = 0; k < n; ++k) {
      CHECK(std::abs(r.phases[0][k] - t[0][order[k]]) < 1e-10);
      CHECK(std::abs(r.phases[1][k] - t[1][order[k]]) < 1e-10);
    }
  }

  CMat U(2, 2);
  U << 0, 1, 1, 0;
  auto e = simultaneous_diagonalize({U});
  for (int k = 0; k < 2; ++k) {
    CVec v = e.Q.row(k).adjoint();
    CHECK((U * v - e.diagonals[0][k] * v).norm() < 1e-12);
  }
  CMat W(2, 2);
  W << 1, 0, 0, -1;
  CHECK_THROWS_AS(simultaneous_diagonalize({U, W}), InvalidArgument);
}

TEST_CASE("CSM of commuting hyperbolic automorphisms") {
  SemiModel one = csm_commuting_hyperbolic_automorphisms(make_family({disc_hyperbolic(0.5)}));
  CHECK(one.d == 1);
  CHECK(one.exactness == Exactness::Exact);
  auto h = std::get<SiegelHyperbolic>(one.autos[0]);
  CHECK(h.lambda == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(one.residual < 1e-9);

  std::mt19937_64 rng(45);
  std::uniform_real_distribution<double> ph(-3.0, 3.0), lam(0.1, 0.8);
  for (int trial = 0; trial < 6; ++trial) {
    int q = 2 + trial % 3, k = 1 + trial % 3;
    std::vector<double> mu, lambdas;
    std::vector<std::vector<double>> phases;
    for (int j = 0; j < k; ++j) {
      double l = lam(rng);
      bool prima = j == 0 || (j % 2 == 1);
      lambdas.push_back(l);
      mu.push_back(prima ? 1.0 / l : l);
      std::vector<double> t(q - 1);
      for (auto& x : t) x = ph(rng);
      phases.push_back(t);
    }
    BallAutomorphism g = oracle::random_automorphism(q, rng, 0.6);
    CommutingFamily F = conjugated_family(mu, phases, g);
    SemiModel s = csm_commuting_hyperbolic_automorphisms(F, trial);
    CHECK(s.d == q);
    CHECK(s.residual < 1e-9);
    std::vector<int> order(q - 1);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return phases[0][a] < phases[0][b]; });
    for (int j = 0; j < k; ++j) {
      auto nf = std::get<SiegelHyperbolic>(s.autos[j]);
      CHECK(std::abs(dilation(nf) - lambdas[j]) < 1e-8);
      CHECK((nf.lambda < 1.0) == (mu[j] > 1.0));
      for (int a = 0; a < q - 1; ++a)
        CHECK(std::abs(std::remainder(nf.phases[a] - phases[j][order[a]], 2 * M_PI)) < 1e-8);
    }
    // the model maps the family to its normal forms, including through Gamma
    for (int j = 0; j < k; ++j) {
      auto G = lower_to_polynomial(gamma_induced(F.maps[j], s));
      CHECK(coefficient_distance(*G, *lower_to_polynomial(to_map(s.autos[j]))) < 1e-8);
    }
  }

  CHECK_THROWS_AS(csm_commuting_hyperbolic_automorphisms(make_family({MapDescription::identity_ball(2)})),
                  InvalidArgument);
  CHECK_THROWS_AS(csm_commuting_hyperbolic_automorphisms(make_family({ExampleHyperbolic{2, 1}})),
                  InvalidArgument);
}

TEST_CASE("example family models") {
  ExampleModels e = csm_example_family(2, 1, 2, 1.0);
  CHECK(e.f.d == 1);
  CHECK(e.pair.d == 1);
  SiegelPoint x(cplx(0.25, 3.0), CVec::Constant(1, cplx(0.5, -0.25)));
  auto lx = std::get<SiegelPoint>(apply_intertwiner(*e.f.intertwiner, x));
  CHECK(lx.z_value() == x.z_value() + kI * x.w_value()[0] * x.w_value()[0]);
  auto phi = std::get<ExplicitLinear>(e.f.autos[0]);
  CHECK(phi.alpha == 2.0);

  ExampleModels b = csm_example_family(4, 2, 3, 1.0);
  CHECK(b.f.d == 2);
  CHECK(b.g.d == 3);
  CHECK(b.pair.d == 2);
  CHECK(b.family.certificate.kind == CertificateKind::Exact);

  // exact at dyadic points: l(f x) and Phi(l x) agree bit for bit
  CVec w(3);
  w << cplx(0.5, -0.25), cplx(0.125, 0.75), cplx(-1.5, 0.5);
  SiegelPoint d(cplx(0.75, 8.0), w);
  for (const auto* model : {&b.f, &b.pair}) {
    auto lhs = std::get<SiegelPoint>(apply_intertwiner(*model->intertwiner, eval(b.family.maps[0], d)));
    auto rhs = std::get<SiegelPoint>(eval(to_map(model->autos[0]), apply_intertwiner(*model->intertwiner, d)));
    CHECK(lhs.z_value() == rhs.z_value());
    CHECK(lhs.w_value() == rhs.w_value());
  }

  CHECK_THROWS_AS(csm_example_family(3, 3, 2, 1.0), InvalidArgument);
  CHECK_THROWS_AS(csm_example_family(3, 1, 4, 1.0), InvalidArgument);
  CHECK_THROWS_AS(csm_example_family(3, 1, 2, 0.0), InvalidArgument);
}

TEST_CASE("gamma") {
  ExampleModels e = csm_example_family(5, 2, 4, 1.0);
  auto id = lower_to_polynomial(gamma_induced(MapDescription::identity_siegel(5), e.f));
  CHECK(coefficient_distance(*id, SiegelPolynomial::identity(2)) == 0.0);

  // f seen from the model of g: (a, b, c) -> (2a + i b^2, b, sqrt2 c_1, 0)
  auto G = lower_to_polynomial(gamma_induced(ExampleHyperbolic{5, 2}, e.g));
  REQUIRE(G);
  CHECK(G->alpha == 2.0);
  CHECK(G->c.norm() == 0.0);
  CHECK(G->beta == cplx(0, 0));
  CMat S = CMat::Zero(3, 3);
  S(0, 0) = 1.0;
  CHECK((G->S - S).norm() < 1e-15);
  CVec diag(3);
  diag << 1.0, std::sqrt(2.0), 0.0;
  CHECK((G->A - CMat(diag.asDiagonal())).norm() < 1e-15);

  // functoriality on maps commuting with f
  std::vector<MapDescription> gs = {ExampleParabolic{5, 4, 1.0}, ExampleParabolic{5, 3, -0.5},
                                    ExampleHyperbolic{5, 2}, ExampleParabolic{5, 2, 2.0}};
  for (const auto& g1 : gs)
    for (const auto& g2 : gs) {
      auto lhs = lower_to_polynomial(gamma_induced(MapDescription::then(g2, g1), e.f));
      auto rhs = compose(*lower_to_polynomial(gamma_induced(g2, e.f)),
                         *lower_to_polynomial(gamma_induced(g1, e.f)));
      CHECK(coefficient_distance(*lhs, rhs) < 1e-15);
    }

  // divergence rate is preserved
  std::mt19937_64 rng(46);
  MapDescription gf = gamma_induced(ExampleHyperbolic{5, 2}, e.g);
  LimitEstimate c1 = divergence_rate(ExampleHyperbolic{5, 2}, oracle::random_siegel(5, rng), 60);
  LimitEstimate c2 = divergence_rate(gf, oracle::random_siegel(4, rng), 60);
  CHECK(std::abs(c1.value - c2.value) <= (c1.upper - c1.lower) + (c2.upper - c2.lower) + 1e-6);

  // a rotation of w does not descend through l = z + i w^2 unless it is +-1
  SiegelPolynomial rot = SiegelPolynomial::linear(1.0, CMat::Constant(1, 1, std::polar(1.0, 0.4)));
  ExampleModels s = csm_example_family(2, 1, 2, 1.0);
  CHECK_THROWS_AS(gamma_induced(rot, s.f), Unsupported);
}

TEST_CASE("CSM identities on the example family") {
  std::mt19937_64 rng(47);
  std::uniform_int_distribution<int> mi(0, 3);
  for (auto [m, q, p] : {std::tuple{2, 1, 2}, {4, 2, 3}, {5, 3, 5}}) {
    ExampleModels e = csm_example_family(m, q, p, 1.0);
    auto taus = normal_maps(e.pair);
    for (int i = 0; i < 4; ++i) {
      SiegelPoint x = oracle::random_siegel(m, rng);
      MultiIndex M({mi(rng), mi(rng)});
      DomainPoint lx = apply_intertwiner(*e.pair.intertwiner, x);
      double base = kobayashi_distance(lx, apply_multi(taus, M, lx));
      LimitEstimate s = step(e.family, M, x);
      CHECK(std::abs(base - s.value) < 1e-5);
    }
    // c(tau) = c(f) for each member
    for (int j = 0; j < 2; ++j) {
      SiegelPoint x = oracle::random_siegel(m, rng);
      LimitEstimate cf = divergence_rate(e.family.maps[j], x, 120);
      LimitEstimate ct = divergence_rate(taus[j], apply_intertwiner(*e.pair.intertwiner, x), 120);
      CHECK(std::abs(cf.value - ct.value) <= (cf.upper - cf.lower) + (ct.upper - ct.lower) + 1e-6);
    }
  }
}

TEST_CASE("univalence") {
  CommutingFamily A = make_family({disc_hyperbolic(0.4)});
  SemiModel id = identity_model(A);
  UnivalenceReport r = univalence_check(A, id, BallPoint(CVec::Zero(1)), 1.0);
  CHECK(r.guaranteed);
  CHECK(!r.collision_in_guaranteed_regime);
  REQUIRE(r.threshold.has_value());
  CHECK(*r.threshold == 0);
  for (double v : r.min_ratio) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));

  SemiModel csm = csm_commuting_hyperbolic_automorphisms(A);
  UnivalenceReport c = univalence_check(A, csm, BallPoint(CVec::Zero(1)), 1.0, 4);
  CHECK(!c.collision_in_guaranteed_regime);
  for (double v : c.min_ratio) CHECK(v == doctest::Approx(1.0).epsilon(1e-6));

  ExampleModels e = csm_example_family(2, 1, 2, 1.0);
  CommutingFamily H = make_family({ExampleHyperbolic{2, 1}});
  UnivalenceReport info = univalence_check(H, e.f, SiegelPoint(kI, CVec::Zero(1)), 0.5, 4);
  CHECK(!info.guaranteed);
  CHECK(!info.collision_in_guaranteed_regime);
  CHECK(info.min_ratio.size() == 5);

  SemiModel numeric;
  numeric.d = 1;
  CHECK_THROWS_AS(univalence_check(H, numeric, SiegelPoint(kI, CVec::Zero(1)), 0.5), InvalidArgument);
}
