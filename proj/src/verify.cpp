#include "balldyn/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "balldyn/kernels.hpp"

namespace balldyn::verify {

namespace {

// Accumulates the worst measurement and any hard failures of one property.
class Tracker {
 public:
  Tracker(std::string name, double threshold) {
    r_.name = std::move(name);
    r_.threshold = threshold;
  }
  void measure(double v) {
    ++r_.samples;
    if (!(v <= r_.threshold)) ++bad_;
    if (r_.samples == 1 || std::isnan(v) || v > r_.measured) r_.measured = v;
  }
  void fail(const std::string& why) {
    ++bad_;
    if (first_.empty()) first_ = why;
  }
  void sample() { ++r_.samples; }
  PropertyResult done(std::string detail = "") {
    r_.passed = bad_ == 0;
    std::ostringstream os;
    os << detail;
    if (bad_) os << (detail.empty() ? "" : "; ") << bad_ << " failing sample(s)";
    if (!first_.empty()) os << "; first: " << first_;
    r_.detail = os.str();
    return r_;
  }

 private:
  PropertyResult r_;
  int bad_ = 0;
  std::string first_;
};

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t tag) {
  std::seed_seq s{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                  static_cast<std::uint32_t>(tag)};
  std::array<std::uint32_t, 2> out;
  s.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

MapDescription disc_hyperbolic(double s) {
  CVec a(1);
  a << -s;
  return BallAutomorphism{CMat::Identity(1, 1), a};
}

MapDescription half_contraction(int m) {
  SiegelPolynomial p = SiegelPolynomial::identity(m);
  p.alpha = 0.5;
  p.beta = cplx(0, 0.5);
  p.A /= std::sqrt(2.0);  // keeps Im z > |w|^2
  return p;
}

DomainPoint siegel_sample(int m, std::uint64_t seed) {
  return sample_domain(DomainKind::Siegel, m, 1, seed)[0];
}

// Base point within Kobayashi distance 3 of (i, 0).  Type estimates at points
// much closer to the boundary run into the double-precision floor.
DomainPoint interior_sample(int m, std::uint64_t seed) {
  return kobayashi_ball_sample(SiegelPoint(kI, CVec::Zero(m - 1)), 3.0, 1, seed)[0];
}

DomainPoint apply_multi(const std::vector<MapDescription>& maps, const MultiIndex& M, DomainPoint y) {
  for (int j = 0; j < M.size(); ++j)
    for (int n = 0; n < M.entries[j]; ++n) y = eval(maps[j], y);
  return y;
}

double phase_gap(double a, double b) { return std::abs(std::remainder(a - b, 2 * M_PI)); }

// ------------------------------------------------------------ distances

PropertyResult distance_symmetry(std::uint64_t seed, const VerifyConfig& cfg) {
  Tracker t("distance_symmetry", 1e-12);
  for (int q = 1; q <= 4; ++q)
    for (DomainKind kind : {DomainKind::Ball, DomainKind::Siegel}) {
      auto a = sample_domain(kind, q, 125, sub_seed(seed, 10 + q));
      auto b = sample_domain(kind, q, 125, sub_seed(seed, 20 + q));
      auto ab = kernels::distance_batch(a, b, cfg.conv);
      auto ba = kernels::distance_batch(b, a, cfg.conv);
      for (size_t i = 0; i < ab.size(); ++i) t.measure(std::abs(ab[i] - ba[i]));
    }
  return t.done("1000 pairs, ball and Siegel, q = 1..4");
}

PropertyResult distance_triangle(std::uint64_t seed, const VerifyConfig& cfg) {
  Tracker t("distance_triangle", 1e-10);
  for (int q = 1; q <= 4; ++q)
    for (DomainKind kind : {DomainKind::Ball, DomainKind::Siegel}) {
      auto a = sample_domain(kind, q, 125, sub_seed(seed, 30 + q));
      auto b = sample_domain(kind, q, 125, sub_seed(seed, 40 + q));
      auto c = sample_domain(kind, q, 125, sub_seed(seed, 50 + q));
      auto ab = kernels::distance_batch(a, b, cfg.conv);
      auto bc = kernels::distance_batch(b, c, cfg.conv);
      auto ac = kernels::distance_batch(a, c, cfg.conv);
      for (size_t i = 0; i < ab.size(); ++i) t.measure(ac[i] - ab[i] - bc[i]);
    }
  return t.done("1000 triples; measured is the worst excess");
}

PropertyResult distance_contraction(std::uint64_t seed, const VerifyConfig& cfg) {
  Tracker t("distance_contraction", 1e-9);
  std::mt19937_64 rng(sub_seed(seed, 60));
  std::vector<MapDescription> maps = {
      ExampleHyperbolic{3, 2}, ExampleParabolic{3, 2, 1.0}, ExampleParabolic{3, 3, -0.5},
      half_contraction(2), random_automorphism(3, rng),
      MapDescription::then(ExampleHyperbolic{4, 1}, ExampleParabolic{4, 2, 0.7})};
  for (size_t j = 0; j < maps.size(); ++j) {
    const auto& f = maps[j];
    int n = j == 0 ? 100 : 80;
    auto x = sample_domain(f.domain(), f.dim(), n, sub_seed(seed, 61 + j));
    auto y = sample_domain(f.domain(), f.dim(), n, sub_seed(seed, 71 + j));
    std::vector<DomainPoint> fx, fy;
    for (int i = 0; i < n; ++i) {
      fx.push_back(eval(f, x[i]));
      fy.push_back(eval(f, y[i]));
    }
    auto before = kernels::distance_batch(x, y, cfg.conv);
    auto after = kernels::distance_batch(fx, fy, cfg.conv);
    for (int i = 0; i < n; ++i) t.measure(after[i] - before[i]);
  }
  return t.done("500 pairs over six validated maps; measured is the worst expansion");
}

PropertyResult distance_invariance(std::uint64_t seed, const VerifyConfig& cfg) {
  Tracker t("automorphism_invariance", 1e-9);
  std::mt19937_64 rng(sub_seed(seed, 80));
  for (int trial = 0; trial < 10; ++trial) {
    int q = 1 + trial % 4;
    MapDescription g = random_automorphism(q, rng);
    auto a = sample_domain(DomainKind::Ball, q, 100, sub_seed(seed, 81 + trial));
    auto b = sample_domain(DomainKind::Ball, q, 100, sub_seed(seed, 91 + trial));
    std::vector<DomainPoint> ga, gb;
    for (int i = 0; i < 100; ++i) {
      ga.push_back(eval(g, a[i]));
      gb.push_back(eval(g, b[i]));
    }
    auto d0 = kernels::distance_batch(a, b, cfg.conv);
    auto d1 = kernels::distance_batch(ga, gb, cfg.conv);
    for (int i = 0; i < 100; ++i) t.measure(std::abs(d1[i] - d0[i]));
  }
  return t.done("1000 pairs under ten random automorphisms");
}

PropertyResult cayley_isometry(std::uint64_t seed, const VerifyConfig& cfg) {
  Tracker t("cayley_isometry", 1e-9);
  for (int q = 1; q <= 4; ++q) {
    auto a = sample_domain(DomainKind::Ball, q, 125, sub_seed(seed, 100 + q));
    auto b = sample_domain(DomainKind::Ball, q, 125, sub_seed(seed, 110 + q));
    std::vector<DomainPoint> ca, cb;
    for (size_t i = 0; i < a.size(); ++i) {
      ca.push_back(cayley(std::get<BallPoint>(a[i])));
      cb.push_back(cayley(std::get<BallPoint>(b[i])));
    }
    auto d0 = kernels::distance_batch(a, b, cfg.conv);
    auto d1 = kernels::distance_batch(ca, cb, cfg.conv);
    for (size_t i = 0; i < d0.size(); ++i) t.measure(std::abs(d1[i] - d0[i]));
  }
  return t.done("500 pairs");
}

PropertyResult metric_consistency(std::uint64_t seed, const VerifyConfig& cfg) {
  Tracker t("metric_distance_consistency", 1e-4);
  std::mt19937_64 rng(sub_seed(seed, 120));
  std::normal_distribution<double> g(0.0, 1.0);
  const double eps = 1e-6;
  for (int q = 1; q <= 3; ++q) {
    auto xs = sample_domain(DomainKind::Ball, q, 20, sub_seed(seed, 121 + q));
    for (const auto& p : xs) {
      const auto& x = std::get<BallPoint>(p);
      CVec v(q);
      for (int k = 0; k < q; ++k) v[k] = cplx(g(rng), g(rng));
      v /= v.norm();
      double room = 1.0 - x.coords().norm();
      CVec h = v * (eps * room);
      double d = kobayashi_distance_ball(x, BallPoint(CVec(x.coords() + h)), cfg.conv);
      double f = std::sqrt(kobayashi_metric_form_ball(x, cfg.conv).quad(h));
      t.measure(std::abs(d / f - 1.0));
    }
  }
  return t.done("relative mismatch of k(x, x + h) and sqrt(h* G h)");
}

// ---------------------------------------------------------------- steps

struct StepCase {
  CommutingFamily F;
  int n;  // diagonal length
};

std::vector<StepCase> step_cases(const VerifyConfig& cfg) {
  int siegel_n = std::min(cfg.max_iter, 40);
  int ball_n = std::min(cfg.max_iter, 12);  // ball coordinates saturate near the boundary
  return {{make_family({ExampleHyperbolic{3, 1}, ExampleParabolic{3, 2, 1.0}}), siegel_n},
          {make_family({ExampleParabolic{2, 2, 1.0}}), siegel_n},
          {make_family({ExampleHyperbolic{4, 2}, ExampleParabolic{4, 3, -1.0}}), siegel_n},
          {make_family({half_contraction(2)}), siegel_n},
          {make_family({disc_hyperbolic(0.4), disc_hyperbolic(-0.2)}), ball_n}};
}

std::pair<PropertyResult, PropertyResult> step_properties(std::uint64_t seed, const VerifyConfig& cfg) {
  Tracker mono("step_monotone", 1e-10), bound("step_below_distance", 1e-12);
  std::mt19937_64 rng(sub_seed(seed, 200));
  std::uniform_int_distribution<int> mi(0, 3);
  auto cases = step_cases(cfg);
  for (size_t c = 0; c < cases.size(); ++c) {
    const auto& [F, n] = cases[c];
    auto xs = sample_domain(F.domain(), F.dim(), 6, sub_seed(seed, 201 + c));
    for (const auto& x : xs) {
      std::vector<int> e(F.size());
      for (auto& v : e) v = mi(rng);
      if (std::all_of(e.begin(), e.end(), [](int v) { return v == 0; })) e[0] = 1;
      MultiIndex M(e);
      auto seq = step_sequence(F, M, x, n, cfg.conv);
      for (size_t k = 1; k < seq.size(); ++k) mono.measure(seq[k] - seq[k - 1]);
      LimitEstimate s = step(F, M, x, n, cfg.tol, cfg.conv);
      bound.measure(s.value - kobayashi_distance(x, iterate_multiindex(F, M, x), cfg.conv));
    }
  }
  return {mono.done("diagonal sequences over five families; measured is the worst increase"),
          bound.done("s_M(x) - k(x, F^M x)")};
}

PropertyResult pseudodistance_bound(std::uint64_t seed, const VerifyConfig& cfg) {
  Tracker t("pseudodistance_below_distance", 1e-12);
  SemiModelParams p;
  p.max_iter = cfg.max_iter;
  p.tol = cfg.tol;
  p.conv = cfg.conv;
  auto cases = step_cases(cfg);
  for (size_t c = 0; c < cases.size(); ++c) {
    const auto& F = cases[c].F;
    p.max_iter = std::min(cfg.max_iter, cases[c].n);
    auto xs = sample_domain(F.domain(), F.dim(), 6, sub_seed(seed, 220 + c));
    auto ys = sample_domain(F.domain(), F.dim(), 6, sub_seed(seed, 230 + c));
    for (size_t i = 0; i < xs.size(); ++i) {
      LimitEstimate l = limit_pseudodistance(F, xs[i], ys[i], p);
      t.measure(l.value - kobayashi_distance(xs[i], ys[i], cfg.conv));
    }
  }
  return t.done("limit pseudodistance minus distance");
}

PropertyResult eigenvalue_history(std::uint64_t seed, const VerifyConfig& cfg) {
  Tracker t("eigenvalue_history_monotone", 1e-8);
  SemiModelParams p;
  p.max_iter = std::min(cfg.max_iter, 60);
  p.tol = cfg.tol;
  p.conv = cfg.conv;
  auto cases = step_cases(cfg);
  for (size_t c = 0; c + 1 < cases.size(); ++c) {
    const auto& F = cases[c].F;
    auto bases = sample_domain(F.domain(), F.dim(), 4, sub_seed(seed, 240 + c));
    for (const auto& r : kernels::pullback_forms(F, bases, p))
      for (size_t n = 1; n < r.history.size(); ++n)
        for (int k = 0; k < r.history[n].size(); ++k)
          t.measure(r.history[n][k] - r.history[n - 1][k]);
  }
  return t.done("relative eigenvalues of the pullback forms; measured is the worst increase");
}

// --------------------------------------------------------------- divrate

PropertyResult homogeneity(std::uint64_t seed, const VerifyConfig& cfg) {
  Tracker t("divrate_homogeneity", 0.0);
  int n_iter = std::min(cfg.max_iter, 120);
  std::vector<MapDescription> maps = {disc_hyperbolic(0.4), ExampleHyperbolic{3, 1},
                                      ExampleParabolic{3, 3, 1.0}, ExampleHyperbolic{4, 2}};
  for (size_t j = 0; j < maps.size(); ++j) {
    const auto& f = maps[j];
    DomainPoint x = f.domain() == DomainKind::Ball ? DomainPoint(BallPoint(CVec::Zero(1)))
                                                   : siegel_sample(f.dim(), sub_seed(seed, 300 + j));
    LimitEstimate c1 = divergence_rate(f, x, n_iter, cfg.tol, cfg.conv);
    for (int n : {2, 3}) {
      LimitEstimate cn = divergence_rate(MapDescription::iterate(f, n), x, n_iter, cfg.tol, cfg.conv);
      double slack = (c1.upper - c1.lower) * n + (cn.upper - cn.lower) + 1e-6;
      t.measure(std::abs(cn.value - n * c1.value) - slack);
    }
  }
  return t.done("|c(f^n) - n c(f)| minus the combined bracket width, n = 2, 3");
}

PropertyResult rate_vs_dilation(std::uint64_t seed, const VerifyConfig& cfg) {
  Tracker t("rate_matches_dilation", 0.05);
  DynamicsParams dp;
  dp.max_iter = cfg.max_iter;
  dp.tol = cfg.tol;
  dp.conv = cfg.conv;
  std::vector<MapDescription> maps = {disc_hyperbolic(0.3), disc_hyperbolic(0.7),
                                      ExampleHyperbolic{2, 1}, ExampleHyperbolic{4, 3}};
  for (size_t j = 0; j < maps.size(); ++j) {
    const auto& f = maps[j];
    DomainPoint x = f.domain() == DomainKind::Ball ? DomainPoint(BallPoint(CVec::Zero(1)))
                                                   : siegel_sample(f.dim(), sub_seed(seed, 320 + j));
    Classification c = denjoy_wolff(f, x, dp);
    if (c.kind != ClassKind::Hyperbolic) {
      t.fail(f.tag() + " not classified hyperbolic");
      continue;
    }
    double from_rate = std::exp(-c.rate.value * 2.0 / cfg.conv.scale);
    t.measure(std::abs(from_rate / c.lambda - 1.0));
  }
  return t.done("relative gap between exp(-c) and the reported dilation");
}

// ------------------------------------------------------------------- csm

struct GridEntry {
  int m, q, p;
  TypeEstimate f, g, pair;
};

std::vector<GridEntry> type_grid_entries(std::uint64_t seed, const VerifyConfig& cfg) {
  SemiModelParams sp;
  sp.max_iter = cfg.max_iter;
  sp.tol = cfg.tol;
  sp.conv = cfg.conv;
  std::vector<GridEntry> out;
  for (int m = 2; m <= 5; ++m)
    for (int q = 1; q <= m - 1; ++q)
      for (int p = 2; p <= m; ++p) {
        DomainPoint x = interior_sample(m, sub_seed(seed, 400 + 100 * m + 10 * q + p));
        MapDescription f = ExampleHyperbolic{m, q}, g = ExampleParabolic{m, p, 1.0};
        out.push_back({m, q, p, type_estimate(make_family({f}), x, sp),
                       type_estimate(make_family({g}), x, sp),
                       type_estimate(make_family({f, g}), x, sp)});
      }
  return out;
}

std::string triple(int m, int q, int p) {
  return "(m, q, p) = (" + std::to_string(m) + ", " + std::to_string(q) + ", " + std::to_string(p) + ")";
}

// ------------------------------------------------------------- obstructions

PropertyResult counterexample_validity() {
  Tracker t("counterexample_certified", 0.0);
  for (int m = 2; m <= 5; ++m)
    for (int u = 1; u <= m - 1; ++u)
      for (int v = 2; v <= m; ++v) {
        CommutingFamily F = counterexample(m, u, v, 1.0);
        t.sample();
        for (const auto& h : F.maps)
          if (!validate_self_map(h).valid) t.fail(h.tag() + " failed validation");
        if (commute_check(F.maps[0], F.maps[1]).kind != CertificateKind::Exact)
          t.fail("commutation not exact at m = " + std::to_string(m));
      }
  return t.done("self-map validation and exact commutation for every valid (m, u, v)");
}

PropertyResult gamma_functoriality(std::uint64_t, const VerifyConfig&) {
  Tracker t("gamma_functoriality", 1e-15);
  for (auto [m, q, p] : {std::tuple{5, 2, 4}, {4, 1, 3}, {3, 2, 2}}) {
    ExampleModels e = csm_example_family(m, q, p, 1.0);
    std::vector<MapDescription> gs = {ExampleHyperbolic{m, q}, ExampleParabolic{m, 2, 1.0},
                                      ExampleParabolic{m, m, -0.5},
                                      MapDescription::identity_siegel(m)};
    for (const auto* model : {&e.f, &e.pair})
      for (const auto& g1 : gs)
        for (const auto& g2 : gs) {
          try {
            auto lhs = lower_to_polynomial(gamma_induced(MapDescription::then(g2, g1), *model));
            auto rhs = compose(*lower_to_polynomial(gamma_induced(g2, *model)),
                               *lower_to_polynomial(gamma_induced(g1, *model)));
            t.measure(coefficient_distance(*lhs, rhs));
          } catch (const Unsupported&) {
            // g does not descend to this model; nothing to compare
          }
        }
  }
  return t.done("coefficient distance of Gamma(g1 g2) and Gamma(g1) Gamma(g2)");
}

PropertyResult dilation_transfer(std::uint64_t seed, const VerifyConfig& cfg) {
  Tracker t("dilation_transfer", 1e-6);
  DynamicsParams dp;
  dp.max_iter = cfg.max_iter;
  dp.tol = cfg.tol;
  dp.conv = cfg.conv;
  for (auto [m, q, p] : {std::tuple{2, 1, 2}, {4, 2, 3}, {5, 3, 5}}) {
    ExampleModels e = csm_example_family(m, q, p, 1.0);
    Classification c = denjoy_wolff(e.family.maps[0], siegel_sample(m, sub_seed(seed, 500 + m)), dp);
    if (c.kind != ClassKind::Hyperbolic) {
      t.fail("example f not classified hyperbolic");
      continue;
    }
    for (const auto* model : {&e.f, &e.pair}) t.measure(std::abs(dilation(model->autos[0]) - c.lambda));
  }
  std::mt19937_64 rng(sub_seed(seed, 510));
  for (int trial = 0; trial < 6; ++trial) {
    NormalFormFamily nf = random_normal_form_family(1 + trial % 3, 1 + trial % 2, rng);
    SemiModel s = csm_commuting_hyperbolic_automorphisms(nf.family, sub_seed(seed, 520 + trial));
    for (int j = 0; j < nf.family.size(); ++j) {
      Classification c = denjoy_wolff(nf.family.maps[j], BallPoint(CVec::Zero(nf.family.dim())), dp);
      if (c.kind != ClassKind::Hyperbolic) {
        t.fail("normal-form member not classified hyperbolic");
        continue;
      }
      t.measure(std::abs(dilation(s.autos[j]) - c.lambda));
    }
  }
  return t.done("model dilation against the classified dilation of the member");
}

}  // namespace

bool SuiteReport::passed() const {
  return std::all_of(properties.begin(), properties.end(), [](const auto& p) { return p.passed; });
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"distances", "steps", "divrate", "csm",
                                                 "obstructions"};
  return names;
}

PropertyResult type_grid(std::uint64_t seed, const VerifyConfig& cfg) {
  Tracker t("type_grid", 0.0);
  double worst_gap = INFINITY;
  for (const auto& e : type_grid_entries(seed, cfg)) {
    int expect_pair = std::min(e.p - 1, e.q);
    for (auto [est, want, who] : {std::tuple{&e.f, e.q, "f"}, {&e.g, e.p, "g"},
                                  {&e.pair, expect_pair, "pair"}}) {
      t.sample();
      worst_gap = std::min(worst_gap, est->gap);
      if (!est->d || *est->d != want)
        t.fail(std::string(who) + " at " + triple(e.m, e.q, e.p) + " gave " +
               (est->d ? std::to_string(*est->d) : "unknown"));
      else if (est->gap < 1e3)
        t.fail(std::string(who) + " at " + triple(e.m, e.q, e.p) + " has a small gap");
    }
  }
  std::ostringstream os;
  os << "types q, p and min(p-1, q) over m = 2..5; smallest gap " << worst_gap;
  return t.done(os.str());
}

PropertyResult type_monotonicity(std::uint64_t seed, const VerifyConfig& cfg) {
  Tracker t("type_monotonicity", 0.0);
  for (const auto& e : type_grid_entries(seed, cfg)) {
    t.sample();
    if (!e.f.d || !e.g.d || !e.pair.d) {
      t.fail("missing type at " + triple(e.m, e.q, e.p));
      continue;
    }
    if (*e.pair.d > std::min(*e.f.d, *e.g.d)) t.fail("type grew at " + triple(e.m, e.q, e.p));
  }
  return t.done("type of {f, g} against the types of {f} and {g}");
}

PropertyResult divcomm(std::uint64_t seed, const VerifyConfig& cfg, int samples) {
  Tracker t("csm_step_identity", 1e-5);
  std::mt19937_64 rng(sub_seed(seed, 600));
  std::uniform_int_distribution<int> mi(0, 3);
  const std::vector<std::tuple<int, int, int>> cases = {{2, 1, 2}, {3, 1, 3}, {4, 2, 3}, {5, 3, 5}};
  for (int i = 0; i < samples; ++i) {
    auto [m, q, p] = cases[i % cases.size()];
    ExampleModels e = csm_example_family(m, q, p, 1.0);
    std::vector<MapDescription> taus;
    for (const auto& a : e.pair.autos) taus.push_back(to_map(a));
    DomainPoint x = siegel_sample(m, sub_seed(seed, 601 + i));
    MultiIndex M({mi(rng), mi(rng)});
    DomainPoint lx = apply_intertwiner(*e.pair.intertwiner, x);
    double base = kobayashi_distance(lx, apply_multi(taus, M, lx), cfg.conv);
    LimitEstimate s = step(e.family, M, x, cfg.max_iter, cfg.tol, cfg.conv);
    t.measure(std::abs(base - s.value));
  }
  return t.done("|k(l x, T^M l x) - s_M(x)| on the example pair models");
}

PropertyResult divrate_transfer(std::uint64_t seed, const VerifyConfig& cfg) {
  Tracker t("csm_rate_identity", 0.0);
  int n_iter = std::min(cfg.max_iter, 120);
  for (auto [m, q, p] : {std::tuple{2, 1, 2}, {4, 2, 3}, {5, 3, 5}}) {
    ExampleModels e = csm_example_family(m, q, p, 1.0);
    for (int j = 0; j < 2; ++j) {
      DomainPoint x = siegel_sample(m, sub_seed(seed, 700 + 10 * m + j));
      LimitEstimate cf = divergence_rate(e.family.maps[j], x, n_iter, cfg.tol, cfg.conv);
      LimitEstimate ct = divergence_rate(to_map(e.pair.autos[j]),
                                         apply_intertwiner(*e.pair.intertwiner, x), n_iter, cfg.tol,
                                         cfg.conv);
      double slack = (cf.upper - cf.lower) + (ct.upper - ct.lower) + 1e-6;
      t.measure(std::abs(cf.value - ct.value) - slack);
    }
  }
  return t.done("|c(tau_j) - c(f_j)| minus the combined bracket width");
}

PropertyResult normal_form_recovery(std::uint64_t seed, const VerifyConfig&, int trials) {
  Tracker t("normal_form_recovery", 1e-8);
  std::mt19937_64 rng(sub_seed(seed, 800));
  for (int trial = 0; trial < trials; ++trial) {
    int q = 1 + trial % 4, k = 1 + (trial / 4) % 3;
    NormalFormFamily nf = random_normal_form_family(q, k, rng);
    SemiModel s = csm_commuting_hyperbolic_automorphisms(nf.family, sub_seed(seed, 801 + trial));
    if (s.d != q || static_cast<int>(s.autos.size()) != k) {
      t.fail("wrong model shape");
      continue;
    }
    std::vector<SiegelHyperbolic> got;
    for (const auto& a : s.autos) got.push_back(std::get<SiegelHyperbolic>(a));
    for (int j = 0; j < k; ++j) {
      if ((got[j].lambda < 1.0) != (nf.forms[j].lambda < 1.0)) t.fail("form type flipped");
      t.measure(std::abs(dilation(got[j]) - dilation(nf.forms[j])));
    }
    // columns come back sorted by the phases of member 0, lexicographically
    for (int a = 0; a + 1 < q - 1; ++a)
      if (got[0].phases[a] > got[0].phases[a + 1] + 1e-9) t.fail("phase order convention broken");
    std::vector<bool> used(q - 1, false);
    for (int a = 0; a < q - 1; ++a) {
      int best = -1;
      double best_err = INFINITY;
      for (int b = 0; b < q - 1; ++b) {
        if (used[b]) continue;
        double err = 0.0;
        for (int j = 0; j < k; ++j) err = std::max(err, phase_gap(got[j].phases[a], nf.forms[j].phases[b]));
        if (err < best_err) best_err = err, best = b;
      }
      used[best] = true;
      t.measure(best_err);
    }
  }
  return t.done("dilations and phase tuples against the construction, q <= 4, k <= 3");
}

PropertyResult log2_bracket(std::uint64_t seed, const VerifyConfig& cfg) {
  Tracker t("divrate_log2_bracket", 1e-3);
  double expect = 0.5 * cfg.conv.scale * std::log(2.0);
  for (int m = 2; m <= 5; ++m)
    for (int q = 1; q <= m - 1; ++q) {
      DomainPoint x = siegel_sample(m, sub_seed(seed, 900 + 10 * m + q));
      LimitEstimate e = divergence_rate(ExampleHyperbolic{m, q}, x, 50, cfg.tol, cfg.conv);
      t.measure(std::abs(e.value - expect));
      if (e.lower > expect + 1e-12 || e.upper < expect - 1e-12)
        t.fail("bracket misses the rate at (m, q) = (" + std::to_string(m) + ", " + std::to_string(q) + ")");
    }
  return t.done("example hyperbolic maps with N = 50");
}

PropertyResult disc_rate(std::uint64_t, const VerifyConfig& cfg) {
  Tracker t("divrate_disc_closed_form", 1e-6);
  for (double s : {0.1, 0.25, 0.4, 0.5, 0.65, 0.8, -0.3, -0.7}) {
    double lambda = (1 - std::abs(s)) / (1 + std::abs(s));
    LimitEstimate e =
        divergence_rate(disc_hyperbolic(s), BallPoint(CVec::Zero(1)), cfg.max_iter, cfg.tol, cfg.conv);
    t.measure(std::abs(e.value + 0.5 * cfg.conv.scale * std::log(lambda)));
  }
  return t.done("|c + log lambda| for disc automorphisms with closed-form dilation");
}

PropertyResult synthetic_violations(std::uint64_t seed, int per_clause) {
  Tracker t("synthetic_violations", 0.0);
  std::mt19937_64 rng(sub_seed(seed, 1000));
  for (Clause c : {Clause::HyperbolicFullType, Clause::ParabolicTypeZero, Clause::ParabolicTypeOneStep})
    for (int i = 0; i < per_clause; ++i) {
      auto [a, b] = synthetic_violation(c, rng);
      PairVerdict v = check_pair(a, b);
      t.sample();
      if (v.kind != VerdictKind::Inconsistent || v.clause != c)
        t.fail("clause " + std::to_string(static_cast<int>(c)) + " input judged " + to_string(v.kind));
    }
  return t.done(std::to_string(per_clause) + " inputs per clause");
}

PropertyResult generator_consistency(std::uint64_t seed, const VerifyConfig& cfg) {
  Tracker t("generator_consistent", 0.0);
  DynamicsParams dp;
  dp.max_iter = cfg.max_iter;
  dp.tol = cfg.tol;
  dp.conv = cfg.conv;
  SemiModelParams sp;
  sp.max_iter = cfg.max_iter;
  sp.tol = cfg.tol;
  sp.conv = cfg.conv;
  for (int m = 2; m <= 5; ++m)
    for (int u = 1; u <= m - 1; ++u)
      for (int v = 2; v <= m; ++v) {
        CommutingFamily F = counterexample(m, u, v, 1.0);
        DomainPoint x = interior_sample(m, sub_seed(seed, 1100 + 100 * m + 10 * u + v));
        PairVerdict verdict = check_pair(profile_map(F.maps[0], x, dp, sp), profile_map(F.maps[1], x, dp, sp));
        t.sample();
        if (verdict.kind != VerdictKind::Consistent)
          t.fail("(m, u, v) = (" + std::to_string(m) + ", " + std::to_string(u) + ", " +
                 std::to_string(v) + ") judged " + to_string(verdict.kind));
      }
  return t.done("profiled counterexample pairs for every valid (m, u, v), m <= 5");
}

PropertyResult common_dw_families(std::uint64_t seed, const VerifyConfig& cfg, int families) {
  Tracker t("common_dw_point", 0.0);
  DynamicsParams dp;
  dp.max_iter = cfg.max_iter;
  dp.tol = cfg.tol;
  dp.conv = cfg.conv;
  std::mt19937_64 rng(sub_seed(seed, 1200));
  for (int i = 0; i < families; ++i) {
    NormalFormFamily nf = random_normal_form_family(1 + i % 4, 1 + (i / 4) % 3, rng);
    DwVerdict d = common_dw_check(nf.family, dp);
    t.sample();
    if (d.kind != VerdictKind::Consistent) t.fail("family " + std::to_string(i) + ": " + d.reason);
    if (d.points.size() > 2) t.fail("family " + std::to_string(i) + " has three or more points");
  }
  return t.done(std::to_string(families) + " random normal-form families");
}

SuiteReport run_suite(const std::string& name, std::uint64_t seed, const VerifyConfig& cfg) {
  cfg.conv.validate();
  if (!(cfg.tol > 0) || cfg.max_iter < 1) throw InvalidArgument("verify: need tol > 0 and max_iter >= 1");
  SuiteReport r{name, seed, {}};
  auto& P = r.properties;
  if (name == "distances") {
    P = {distance_symmetry(seed, cfg), distance_triangle(seed, cfg), distance_contraction(seed, cfg),
         distance_invariance(seed, cfg), cayley_isometry(seed, cfg), metric_consistency(seed, cfg)};
  } else if (name == "steps") {
    auto [mono, bound] = step_properties(seed, cfg);
    P = {mono, bound, pseudodistance_bound(seed, cfg), eigenvalue_history(seed, cfg)};
  } else if (name == "divrate") {
    P = {log2_bracket(seed, cfg), disc_rate(seed, cfg), homogeneity(seed, cfg),
         rate_vs_dilation(seed, cfg)};
  } else if (name == "csm") {
    P = {type_grid(seed, cfg),        type_monotonicity(seed, cfg),  divcomm(seed, cfg),
         divrate_transfer(seed, cfg), normal_form_recovery(seed, cfg), dilation_transfer(seed, cfg),
         gamma_functoriality(seed, cfg)};
  } else if (name == "obstructions") {
    P = {synthetic_violations(seed), generator_consistency(seed, cfg), common_dw_families(seed, cfg),
         counterexample_validity()};
  } else {
    throw InvalidArgument("unknown suite '" + name + "'");
  }
  return r;
}

}  // namespace balldyn::verify
