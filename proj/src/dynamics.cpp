#include "balldyn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace balldyn {

std::string to_string(ClassKind k) {
  switch (k) {
    case ClassKind::Elliptic: return "elliptic";
    case ClassKind::Hyperbolic: return "hyperbolic";
    case ClassKind::Parabolic: return "parabolic";
    default: return "unknown";
  }
}

namespace {

void poll(const CancelToken* c) {
  if (c && c->is_cancelled()) throw Cancelled("computation cancelled");
}

// c(f) from a_m = k(f^m x, x), m = 1..N.
LimitEstimate rate_from_distances(const std::vector<double>& a, double tol) {
  LimitEstimate est;
  int N = static_cast<int>(a.size());
  est.iterations = N;
  if (N == 0) return est;
  std::vector<double> inc(N);
  double rigorous = a[0];
  for (int m = 0; m < N; ++m) {
    inc[m] = a[m] - (m ? a[m - 1] : 0.0);
    rigorous = std::min(rigorous, a[m] / (m + 1));
  }
  std::optional<Extrapolation> geo = geometric_tail(inc);
  Extrapolation ex = geo ? *geo : richardson(inc);
  double err = ex.error + 1e-14 * std::abs(ex.value);
  if (!geo && N >= 16) {
    // the tableau error alone is optimistic for slowly converging increments
    Extrapolation half = richardson(std::vector<double>(inc.begin(), inc.begin() + N / 2));
    err = std::max(err, std::abs(ex.value - half.value));
  }
  est.upper = std::max(0.0, std::min(rigorous, ex.value + err));
  est.lower = std::max(0.0, std::min(ex.value - err, est.upper));
  est.value = std::clamp(ex.value, est.lower, est.upper);
  est.converged = est.upper - est.lower < tol;
  return est;
}

bool all_automorphisms(const CommutingFamily& F) {
  for (const auto& f : F.maps)
    if (!lower_to_automorphism(f)) return false;
  return true;
}

std::optional<DomainPoint> interior_fixed_point(const MapDescription& f) {
  if (auto g = lower_to_automorphism(f)) {
    CMat G = lift(*g);
    int q = g->U.rows();
    Eigen::ComplexEigenSolver<CMat> es(G);
    std::optional<DomainPoint> best;
    double best_norm = 0.0;
    for (int k = 0; k <= q; ++k) {
      CVec v = es.eigenvectors().col(k);
      double hn = v.head(q).squaredNorm() - std::norm(v[q]);
      if (hn < best_norm && std::abs(v[q]) > 0) {
        CVec z = v.head(q) / v[q];
        if (z.norm() < 1.0) {
          best = BallPoint(z);
          best_norm = hn;
        }
      }
    }
    return best;
  }
  if (auto p = lower_to_polynomial(f)) {
    int n = p->dim() - 1;
    CMat IA = CMat::Identity(n, n) - p->A;
    if (std::abs(1.0 - p->alpha) < 1e-12) return std::nullopt;
    Eigen::FullPivLU<CMat> lu(IA);
    if (n > 0 && !lu.isInvertible()) return std::nullopt;
    CVec w = n > 0 ? CVec(lu.solve(p->b)) : CVec(0);
    cplx z = (dot_bilinear(p->c, w) + kI * dot_bilinear(w, p->S * w) + p->beta) / (1.0 - p->alpha);
    if (z.imag() - w.squaredNorm() > 0.0) return SiegelPoint(z, w).renormalized();
  }
  return std::nullopt;
}

BoundaryPoint extrapolate_boundary(const std::vector<BallPoint>& pts) {
  int N = static_cast<int>(pts.size());
  int q = pts[0].dim();
  CVec out(q);
  for (int j = 0; j < q; ++j) {
    std::vector<double> re(N), im(N);
    for (int n = 0; n < N; ++n) {
      re[n] = pts[n].coords()[j].real();
      im[n] = pts[n].coords()[j].imag();
    }
    out[j] = cplx(richardson(re).value, richardson(im).value);
  }
  return BoundaryPoint(out);
}

}  // namespace

DomainPoint diagonal_step(const CommutingFamily& F, const DomainPoint& y) {
  DomainPoint out = y;
  for (int j = F.size() - 1; j >= 0; --j) out = eval(F.maps[j], out);
  return out;
}

BallPoint to_ball(const DomainPoint& x) {
  if (const auto* b = std::get_if<BallPoint>(&x)) return *b;
  return cayley_inverse(std::get<SiegelPoint>(x));
}

std::vector<DomainPoint> orbit(const MapDescription& f, const DomainPoint& x, int n,
                               const CancelToken* cancel) {
  if (n < 0) throw InvalidArgument("orbit: n must be >= 0");
  std::vector<DomainPoint> out;
  out.reserve(n + 1);
  out.push_back(x);
  for (int k = 0; k < n; ++k) {
    poll(cancel);
    out.push_back(eval(f, out.back()));
  }
  return out;
}

LimitEstimate divergence_rate(const MapDescription& f, const DomainPoint& x, int max_iter,
                              double tol, const MetricConvention& conv) {
  if (max_iter < 1) throw InvalidArgument("divergence_rate: max_iter must be >= 1");
  auto orb = orbit(f, x, max_iter);
  std::vector<double> a(max_iter);
  for (int m = 1; m <= max_iter; ++m) a[m - 1] = kobayashi_distance(orb[m], x, conv);
  return rate_from_distances(a, tol);
}

std::vector<double> step_sequence(const CommutingFamily& F, const MultiIndex& M,
                                  const DomainPoint& x, int max_iter,
                                  const MetricConvention& conv) {
  if (F.size() != M.size()) throw InvalidArgument("step: length mismatch");
  std::vector<double> b;
  b.reserve(max_iter + 1);
  DomainPoint y = x;
  for (int n = 0; n <= max_iter; ++n) {
    b.push_back(kobayashi_distance(y, iterate_multiindex(F, M, y), conv));
    if (n < max_iter) y = diagonal_step(F, y);
  }
  return b;
}

LimitEstimate step(const CommutingFamily& F, const MultiIndex& M, const DomainPoint& x,
                   int max_iter, double tol, const MetricConvention& conv) {
  if (F.size() != M.size()) throw InvalidArgument("step: length mismatch");
  if (max_iter < 1) throw InvalidArgument("step: max_iter must be >= 1");
  if (all_automorphisms(F)) {
    // isometries: the diagonal sequence is constant
    double v = kobayashi_distance(x, iterate_multiindex(F, M, x), conv);
    return {v, v, v, 0, true};
  }
  auto b = step_sequence(F, M, x, max_iter, conv);
#ifndef NDEBUG
  for (size_t n = 1; n < b.size(); ++n)
    if (b[n] > b[n - 1] + 1e-10 * std::max(1.0, b[n - 1]))
      throw InvariantViolation("step: diagonal sequence increased");
#endif
  return estimate_from_above(b, tol);
}

Classification denjoy_wolff(const MapDescription& f, const DomainPoint& x,
                            const DynamicsParams& params) {
  params.conv.validate();
  if (params.max_iter < 8) throw InvalidArgument("denjoy_wolff: max_iter must be >= 8");
  Classification out;
  int N = params.max_iter;
  auto orb = orbit(f, x, N, params.cancel);
  out.iterations = N;
  std::vector<double> a(N), steps(N);
  double amax = 0.0;
  for (int n = 0; n < N; ++n) {
    poll(params.cancel);
    a[n] = kobayashi_distance(orb[n + 1], x, params.conv);
    steps[n] = kobayashi_distance(orb[n], orb[n + 1], params.conv);
    amax = std::max(amax, a[n]);
  }
  out.residuals = steps;
  int half = N / 2;
  double first = *std::max_element(a.begin(), a.begin() + half);
  double second = *std::max_element(a.begin() + half, a.end());

  bool cauchy = true;
  for (int n = N - 5; n < N; ++n) cauchy = cauchy && steps[n] < 1e-10;
  if ((cauchy && amax < params.k_max) || second <= first + 0.05) {
    out.kind = ClassKind::Elliptic;
    auto fp = interior_fixed_point(f);
    out.fixed_point = fp ? *fp : orb.back();
    out.note = cauchy ? "orbit converges in the interior" : "orbit stays bounded";
    return out;
  }
  if (second <= first + 0.125 * params.conv.scale) {
    out.kind = ClassKind::Unknown;
    out.note = "orbit neither settles nor escapes";
    return out;
  }

  out.rate = rate_from_distances(a, params.tol);
  double factor = 2.0 / params.conv.scale;
  out.lambda_rate = std::exp(-out.rate.value * factor);
  double err_rate = out.lambda_rate * factor * (out.rate.upper - out.rate.lower);

  std::vector<BallPoint> balls;
  balls.reserve(N + 1);
  for (const auto& p : orb) balls.push_back(to_ball(p));
  std::vector<double> quot(N);
  for (int n = 0; n < N; ++n) quot[n] = balls[n + 1].gap() / balls[n].gap();
  Extrapolation ex = richardson(quot);
  out.lambda_quotient = ex.value;
  double err_quot = ex.error;
  if (N >= 16)
    err_quot = std::max(err_quot, std::abs(ex.value - richardson({quot.begin(), quot.begin() + N / 2}).value));

  out.lambda = err_quot < err_rate ? out.lambda_quotient : out.lambda_rate;
  // dilations never exceed 1; an overshoot inside the error bar is read as 1
  if (out.lambda > 1.0 && out.lambda - std::min(err_quot, err_rate) <= 1.0) out.lambda = 1.0;
  double lq = out.lambda_quotient, lr = out.lambda_rate;
  if (std::abs(lq - lr) > 0.05 * std::max(lq, lr)) {
    out.kind = ClassKind::Unknown;
    out.note = "dilation estimates disagree";
    return out;
  }
  if (out.lambda < 1.0 - params.tol_lambda) out.kind = ClassKind::Hyperbolic;
  else if (std::abs(out.lambda - 1.0) <= params.tol_lambda) out.kind = ClassKind::Parabolic;
  else {
    out.kind = ClassKind::Unknown;
    out.note = "dilation too close to 1 to decide";
    return out;
  }

  // Denjoy-Wolff point
  auto aut = lower_to_automorphism(f);
  if (aut && out.kind == ClassKind::Hyperbolic) {
    CMat G = lift(*aut);
    Eigen::ComplexEigenSolver<CMat> es(G);
    int best = 0;
    for (int k = 1; k < G.rows(); ++k)
      if (std::abs(es.eigenvalues()[k]) > std::abs(es.eigenvalues()[best])) best = k;
    CVec v = es.eigenvectors().col(best);
    int q = aut->U.rows();
    out.dw = BoundaryPoint(CVec(v.head(q) / v[q]));
    out.note = "attracting fixed point of the lift";
  } else if (const auto* s = std::get_if<SiegelPoint>(&orb.back());
             s && s->log2_abs_z() - std::get<SiegelPoint>(orb[half]).log2_abs_z() > 0.5) {
    out.dw = BoundaryPoint::e1(f.dim());
    out.note = "orbit escapes to infinity in the Siegel picture";
  } else {
    out.dw = extrapolate_boundary(balls);
    out.note = "extrapolated orbit limit";
  }
  return out;
}

// ------------------------------------------------------- geodesic restriction

cplx mobius_apply(const Eigen::Matrix2cd& m, cplx z) {
  return (m(0, 0) * z + m(0, 1)) / (m(1, 0) * z + m(1, 1));
}

namespace {

Eigen::Matrix2cd to_zero_one_inf(cplx z1, cplx z2, cplx z3) {
  Eigen::Matrix2cd s;
  s << z2 - z3, -z1 * (z2 - z3), z2 - z1, -z3 * (z2 - z1);
  return s;
}

Eigen::Matrix2cd normalized(const Eigen::Matrix2cd& m) {
  cplx d = std::sqrt(m.determinant());
  return m / d;
}

BallPoint eval_in_ball(const MapDescription& f, const BallPoint& x) {
  if (f.domain() == DomainKind::Ball) return std::get<BallPoint>(eval(f, x));
  return cayley_inverse(std::get<SiegelPoint>(eval(f, cayley(x))));
}

}  // namespace

GeodesicRestriction restrict_to_geodesic(const MapDescription& f, const BoundaryPoint& p,
                                         const BoundaryPoint& p2, int samples,
                                         std::uint64_t seed) {
  if (p.dim() != f.dim() || p2.dim() != f.dim())
    throw InvalidArgument("restrict_to_geodesic: dimension mismatch");
  if (chordal_distance(p, p2) < 1e-9)
    throw InvalidArgument("restrict_to_geodesic: boundary points coincide");
  if (samples < 4) samples = 4;
  GeodesicRestriction out;
  CVec v = p2.coords() - p.coords();
  CVec c = p.coords() - (v.dot(p.coords()) / v.squaredNorm()) * v;
  double R = std::sqrt((1.0 - c.norm()) * (1.0 + c.norm()));
  CVec u = v / v.norm();
  out.center = c;
  out.direction = u;
  out.radius = R;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<cplx> zs, ws;
  for (int i = 0; i < samples; ++i) {
    cplx zeta = std::polar(0.8 * std::sqrt(unif(rng)), 2.0 * M_PI * unif(rng));
    BallPoint x(CVec(c + R * zeta * u), R * R * (1.0 - std::norm(zeta)));
    BallPoint y = eval_in_ball(f, x);
    CVec d = y.coords() - c;
    cplx along = u.dot(d);
    double off = (d - along * u).norm();
    out.max_residual = std::max(out.max_residual, off);
    if (off > 1e-8) {
      out.invariant = false;
      out.witness = x;
      out.note = "slice is not invariant";
      return out;
    }
    zs.push_back(zeta);
    ws.push_back(along / R);
  }
  out.invariant = true;
  Eigen::Matrix2cd S = to_zero_one_inf(zs[0], zs[1], zs[2]);
  Eigen::Matrix2cd T = to_zero_one_inf(ws[0], ws[1], ws[2]);
  Eigen::Matrix2cd m = normalized(T.inverse() * S);
  out.mobius = m;
  double worst = 0.0;
  for (size_t i = 0; i < zs.size(); ++i)
    worst = std::max(worst, std::abs(mobius_apply(m, zs[i]) - ws[i]));
  out.max_residual = std::max(out.max_residual, worst);
  if (worst > 1e-8) {
    out.note = "restriction is not a Mobius map";
    return out;
  }
  out.is_identity = std::min((m - Eigen::Matrix2cd::Identity()).norm(),
                             (m + Eigen::Matrix2cd::Identity()).norm()) < 1e-8;
  out.is_automorphism = true;
  for (int k = 0; k < 16; ++k) {
    cplx xi = std::polar(1.0, 2.0 * M_PI * k / 16.0);
    if (std::abs(std::abs(mobius_apply(m, xi)) - 1.0) > 1e-8) out.is_automorphism = false;
  }
  if (out.is_identity) {
    out.note = "identity on the slice";
    return out;
  }
  Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(m);
  out.dilation = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 2; ++k) {
    Eigen::Vector2cd e = es.eigenvectors().col(k);
    if (std::abs(e[1]) < 1e-14) continue;
    cplx xi = e[0] / e[1];
    if (std::abs(std::abs(xi) - 1.0) > 1e-7) continue;
    cplx den = m(1, 0) * xi + m(1, 1);
    double mult = std::abs(1.0 / (den * den));
    out.boundary_fixed_points.push_back({xi, BoundaryPoint(CVec(c + R * xi * u)), mult});
    out.dilation = std::min(out.dilation, mult);
  }
  if (out.boundary_fixed_points.empty()) out.dilation = 1.0;
  out.is_hyperbolic = out.is_automorphism && out.boundary_fixed_points.size() == 2 &&
                      std::abs(out.dilation - 1.0) > 1e-8;
  out.note = out.is_hyperbolic ? "hyperbolic automorphism of the slice" : "Mobius self-map";
  return out;
}

}  // namespace balldyn
