#include "balldyn/maps.hpp"

#include <cmath>
#include <random>

namespace balldyn {

// ------------------------------------------------------------- MultiIndex

MultiIndex::MultiIndex(std::vector<int> e) : entries(std::move(e)) {
  for (int n : entries)
    if (n < 0) throw InvalidArgument("MultiIndex: entries must be nonnegative");
}

MultiIndex MultiIndex::zero(int k) { return MultiIndex(std::vector<int>(k, 0)); }

MultiIndex MultiIndex::unit(int j, int k) {
  if (j < 0 || j >= k) throw InvalidArgument("MultiIndex::unit: slot out of range");
  std::vector<int> e(k, 0);
  e[j] = 1;
  return MultiIndex(e);
}

MultiIndex MultiIndex::diagonal(int n, int k) { return MultiIndex(std::vector<int>(k, n)); }

MultiIndex MultiIndex::operator+(const MultiIndex& o) const {
  if (size() != o.size()) throw InvalidArgument("MultiIndex: length mismatch");
  std::vector<int> e(entries);
  for (int j = 0; j < size(); ++j) e[j] += o.entries[j];
  return MultiIndex(e);
}

bool MultiIndex::dominates(const MultiIndex& o) const {
  if (size() != o.size()) throw InvalidArgument("MultiIndex: length mismatch");
  for (int j = 0; j < size(); ++j)
    if (entries[j] < o.entries[j]) return false;
  return true;
}

// -------------------------------------------------------- SiegelPolynomial

SiegelPolynomial SiegelPolynomial::identity(int m) {
  return linear(1.0, CMat::Identity(m - 1, m - 1));
}

SiegelPolynomial SiegelPolynomial::linear(double alpha, const CMat& A) {
  SiegelPolynomial p;
  int n = static_cast<int>(A.rows());
  p.alpha = alpha;
  p.c = CVec::Zero(n);
  p.S = CMat::Zero(n, n);
  p.A = A;
  p.b = CVec::Zero(n);
  return p;
}

namespace {

SiegelPolynomial lower(const ExampleHyperbolic& f) {
  int n = f.m - 1;
  CMat A = CMat::Zero(n, n);
  A(0, 0) = 1.0;
  for (int j = 1; j < f.q; ++j) A(j, j) = M_SQRT2;
  SiegelPolynomial p = SiegelPolynomial::linear(2.0, A);
  p.S(0, 0) = 1.0;
  return p;
}

SiegelPolynomial lower(const ExampleParabolic& f) {
  int n = f.m - 1;
  CMat A = CMat::Zero(n, n);
  for (int j = 0; j < f.p - 1; ++j) A(j, j) = 1.0;
  SiegelPolynomial p = SiegelPolynomial::linear(1.0, A);
  p.c[0] = -2.0 * f.r;
  p.beta = cplx(0.0, f.r * f.r);
  p.b[0] = cplx(0.0, -f.r);
  return p;
}

struct DomainInfo {
  DomainKind kind;
  int dim;
};

}  // namespace

// ---------------------------------------------------------- MapDescription

MapDescription::MapDescription(BallAutomorphism f) : v_(std::move(f)) { check(); }
MapDescription::MapDescription(SiegelPolynomial f) : v_(std::move(f)) { check(); }
MapDescription::MapDescription(ExampleHyperbolic f) : v_(f) { check(); }
MapDescription::MapDescription(ExampleParabolic f) : v_(f) { check(); }
MapDescription::MapDescription(Composition f) : v_(std::move(f)) { check(); }
MapDescription::MapDescription(Iterate f) : v_(std::move(f)) { check(); }

MapDescription MapDescription::identity_ball(int q) {
  return BallAutomorphism{CMat::Identity(q, q), CVec::Zero(q)};
}

MapDescription MapDescription::identity_siegel(int m) { return SiegelPolynomial::identity(m); }

MapDescription MapDescription::iterate(const MapDescription& base, int power) {
  return Iterate{std::make_shared<const MapDescription>(base), power};
}

MapDescription MapDescription::then(const MapDescription& f, const MapDescription& g) {
  return Composition{{f, g}};
}

std::string MapDescription::tag() const {
  switch (v_.index()) {
    case 0: return "ball_automorphism";
    case 1: return "siegel_polynomial";
    case 2: return "example_hyperbolic";
    case 3: return "example_parabolic";
    case 4: return "composition";
    default: return "iterate";
  }
}

void MapDescription::check() {
  if (auto* f = std::get_if<BallAutomorphism>(&v_)) {
    int q = static_cast<int>(f->a.size());
    if (q < 1 || f->U.rows() != q || f->U.cols() != q)
      throw InvalidArgument("BallAutomorphism: U must be q x q with q = dim a >= 1");
    if (!f->U.allFinite() || !f->a.allFinite())
      throw InvalidArgument("BallAutomorphism: non-finite parameters");
    if (unitarity_defect(f->U) > 1e-12 * q)
      throw InvalidArgument("BallAutomorphism: U is not unitary");
    if (!(f->a.norm() < 1.0)) throw InvalidArgument("BallAutomorphism: |a| must be < 1");
    domain_ = DomainKind::Ball;
    dim_ = q;
  } else if (auto* f = std::get_if<SiegelPolynomial>(&v_)) {
    int n = static_cast<int>(f->A.rows());
    if (f->A.cols() != n || f->c.size() != n || f->b.size() != n || f->S.rows() != n ||
        f->S.cols() != n)
      throw InvalidArgument("SiegelPolynomial: inconsistent coefficient sizes");
    if (!std::isfinite(f->alpha) || !f->A.allFinite() || !f->c.allFinite() ||
        !f->b.allFinite() || !f->S.allFinite() || !std::isfinite(std::abs(f->beta)))
      throw InvalidArgument("SiegelPolynomial: non-finite coefficients");
    if ((f->S - f->S.transpose()).norm() > 1e-12 * std::max(1.0, f->S.norm()))
      throw InvalidArgument("SiegelPolynomial: S must be symmetric");
    f->S = 0.5 * (f->S + f->S.transpose());
    domain_ = DomainKind::Siegel;
    dim_ = n + 1;
  } else if (auto* f = std::get_if<ExampleHyperbolic>(&v_)) {
    if (f->m < 2 || f->q < 1 || f->q > f->m - 1)
      throw InvalidArgument("ExampleHyperbolic: need m >= 2 and 1 <= q <= m-1");
    domain_ = DomainKind::Siegel;
    dim_ = f->m;
  } else if (auto* f = std::get_if<ExampleParabolic>(&v_)) {
    if (f->m < 2 || f->p < 2 || f->p > f->m)
      throw InvalidArgument("ExampleParabolic: need m >= 2 and 2 <= p <= m");
    if (!(f->r != 0.0) || !std::isfinite(f->r))
      throw InvalidArgument("ExampleParabolic: r must be finite and nonzero");
    domain_ = DomainKind::Siegel;
    dim_ = f->m;
  } else if (auto* f = std::get_if<Composition>(&v_)) {
    if (f->maps.empty()) throw InvalidArgument("Composition: empty list");
    domain_ = f->maps.front().domain();
    dim_ = f->maps.front().dim();
    for (const auto& g : f->maps)
      if (g.domain() != domain_ || g.dim() != dim_)
        throw InvalidArgument("Composition: members act on different domains");
  } else {
    auto& it = std::get<Iterate>(v_);
    if (!it.base) throw InvalidArgument("Iterate: missing base map");
    if (it.power < 0) throw InvalidArgument("Iterate: power must be >= 0");
    domain_ = it.base->domain();
    dim_ = it.base->dim();
  }
}

std::string to_string(CertificateKind k) {
  switch (k) {
    case CertificateKind::Exact: return "exact";
    case CertificateKind::Numeric: return "numeric";
    default: return "unverified";
  }
}

DomainKind CommutingFamily::domain() const {
  if (maps.empty()) throw InvalidArgument("CommutingFamily: empty");
  return maps.front().domain();
}

int CommutingFamily::dim() const {
  if (maps.empty()) throw InvalidArgument("CommutingFamily: empty");
  return maps.front().dim();
}

// -------------------------------------------------------------- evaluation

namespace {

void require_domain(const MapDescription& f, const DomainPoint& x) {
  if (kind_of(x) != f.domain() || dim_of(x) != f.dim())
    throw InvalidArgument("map applied to a point of another domain (" + f.tag() + ")");
}

BallPoint eval_ball(const BallAutomorphism& f, const BallPoint& x) {
  const CVec& a = f.a;
  const CVec& z = x.coords();
  double an2 = a.squaredNorm();
  cplx az = a.dot(z);
  cplx den = 1.0 - az;
  CVec num;
  if (an2 == 0.0) {
    num = z;
  } else {
    CVec pz = a * (az / an2);
    num = pz + std::sqrt(1.0 - an2) * (z - pz) - a;
  }
  CVec out = f.U * (num / den);
  double defect = (1.0 - an2) * x.defect() / std::norm(den);
  return BallPoint(out, defect);
}

CMat jac_ball(const BallAutomorphism& f, const BallPoint& x) {
  const CVec& a = f.a;
  const CVec& z = x.coords();
  int q = static_cast<int>(a.size());
  double an2 = a.squaredNorm();
  if (an2 == 0.0) return f.U;
  cplx az = a.dot(z);
  cplx den = 1.0 - az;
  CMat P = a * a.adjoint() / an2;
  CMat Q = CMat::Identity(q, q) - P;
  double s = std::sqrt(1.0 - an2);
  CVec num = P * z + s * (Q * z) - a;
  CMat d = (P + s * Q) / den + num * a.adjoint() / (den * den);
  return f.U * d;
}

void check_image(double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho))
    throw DomainViolation("image left the Siegel domain");
}

SiegelPoint eval_poly_frame(const SiegelPolynomial& p, const SiegelPoint& x) {
  int e = x.exponent();
  double sh = pow2_half(-e), t = std::ldexp(1.0, -e);
  const CVec& w = x.w();
  CVec c = p.c * sh;
  cplx beta = p.beta * t;
  CVec Sw = p.S * w;
  cplx wSw = (w.array() * Sw.array()).sum();
  cplx cw = dot_bilinear(c, w);
  cplx z = p.alpha * x.z() + cw + kI * wSw + beta;
  CVec wn = p.A * w + p.b * sh;
  double q = p.alpha * w.squaredNorm() + cw.imag() + wSw.real() + beta.imag() - wn.squaredNorm();
  double rho = p.alpha * x.rho() + q;
  check_image(rho);
  return SiegelPoint(z, wn, rho, e).renormalized();
}

SiegelPoint eval_hyp_frame(const ExampleHyperbolic& f, const SiegelPoint& x) {
  const CVec& w = x.w();
  int n = static_cast<int>(w.size());
  CVec wn = CVec::Zero(n);
  wn[0] = w[0];
  double dropped = 0.0;
  for (int j = 1; j < n; ++j) {
    if (j < f.q) wn[j] = M_SQRT2 * w[j];
    else dropped += std::norm(w[j]);
  }
  cplx z = 2.0 * x.z() + kI * w[0] * w[0];
  double re = w[0].real();
  double rho = 2.0 * x.rho() + 2.0 * re * re + 2.0 * dropped;
  return SiegelPoint(z, wn, rho, x.exponent()).renormalized();
}

SiegelPoint eval_par_frame(const ExampleParabolic& f, const SiegelPoint& x) {
  int e = x.exponent();
  double sh = pow2_half(-e), t = std::ldexp(1.0, -e);
  const CVec& w = x.w();
  int n = static_cast<int>(w.size());
  CVec wn = CVec::Zero(n);
  double dropped = 0.0;
  for (int j = 0; j < n; ++j) {
    if (j < f.p - 1) wn[j] = w[j];
    else dropped += std::norm(w[j]);
  }
  wn[0] -= kI * (f.r * sh);
  cplx z = x.z() + kI * (f.r * f.r * t) - 2.0 * f.r * sh * w[0];
  double rho = x.rho() + dropped;
  return SiegelPoint(z, wn, rho, e).renormalized();
}

CMat jac_poly_frame(const SiegelPolynomial& p, const SiegelPoint& x) {
  int m = p.dim();
  double sh = pow2_half(-x.exponent());
  CMat J = CMat::Zero(m, m);
  J(0, 0) = p.alpha;
  CVec row = p.c * sh + 2.0 * kI * (p.S * x.w());
  J.block(0, 1, 1, m - 1) = row.transpose();
  J.bottomRightCorner(m - 1, m - 1) = p.A;
  return J;
}

// Rescale a frame Jacobian when the output moved from exponent e to e'.
void apply_output_shift(CMat& J, int e_from, int e_to) {
  int d = e_from - e_to;
  if (d == 0) return;
  J.row(0) *= std::ldexp(1.0, d);
  double s = pow2_half(d);
  for (int k = 1; k < J.rows(); ++k) J.row(k) *= s;
}

DomainPoint eval_impl(const MapDescription& f, const DomainPoint& x);

FramedStep framed_impl(const MapDescription& f, const DomainPoint& x) {
  const auto& v = f.v();
  if (const auto* g = std::get_if<BallAutomorphism>(&v)) {
    const auto& p = std::get<BallPoint>(x);
    return {eval_ball(*g, p), jac_ball(*g, p)};
  }
  if (const auto* c = std::get_if<Composition>(&v)) {
    FramedStep acc{x, CMat::Identity(f.dim(), f.dim())};
    for (const auto& g : c->maps) {
      FramedStep s = framed_impl(g, acc.image);
      acc.image = std::move(s.image);
      acc.frame_jacobian = s.frame_jacobian * acc.frame_jacobian;
    }
    return acc;
  }
  if (const auto* it = std::get_if<Iterate>(&v)) {
    FramedStep acc{x, CMat::Identity(f.dim(), f.dim())};
    for (int n = 0; n < it->power; ++n) {
      FramedStep s = framed_impl(*it->base, acc.image);
      acc.image = std::move(s.image);
      acc.frame_jacobian = s.frame_jacobian * acc.frame_jacobian;
    }
    return acc;
  }
  const auto& s = std::get<SiegelPoint>(x);
  SiegelPolynomial p;
  if (const auto* g = std::get_if<SiegelPolynomial>(&v)) p = *g;
  else if (const auto* g = std::get_if<ExampleHyperbolic>(&v)) p = lower(*g);
  else p = lower(std::get<ExampleParabolic>(v));
  CMat J = jac_poly_frame(p, s);
  DomainPoint img = eval_impl(f, x);
  apply_output_shift(J, s.exponent(), std::get<SiegelPoint>(img).exponent());
  return {std::move(img), std::move(J)};
}

DomainPoint eval_impl(const MapDescription& f, const DomainPoint& x) {
  const auto& v = f.v();
  if (const auto* g = std::get_if<BallAutomorphism>(&v))
    return eval_ball(*g, std::get<BallPoint>(x));
  if (const auto* g = std::get_if<SiegelPolynomial>(&v))
    return eval_poly_frame(*g, std::get<SiegelPoint>(x));
  if (const auto* g = std::get_if<ExampleHyperbolic>(&v))
    return eval_hyp_frame(*g, std::get<SiegelPoint>(x));
  if (const auto* g = std::get_if<ExampleParabolic>(&v))
    return eval_par_frame(*g, std::get<SiegelPoint>(x));
  if (const auto* c = std::get_if<Composition>(&v)) {
    DomainPoint y = x;
    for (const auto& g : c->maps) y = eval_impl(g, y);
    return y;
  }
  const auto& it = std::get<Iterate>(v);
  DomainPoint y = x;
  for (int n = 0; n < it.power; ++n) y = eval_impl(*it.base, y);
  return y;
}

}  // namespace

DomainPoint eval(const MapDescription& f, const DomainPoint& x) {
  require_domain(f, x);
  return eval_impl(f, x);
}

FramedStep eval_framed(const MapDescription& f, const DomainPoint& x) {
  require_domain(f, x);
  return framed_impl(f, x);
}

RVec frame_scaling(const DomainPoint& x) {
  int m = dim_of(x);
  RVec d = RVec::Ones(m);
  if (const auto* s = std::get_if<SiegelPoint>(&x)) {
    d[0] = std::ldexp(1.0, s->exponent());
    d.tail(m - 1).setConstant(pow2_half(s->exponent()));
  }
  return d;
}

CMat jacobian(const MapDescription& f, const DomainPoint& x) {
  FramedStep s = eval_framed(f, x);
  RVec din = frame_scaling(x), dout = frame_scaling(s.image);
  return dout.asDiagonal() * s.frame_jacobian * din.cwiseInverse().asDiagonal();
}

// ------------------------------------------------------ structured algebra

SiegelPolynomial compose(const SiegelPolynomial& f, const SiegelPolynomial& g) {
  if (f.dim() != g.dim()) throw InvalidArgument("compose: dimension mismatch");
  SiegelPolynomial h;
  h.alpha = g.alpha * f.alpha;
  CVec Sgb = g.S * f.b;
  h.c = g.alpha * f.c + f.A.transpose() * g.c + 2.0 * kI * (f.A.transpose() * Sgb);
  h.S = g.alpha * f.S + f.A.transpose() * g.S * f.A;
  h.S = 0.5 * (h.S + h.S.transpose());
  h.beta = g.alpha * f.beta + dot_bilinear(g.c, f.b) + kI * dot_bilinear(f.b, Sgb) + g.beta;
  h.A = g.A * f.A;
  h.b = g.A * f.b + g.b;
  return h;
}

double coefficient_distance(const SiegelPolynomial& f, const SiegelPolynomial& g) {
  if (f.dim() != g.dim()) throw InvalidArgument("coefficient_distance: dimension mismatch");
  auto rel = [](double d, double a, double b) { return d / (1.0 + std::max(a, b)); };
  double r = rel(std::abs(f.alpha - g.alpha), std::abs(f.alpha), std::abs(g.alpha));
  r = std::max(r, rel((f.c - g.c).norm(), f.c.norm(), g.c.norm()));
  r = std::max(r, rel((f.S - g.S).norm(), f.S.norm(), g.S.norm()));
  r = std::max(r, rel(std::abs(f.beta - g.beta), std::abs(f.beta), std::abs(g.beta)));
  r = std::max(r, rel((f.A - g.A).norm(), f.A.norm(), g.A.norm()));
  r = std::max(r, rel((f.b - g.b).norm(), f.b.norm(), g.b.norm()));
  return r;
}

std::optional<SiegelPolynomial> lower_to_polynomial(const MapDescription& f) {
  const auto& v = f.v();
  if (std::holds_alternative<BallAutomorphism>(v)) return std::nullopt;
  if (const auto* g = std::get_if<SiegelPolynomial>(&v)) return *g;
  if (const auto* g = std::get_if<ExampleHyperbolic>(&v)) return lower(*g);
  if (const auto* g = std::get_if<ExampleParabolic>(&v)) return lower(*g);
  if (const auto* c = std::get_if<Composition>(&v)) {
    std::optional<SiegelPolynomial> acc;
    for (const auto& g : c->maps) {
      auto p = lower_to_polynomial(g);
      if (!p) return std::nullopt;
      acc = acc ? compose(*acc, *p) : *p;
    }
    return acc;
  }
  const auto& it = std::get<Iterate>(v);
  auto base = lower_to_polynomial(*it.base);
  if (!base) return std::nullopt;
  SiegelPolynomial acc = SiegelPolynomial::identity(f.dim());
  SiegelPolynomial sq = *base;
  for (int n = it.power; n > 0; n >>= 1) {
    if (n & 1) acc = compose(acc, sq);
    if (n > 1) sq = compose(sq, sq);
  }
  return acc;
}

namespace {

CMat dm_minus_at_origin(const CVec& a) {
  int q = static_cast<int>(a.size());
  double an2 = a.squaredNorm();
  if (an2 == 0.0) return CMat::Identity(q, q);
  CMat P = a * a.adjoint() / an2;
  return (1.0 - an2) * P + std::sqrt(1.0 - an2) * (CMat::Identity(q, q) - P);
}

}  // namespace

BallAutomorphism compose(const BallAutomorphism& f, const BallAutomorphism& g) {
  if (f.a.size() != g.a.size()) throw InvalidArgument("compose: dimension mismatch");
  // a = f^{-1}(a_g), U = Dg(a_g) Df(a) DM_{-a}(0)
  BallAutomorphism finv = inverse(f);
  BallPoint a = eval_ball(finv, BallPoint(g.a));
  CMat U = jac_ball(g, BallPoint(g.a)) * jac_ball(f, a) * dm_minus_at_origin(a.coords());
  return {nearest_unitary(U), a.coords()};
}

BallAutomorphism inverse(const BallAutomorphism& f) {
  int q = static_cast<int>(f.a.size());
  BallPoint a2 = eval_ball(f, BallPoint(CVec::Zero(q)));
  // D(f^{-1})(a2) = (Df(0))^{-1}
  CMat df0 = jac_ball(f, BallPoint(CVec::Zero(q)));
  CMat U = df0.inverse() * dm_minus_at_origin(a2.coords());
  return {nearest_unitary(U), a2.coords()};
}

std::optional<BallAutomorphism> lower_to_automorphism(const MapDescription& f) {
  const auto& v = f.v();
  if (const auto* g = std::get_if<BallAutomorphism>(&v)) return *g;
  if (const auto* c = std::get_if<Composition>(&v)) {
    std::optional<BallAutomorphism> acc;
    for (const auto& g : c->maps) {
      auto p = lower_to_automorphism(g);
      if (!p) return std::nullopt;
      acc = acc ? compose(*acc, *p) : *p;
    }
    return acc;
  }
  if (const auto* it = std::get_if<Iterate>(&v)) {
    auto base = lower_to_automorphism(*it->base);
    if (!base) return std::nullopt;
    int q = f.dim();
    BallAutomorphism acc{CMat::Identity(q, q), CVec::Zero(q)};
    for (int n = 0; n < it->power; ++n) acc = compose(acc, *base);
    return acc;
  }
  return std::nullopt;
}

CMat lift(const BallAutomorphism& f) {
  int q = static_cast<int>(f.a.size());
  const CVec& a = f.a;
  double an2 = a.squaredNorm();
  CMat M = CMat::Zero(q + 1, q + 1);
  if (an2 == 0.0) {
    M.topLeftCorner(q, q) = CMat::Identity(q, q);
  } else {
    CMat P = a * a.adjoint() / an2;
    M.topLeftCorner(q, q) = P + std::sqrt(1.0 - an2) * (CMat::Identity(q, q) - P);
  }
  M.block(0, q, q, 1) = -a;
  M.block(q, 0, 1, q) = -a.adjoint();
  M(q, q) = 1.0;
  CMat D = CMat::Identity(q + 1, q + 1);
  D.topLeftCorner(q, q) = f.U;
  return D * M;
}

BallAutomorphism from_lift(const CMat& G) {
  int q = static_cast<int>(G.rows()) - 1;
  if (q < 1 || G.cols() != q + 1) throw InvalidArgument("from_lift: bad matrix size");
  CMat G11 = G.topLeftCorner(q, q);
  CVec g12 = G.block(0, q, q, 1);
  CVec a = -G11.partialPivLu().solve(g12);
  if (!(a.norm() < 1.0)) throw InvalidArgument("from_lift: matrix does not preserve the ball");
  cplx den = (G.block(q, 0, 1, q) * a)(0, 0) + G(q, q);
  CMat U = (G11 / den) * dm_minus_at_origin(a);
  return {nearest_unitary(U), a};
}

// ----------------------------------------------------------------- families

namespace {

DomainPoint iterate_order(const CommutingFamily& F, const MultiIndex& N, const DomainPoint& x,
                          bool reversed) {
  DomainPoint y = x;
  int k = F.size();
  for (int s = 0; s < k; ++s) {
    int j = reversed ? s : k - 1 - s;
    for (int n = 0; n < N.entries[j]; ++n) y = eval(F.maps[j], y);
  }
  return y;
}

}  // namespace

DomainPoint iterate_multiindex(const CommutingFamily& F, const MultiIndex& N,
                               const DomainPoint& x) {
  if (F.size() != N.size()) throw InvalidArgument("iterate_multiindex: length mismatch");
  DomainPoint y = iterate_order(F, N, x, false);
#ifndef NDEBUG
  if (F.certificate.valid && F.size() > 1) {
    DomainPoint y2 = iterate_order(F, N, x, true);
    double d = kobayashi_distance(y, y2);
    if (d > 1e-6) throw InvariantViolation("iterate_multiindex: composition order matters");
  }
#endif
  return y;
}

FramedStep iterate_multiindex_framed(const CommutingFamily& F, const MultiIndex& N,
                                     const DomainPoint& x) {
  if (F.size() != N.size()) throw InvalidArgument("iterate_multiindex: length mismatch");
  FramedStep acc{x, CMat::Identity(dim_of(x), dim_of(x))};
  for (int j = F.size() - 1; j >= 0; --j) {
    for (int n = 0; n < N.entries[j]; ++n) {
      FramedStep s = eval_framed(F.maps[j], acc.image);
      acc.image = std::move(s.image);
      acc.frame_jacobian = s.frame_jacobian * acc.frame_jacobian;
    }
  }
  return acc;
}

std::vector<DomainPoint> sample_domain(DomainKind kind, int dim, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<DomainPoint> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    if (kind == DomainKind::Ball) {
      CVec g(dim);
      for (int j = 0; j < dim; ++j) g[j] = cplx(gauss(rng), gauss(rng));
      double radius = 0.95 * std::pow(unif(rng), 1.0 / (2.0 * dim));
      out.emplace_back(BallPoint(g * (radius / g.norm())));
    } else {
      CVec w(dim - 1);
      for (int j = 0; j < dim - 1; ++j) w[j] = cplx(gauss(rng), gauss(rng));
      double rho = std::pow(10.0, -2.0 + 4.0 * unif(rng));
      double x = -5.0 + 10.0 * unif(rng);
      cplx z(x, rho + w.squaredNorm());
      out.emplace_back(SiegelPoint(z, w, rho, 0).renormalized());
    }
  }
  return out;
}

Certificate compare_maps(const MapDescription& h1, const MapDescription& h2, int samples,
                         double tol, std::uint64_t seed) {
  if (h1.domain() != h2.domain() || h1.dim() != h2.dim())
    throw InvalidArgument("compare_maps: maps act on different domains");
  Certificate cert;
  cert.tol = tol;
  bool exact_path = false;
  if (auto p1 = lower_to_polynomial(h1)) {
    if (auto p2 = lower_to_polynomial(h2)) {
      exact_path = true;
      double d = coefficient_distance(*p1, *p2);
      cert.kind = CertificateKind::Exact;
      cert.valid = d <= 1e-12;
      cert.residual = d;
      cert.note = "coefficient comparison";
      if (cert.valid) return cert;
    }
  } else if (auto a1 = lower_to_automorphism(h1)) {
    if (auto a2 = lower_to_automorphism(h2)) {
      exact_path = true;
      double d = std::max((a1->U - a2->U).norm(), (a1->a - a2->a).norm());
      cert.kind = CertificateKind::Exact;
      cert.valid = d <= 1e-10;
      cert.residual = d;
      cert.note = "parameter comparison";
      if (cert.valid) return cert;
    }
  }
  // sampled residual; also used to report the size of an exact mismatch
  auto pts = sample_domain(h1.domain(), h1.dim(), samples, seed);
  double worst = 0.0;
  for (const auto& x : pts) {
    double d = kobayashi_distance(eval(h1, x), eval(h2, x));
    if (!(d <= worst)) {
      worst = d;
      cert.witness = x;
    }
  }
  if (!exact_path) {
    cert.kind = CertificateKind::Numeric;
    cert.valid = worst < tol;
    cert.note = "sampled Kobayashi residual";
  }
  cert.residual = worst;
  if (cert.valid) cert.witness.reset();
  return cert;
}

Certificate commute_check(const MapDescription& f, const MapDescription& g, int samples,
                          double tol, std::uint64_t seed) {
  return compare_maps(MapDescription::then(g, f), MapDescription::then(f, g), samples, tol,
                      seed);
}

namespace {

// Q(w) = rho' - alpha rho, a real inhomogeneous quadratic in Re w, Im w.
double poly_q(const SiegelPolynomial& p, const CVec& w) {
  CVec Sw = p.S * w;
  cplx wSw = (w.array() * Sw.array()).sum();
  CVec wn = p.A * w + p.b;
  return p.alpha * w.squaredNorm() + dot_bilinear(p.c, w).imag() + wSw.real() + p.beta.imag() -
         wn.squaredNorm();
}

CVec from_real(const RVec& x) {
  int n = static_cast<int>(x.size()) / 2;
  CVec w(n);
  for (int j = 0; j < n; ++j) w[j] = cplx(x[2 * j], x[2 * j + 1]);
  return w;
}

SiegelPoint witness_at(const CVec& w, double rho) {
  return SiegelPoint(cplx(0.0, rho + w.squaredNorm()), w, rho, 0).renormalized();
}

Certificate analyze_polynomial(const SiegelPolynomial& p) {
  Certificate cert;
  cert.kind = CertificateKind::Exact;
  int n = p.dim() - 1;
  if (!(p.alpha > 0.0)) {
    cert.valid = false;
    cert.note = "alpha must be positive";
    if (p.alpha < 0.0) {
      double h0 = poly_q(p, CVec::Zero(n));
      double rho = std::max(1.0, 2.0 * (std::abs(h0) + 1.0) / -p.alpha);
      cert.witness = witness_at(CVec::Zero(n), rho);
    }
    return cert;
  }
  // augmented real form [[P, g/2], [g/2^T, h0]] by polarization
  int d = 2 * n;
  double h0 = poly_q(p, CVec::Zero(n));
  RMat aug = RMat::Zero(d + 1, d + 1);
  RVec even(d);
  for (int i = 0; i < d; ++i) {
    RVec e = RVec::Zero(d);
    e[i] = 1.0;
    double qp = poly_q(p, from_real(e)), qm = poly_q(p, from_real(-e));
    even[i] = 0.5 * (qp + qm) - h0;
    aug(i, d) = aug(d, i) = 0.25 * (qp - qm);
    aug(i, i) = even[i];
  }
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      RVec e = RVec::Zero(d);
      e[i] = e[j] = 1.0;
      double ev = 0.5 * (poly_q(p, from_real(e)) + poly_q(p, from_real(-e))) - h0;
      aug(i, j) = aug(j, i) = 0.5 * (ev - even[i] - even[j]);
    }
  aug(d, d) = h0;
  Eigen::SelfAdjointEigenSolver<RMat> es(aug);
  double scale = std::max(1.0, aug.norm());
  double lo = es.eigenvalues()[0];
  cert.residual = std::max(0.0, -lo);
  if (lo >= -1e-12 * scale) {
    cert.valid = true;
    cert.note = "alpha > 0 and the height increment is a nonnegative quadratic";
    return cert;
  }
  cert.valid = false;
  cert.note = "height increment takes negative values";
  RVec v = es.eigenvectors().col(0);
  CVec w;
  if (std::abs(v[d]) > 1e-8) {
    w = from_real(v.head(d) / v[d]);
  } else {
    w = from_real(v.head(d));
    for (int k = 0; k < 200 && poly_q(p, w) >= 0.0; ++k) w *= 2.0;
  }
  double q = poly_q(p, w);
  if (q < 0.0) cert.witness = witness_at(w, -q / (2.0 * p.alpha));
  return cert;
}

}  // namespace

Certificate validate_self_map(const MapDescription& f, int samples, std::uint64_t seed) {
  const auto& v = f.v();
  if (std::holds_alternative<ExampleHyperbolic>(v) || std::holds_alternative<ExampleParabolic>(v)) {
    Certificate c;
    c.kind = CertificateKind::Exact;
    c.valid = true;
    c.note = "member of the example family";
    return c;
  }
  if (f.domain() == DomainKind::Ball) {
    Certificate c;
    c.kind = CertificateKind::Exact;
    c.valid = true;
    c.note = "ball automorphism";
    return c;
  }
  auto p = lower_to_polynomial(f);
  Certificate cert = analyze_polynomial(*p);
  // sampled check: catches violations even when the analytic witness is absent
  auto pts = sample_domain(DomainKind::Siegel, f.dim(), samples, seed);
  for (const auto& x : pts) {
    try {
      (void)eval(f, x);
    } catch (const DomainViolation&) {
      if (cert.valid) {
        cert.valid = false;
        cert.kind = CertificateKind::Numeric;
        cert.note = "sampled point mapped outside the domain";
      }
      if (!cert.witness) cert.witness = x;
      break;
    }
  }
  return cert;
}

CommutingFamily make_family(std::vector<MapDescription> maps, int samples, double tol,
                            std::uint64_t seed) {
  if (maps.empty()) throw InvalidArgument("make_family: no maps");
  CommutingFamily F;
  F.maps = std::move(maps);
  for (const auto& f : F.maps)
    if (f.domain() != F.maps[0].domain() || f.dim() != F.maps[0].dim())
      throw InvalidArgument("make_family: members act on different domains");
  F.certificate.kind = CertificateKind::Exact;
  F.certificate.valid = true;
  F.certificate.tol = tol;
  for (int i = 0; i < F.size(); ++i)
    for (int j = i + 1; j < F.size(); ++j) {
      Certificate c = commute_check(F.maps[i], F.maps[j], samples, tol, seed);
      if (!c.valid)
        throw InvalidArgument("make_family: members " + std::to_string(i) + " and " +
                              std::to_string(j) + " do not commute (residual " +
                              std::to_string(c.residual) + ")");
      if (c.kind == CertificateKind::Numeric) F.certificate.kind = CertificateKind::Numeric;
      F.certificate.residual = std::max(F.certificate.residual, c.residual);
    }
  F.certificate.note = "pairwise commutation";
  return F;
}

}  // namespace balldyn
