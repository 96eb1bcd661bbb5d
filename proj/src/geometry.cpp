#include "balldyn/geometry.hpp"

#include <cmath>
#include <random>

namespace balldyn {

namespace {

bool finite_vec(const CVec& v) { return v.allFinite(); }

double ball_defect_direct(const CVec& z) {
  double n = z.norm();
  return (1.0 - n) * (1.0 + n);
}

// Uniform point of the complex ball of radius t in C^q.
CVec sample_in_ball(std::mt19937_64& rng, int q, double t) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  CVec g(q);
  double n2 = 0.0;
  do {
    for (int j = 0; j < q; ++j) g[j] = cplx(gauss(rng), gauss(rng));
    n2 = g.squaredNorm();
  } while (n2 < 1e-300);
  double radius = t * std::pow(unif(rng), 1.0 / (2.0 * q));
  return g * (radius / std::sqrt(n2));
}

}  // namespace

CMat nearest_unitary(const CMat& m) {
  if (m.size() == 0) return m;
  Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

double unitarity_defect(const CMat& u) {
  return (u.adjoint() * u - CMat::Identity(u.cols(), u.cols())).norm();
}

// ---------------------------------------------------------------- BallPoint

BallPoint::BallPoint(CVec coords) : z_(std::move(coords)) {
  if (!finite_vec(z_)) throw InvalidArgument("BallPoint: non-finite coordinates");
  defect_ = ball_defect_direct(z_);
  if (!(defect_ > 0.0)) throw InvalidArgument("BallPoint: norm must be < 1");
}

BallPoint::BallPoint(CVec coords, double defect) : z_(std::move(coords)), defect_(defect) {
  if (!finite_vec(z_) || !std::isfinite(defect_))
    throw InvalidArgument("BallPoint: non-finite data");
  if (!(defect_ > 0.0)) throw InvalidArgument("BallPoint: norm must be < 1");
  if (std::abs(defect_ - ball_defect_direct(z_)) > 1e-9)
    throw InvalidArgument("BallPoint: defect inconsistent with coordinates");
}

double BallPoint::gap() const { return defect_ / (1.0 + z_.norm()); }

// ------------------------------------------------------------ BoundaryPoint

BoundaryPoint::BoundaryPoint(CVec coords, bool normalize) : p_(std::move(coords)) {
  double n = p_.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw InvalidArgument("BoundaryPoint: zero vector");
  if (!normalize && std::abs(n - 1.0) > 1e-12)
    throw InvalidArgument("BoundaryPoint: not on the unit sphere");
  p_ /= n;
}

BoundaryPoint BoundaryPoint::e1(int q) {
  CVec v = CVec::Zero(q);
  v[0] = 1.0;
  return BoundaryPoint(v);
}

double chordal_distance(const BoundaryPoint& a, const BoundaryPoint& b) {
  if (a.dim() != b.dim()) throw InvalidArgument("chordal_distance: dimension mismatch");
  return (a.coords() - b.coords()).norm();
}

// -------------------------------------------------------------- SiegelPoint

double pow2_half(int e) { return std::ldexp((e & 1) ? M_SQRT2 : 1.0, e >> 1); }

SiegelPoint::SiegelPoint(cplx z, CVec w, int e) : z_(z), w_(std::move(w)), e_(e) {
  if (!std::isfinite(z_.real()) || !std::isfinite(z_.imag()) || !finite_vec(w_))
    throw InvalidArgument("SiegelPoint: non-finite coordinates");
  rho_ = z_.imag() - w_.squaredNorm();
  if (!(rho_ > 0.0)) throw InvalidArgument("SiegelPoint: Im z must exceed |w|^2");
}

SiegelPoint::SiegelPoint(cplx z, CVec w, double rho, int e)
    : z_(z), w_(std::move(w)), rho_(rho), e_(e) {
  if (!std::isfinite(z_.real()) || !std::isfinite(z_.imag()) || !finite_vec(w_) ||
      !std::isfinite(rho_))
    throw InvalidArgument("SiegelPoint: non-finite data");
  if (!(rho_ > 0.0)) throw InvalidArgument("SiegelPoint: Im z must exceed |w|^2");
  double direct = z_.imag() - w_.squaredNorm();
  double mag = std::max({1.0, std::abs(z_), w_.squaredNorm()});
  if (std::abs(direct - rho_) > 1e-9 * mag)
    throw InvalidArgument("SiegelPoint: height inconsistent with coordinates");
}

cplx SiegelPoint::z_value() const {
  return {std::ldexp(z_.real(), e_), std::ldexp(z_.imag(), e_)};
}
CVec SiegelPoint::w_value() const { return w_ * pow2_half(e_); }
double SiegelPoint::rho_value() const { return std::ldexp(rho_, e_); }

double SiegelPoint::log2_abs_z() const { return e_ + std::log2(std::abs(z_)); }

SiegelPoint SiegelPoint::in_frame(int e) const {
  int d = e_ - e;
  cplx z{std::ldexp(z_.real(), d), std::ldexp(z_.imag(), d)};
  return SiegelPoint(z, w_ * pow2_half(d), std::ldexp(rho_, d), e);
}

SiegelPoint SiegelPoint::renormalized() const {
  double s = std::max({std::abs(z_), rho_, w_.squaredNorm()});
  int k = std::ilogb(s);
  int shift = k & ~1;
  if (shift == 0) return *this;
  return in_frame(e_ + shift);
}

DomainKind kind_of(const DomainPoint& p) {
  return std::holds_alternative<BallPoint>(p) ? DomainKind::Ball : DomainKind::Siegel;
}

int dim_of(const DomainPoint& p) {
  return std::visit([](const auto& x) { return x.dim(); }, p);
}

// ------------------------------------------------------------ HermitianForm

HermitianForm::HermitianForm(CMat m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw InvalidArgument("HermitianForm: matrix not square");
  double n = std::max(1.0, m_.norm());
  if ((m_ - m_.adjoint()).norm() > 1e-12 * n)
    throw InvalidArgument("HermitianForm: matrix not Hermitian");
  m_ = 0.5 * (m_ + m_.adjoint());
  if (m_.rows() > 0) {
    Eigen::SelfAdjointEigenSolver<CMat> es(m_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10 * n)
      throw InvalidArgument("HermitianForm: matrix not positive semi-definite");
  }
}

double HermitianForm::quad(const CVec& v) const { return v.dot(m_ * v).real(); }

void MetricConvention::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw InvalidArgument("MetricConvention: scale must be positive");
}

// ---------------------------------------------------------------- distances

double kobayashi_distance_ball(const BallPoint& a, const BallPoint& b,
                               const MetricConvention& conv) {
  conv.validate();
  if (a.dim() != b.dim()) throw InvalidArgument("kobayashi_distance_ball: dimension mismatch");
  CVec d = b.coords() - a.coords();
  double d2 = d.squaredNorm();
  if (d2 == 0.0) return 0.0;
  // |1 - <b,a>|^2 - da*db, written without cancellation; averaged for exact symmetry.
  double na = a.defect() * d2 + std::norm(a.coords().dot(d));
  double nb = b.defect() * d2 + std::norm(b.coords().dot(d));
  double lo = std::min(a.defect(), b.defect()), hi = std::max(a.defect(), b.defect());
  double x = 0.5 * (na + nb) / hi / lo;
  return conv.scale * std::asinh(std::sqrt(x));
}

double kobayashi_distance_siegel(const SiegelPoint& a, const SiegelPoint& b,
                                 const MetricConvention& conv) {
  conv.validate();
  if (a.dim() != b.dim())
    throw InvalidArgument("kobayashi_distance_siegel: dimension mismatch");
  int e = std::max(a.exponent(), b.exponent());
  SiegelPoint p = a.in_frame(e), s = b.in_frame(e);
  CVec dw = p.w() - s.w();
  double dw2 = dw.squaredNorm();
  double r1 = p.rho(), r2 = s.rho();
  double im = 0.5 * (p.z().real() - s.z().real()) + s.w().dot(p.w()).imag();
  double hr = 0.5 * (r1 - r2);
  double n = hr * hr + 0.5 * (r1 + r2) * dw2 + 0.25 * dw2 * dw2 + im * im;
  if (n == 0.0) return 0.0;
  double x = (n / std::max(r1, r2)) / std::min(r1, r2);
  return conv.scale * std::asinh(std::sqrt(x));
}

double kobayashi_distance(const DomainPoint& a, const DomainPoint& b,
                          const MetricConvention& conv) {
  if (a.index() != b.index()) throw InvalidArgument("kobayashi_distance: mixed domains");
  if (const auto* pa = std::get_if<BallPoint>(&a))
    return kobayashi_distance_ball(*pa, std::get<BallPoint>(b), conv);
  return kobayashi_distance_siegel(std::get<SiegelPoint>(a), std::get<SiegelPoint>(b), conv);
}

// ------------------------------------------------------------- metric forms

HermitianForm kobayashi_metric_form_ball(const BallPoint& a, const MetricConvention& conv) {
  conv.validate();
  double d = a.defect();
  int q = a.dim();
  CMat h = CMat::Identity(q, q) / d + a.coords() * a.coords().adjoint() / (d * d);
  return HermitianForm(conv.scale * conv.scale * h);
}

namespace {

CMat siegel_form(cplx z, const CVec& w, double rho, double scale) {
  (void)z;
  int m = 1 + static_cast<int>(w.size());
  CVec ch(m);
  ch[0] = cplx(0.0, 0.5);
  ch.tail(m - 1) = -w;
  CMat h = ch * ch.adjoint() / (rho * rho);
  h.bottomRightCorner(m - 1, m - 1) += CMat::Identity(m - 1, m - 1) / rho;
  return scale * scale * h;
}

}  // namespace

HermitianForm kobayashi_metric_form_siegel(const SiegelPoint& s, const MetricConvention& conv) {
  conv.validate();
  return HermitianForm(siegel_form(s.z_value(), s.w_value(), s.rho_value(), conv.scale));
}

HermitianForm siegel_frame_metric(const SiegelPoint& s, const MetricConvention& conv) {
  conv.validate();
  return HermitianForm(siegel_form(s.z(), s.w(), s.rho(), conv.scale));
}

// ------------------------------------------------------------------- Cayley

SiegelPoint cayley(const BallPoint& p) {
  cplx z1 = p.coords()[0];
  CVec w = p.coords().tail(p.dim() - 1);
  cplx den = 1.0 - z1;
  cplx Z = kI * (1.0 + z1) / den;
  CVec W = (kI / den) * w;
  double rho = p.defect() / std::norm(den);
  return SiegelPoint(Z, W, rho, 0).renormalized();
}

SiegelBoundary cayley(const BoundaryPoint& p) {
  SiegelBoundary out;
  cplx z1 = p.coords()[0];
  cplx den = 1.0 - z1;
  if (std::abs(den) < 1e-15) {
    out.at_infinity = true;
    out.w = CVec::Zero(p.dim() - 1);
    return out;
  }
  out.z = kI * (1.0 + z1) / den;
  out.w = (kI / den) * p.coords().tail(p.dim() - 1);
  return out;
}

BallPoint cayley_inverse(const SiegelPoint& s) {
  int e = s.exponent();
  double t = std::ldexp(1.0, -e);
  cplx u = s.z() + cplx(0.0, t);
  int m = s.dim();
  CVec out(m);
  out[0] = (s.z() - cplx(0.0, t)) / u;
  out.tail(m - 1) = s.w() * (2.0 * pow2_half(-e) / u);
  double defect = 4.0 * t * s.rho() / std::norm(u);
  return BallPoint(out, defect);
}

BoundaryPoint cayley_inverse(const SiegelBoundary& s, int dim) {
  if (s.at_infinity) return BoundaryPoint::e1(dim);
  if (static_cast<int>(s.w.size()) != dim - 1)
    throw InvalidArgument("cayley_inverse: dimension mismatch");
  CVec out(dim);
  cplx u = s.z + kI;
  out[0] = (s.z - kI) / u;
  out.tail(dim - 1) = s.w * (2.0 / u);
  return BoundaryPoint(out);
}

CMat cayley_jacobian(const BallPoint& p) {
  int q = p.dim();
  cplx z1 = p.coords()[0];
  cplx den = 1.0 - z1;
  CMat j = CMat::Zero(q, q);
  j(0, 0) = 2.0 * kI / (den * den);
  for (int k = 1; k < q; ++k) {
    j(k, 0) = kI * p.coords()[k] / (den * den);
    j(k, k) = kI / den;
  }
  return j;
}

CMat cayley_inverse_jacobian(const SiegelPoint& s) {
  int m = s.dim();
  cplx u = s.z_value() + kI;
  CVec W = s.w_value();
  CMat j = CMat::Zero(m, m);
  j(0, 0) = 2.0 * kI / (u * u);
  for (int k = 1; k < m; ++k) {
    j(k, 0) = -2.0 * W[k - 1] / (u * u);
    j(k, k) = 2.0 / u;
  }
  return j;
}

// ----------------------------------------------------------------- Koranyi

bool in_koranyi_region(const BallPoint& x, const BoundaryPoint& v, double R) {
  if (!(R > 1.0)) throw InvalidArgument("in_koranyi_region: R must exceed 1");
  if (x.dim() != v.dim()) throw InvalidArgument("in_koranyi_region: dimension mismatch");
  double lhs = std::abs(1.0 - v.coords().dot(x.coords()));
  return lhs < R * x.gap();
}

// ---------------------------------------------------------------- sampling

BallPoint mobius_from_origin(const BallPoint& c, const CVec& u) {
  double cn2 = c.coords().squaredNorm();
  double du = (1.0 - u.norm()) * (1.0 + u.norm());
  if (cn2 == 0.0) return BallPoint(u, du);
  cplx cu = c.coords().dot(u);
  CVec pu = c.coords() * (cu / cn2);
  double s = std::sqrt(c.defect());
  cplx den = 1.0 + cu;
  CVec out = (pu + s * (u - pu) + c.coords()) / den;
  return BallPoint(out, c.defect() * du / std::norm(den));
}

std::vector<DomainPoint> kobayashi_ball_sample(const DomainPoint& center, double r, int count,
                                               std::uint64_t seed,
                                               const MetricConvention& conv) {
  conv.validate();
  if (!(r > 0.0)) throw InvalidArgument("kobayashi_ball_sample: r must be positive");
  if (count < 1) throw InvalidArgument("kobayashi_ball_sample: count must be >= 1");
  std::mt19937_64 rng(seed);
  double t = std::tanh(r / conv.scale);
  int q = dim_of(center);
  std::vector<DomainPoint> out;
  out.reserve(count);
  long attempts = 0;
  while (static_cast<int>(out.size()) < count) {
    if (++attempts > 1000L * count + 1000)
      throw Error("kobayashi_ball_sample: too many rejections");
    CVec u = sample_in_ball(rng, q, t);
    if (!(u.norm() < t)) continue;
    DomainPoint p;
    if (const auto* c = std::get_if<BallPoint>(&center)) {
      p = mobius_from_origin(*c, u);
    } else {
      const auto& c0 = std::get<SiegelPoint>(center);
      SiegelPoint s = cayley(BallPoint(u)).in_frame(0);
      double rc = c0.rho();
      cplx z = rc * s.z();
      CVec w = std::sqrt(rc) * s.w();
      const CVec& w0 = c0.w();
      z += c0.z().real() + 2.0 * kI * w0.dot(w) + kI * w0.squaredNorm();
      w += w0;
      p = SiegelPoint(z, w, rc * s.rho(), c0.exponent()).renormalized();
    }
    if (kobayashi_distance(p, center, conv) < r) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace balldyn
