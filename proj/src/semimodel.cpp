#include "balldyn/semimodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "balldyn/kernels.hpp"

namespace balldyn {

namespace {

constexpr double kPi = 3.14159265358979323846;

double wrap_phase(double t) {
  t = std::remainder(t, 2.0 * kPi);
  return t <= -kPi ? t + 2.0 * kPi : t;
}

CMat pinv(const CMat& m) {
  if (m.rows() == 0 || m.cols() == 0) return CMat::Zero(m.cols(), m.rows());
  return Eigen::CompleteOrthogonalDecomposition<CMat>(m).pseudoInverse();
}

CMat frame_metric(const DomainPoint& x, const MetricConvention& conv) {
  if (const auto* b = std::get_if<BallPoint>(&x)) return kobayashi_metric_form_ball(*b, conv).matrix();
  return siegel_frame_metric(std::get<SiegelPoint>(x), conv).matrix();
}

void require_certificate(const CommutingFamily& F, const char* who) {
  if (F.maps.empty()) throw InvalidArgument(std::string(who) + ": empty family");
  if (!F.certificate.valid)
    throw InvalidArgument(std::string(who) + ": family has no valid commuting certificate");
}

// --- Cayley intertwiner pieces

SiegelPoint cayley_forward(const CayleyIntertwiner& L, const BallPoint& x) {
  BallPoint vx(L.V * x.coords(), x.defect());
  SiegelPoint s = cayley(vx);
  int e = s.exponent();
  CVec W0 = L.W0 * pow2_half(-e);
  cplx c0 = L.c0 * std::ldexp(1.0, -e);
  cplx z = s.z() - 2.0 * kI * herm(s.w(), W0) + c0;
  CVec w = L.Q * (s.w() - W0);
  return SiegelPoint(z, w, s.rho(), e).renormalized();
}

BallPoint cayley_backward(const CayleyIntertwiner& L, const SiegelPoint& s) {
  int e = s.exponent();
  CVec W0 = L.W0 * pow2_half(-e);
  cplx c0 = L.c0 * std::ldexp(1.0, -e);
  CVec wp = L.Q.adjoint() * s.w();
  cplx z = s.z() + 2.0 * kI * herm(wp, W0) + 2.0 * kI * W0.squaredNorm() - c0;
  BallPoint b = cayley_inverse(SiegelPoint(z, wp + W0, s.rho(), e));
  return BallPoint(L.V.adjoint() * b.coords(), b.defect());
}

// l g l^{-1} for an automorphism g fixing both points sent to 0 and infinity.
SiegelPolynomial conjugate_linear(const CayleyIntertwiner& L, const BallAutomorphism& g) {
  int q = L.dim();
  Intertwiner il = L;
  SiegelPoint base(kI, CVec::Zero(q - 1));
  BallPoint y = cayley_backward(L, base);
  MapDescription gm = g;
  DomainPoint gy = eval(gm, y);
  CMat Jl = intertwiner_jacobian(il, y);
  CMat J = intertwiner_jacobian(il, gy) * jacobian(gm, y) * Jl.inverse();
  SiegelPolynomial lin = SiegelPolynomial::linear(J(0, 0).real(), J.bottomRightCorner(q - 1, q - 1));
  double off = std::abs(J(0, 0).imag()) + J.row(0).tail(q - 1).norm() + J.col(0).tail(q - 1).norm();
  if (!(J(0, 0).real() > 0.0) || off > 1e-8 * J.norm())
    throw Unsupported("gamma: map does not fix the model's fixed points");
  MapDescription lm = lin;
  for (const auto& x : sample_domain(DomainKind::Ball, q, 8, 99)) {
    double r = kobayashi_distance(apply_intertwiner(il, eval(gm, x)), eval(lm, apply_intertwiner(il, x)));
    if (r > 1e-8) throw Unsupported("gamma: map does not descend to a linear automorphism");
  }
  return lin;
}

struct HyperbolicData {
  double lambda = 1.0;  // dilation at the attracting point
  CVec attract;
  CVec repel;
};

std::optional<HyperbolicData> hyperbolic_data(const BallAutomorphism& f) {
  CMat G = lift(f);
  int q = static_cast<int>(f.U.rows());
  Eigen::ComplexEigenSolver<CMat> es(G);
  int imax = 0, imin = 0;
  for (int k = 0; k <= q; ++k) {
    double a = std::abs(es.eigenvalues()[k]);
    if (a > std::abs(es.eigenvalues()[imax])) imax = k;
    if (a < std::abs(es.eigenvalues()[imin])) imin = k;
  }
  double ratio = std::abs(es.eigenvalues()[imin]) / std::abs(es.eigenvalues()[imax]);
  if (ratio > 1.0 - 1e-9) return std::nullopt;
  auto boundary = [&](int k) {
    CVec v = es.eigenvectors().col(k);
    CVec p = v.head(q) / v[q];
    return CVec(p / p.norm());
  };
  return HyperbolicData{ratio, boundary(imax), boundary(imin)};
}

// Unitary V with V p = e1.
CMat unitary_to_e1(const CVec& p) {
  int q = static_cast<int>(p.size());
  CMat M(q, q + 1);
  M.col(0) = p;
  M.rightCols(q) = CMat::Identity(q, q);
  Eigen::HouseholderQR<CMat> qr(M);
  CMat Q = qr.householderQ() * CMat::Identity(q, q);
  cplx c = Q.col(0).dot(p);
  Q.col(0) *= c / std::abs(c);
  return Q.adjoint();
}

void check_polynomial_shape(const PolynomialIntertwiner& l) {
  int n = static_cast<int>(l.P.cols());
  if (l.K.rows() != n || l.K.cols() != n)
    throw InvalidArgument("polynomial intertwiner: K and P sizes disagree");
}

}  // namespace

// ------------------------------------------------------------ normal forms

MapDescription to_map(const NormalFormAutomorphism& t) {
  return std::visit(
      [](const auto& a) -> MapDescription {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, SiegelHyperbolic>) {
          if (!(a.lambda > 0.0) || a.lambda == 1.0)
            throw InvalidArgument("SiegelHyperbolic: lambda must be positive and != 1");
          double mu = 1.0 / a.lambda;
          CVec d(a.phases.size());
          for (int k = 0; k < d.size(); ++k) d[k] = std::polar(std::sqrt(mu), a.phases[k]);
          return SiegelPolynomial::linear(mu, d.asDiagonal().toDenseMatrix());
        } else if constexpr (std::is_same_v<T, SiegelParabolicTranslation>) {
          if (a.d < 2) throw InvalidArgument("SiegelParabolicTranslation: d must be >= 2");
          SiegelPolynomial p = SiegelPolynomial::identity(a.d);
          p.c[0] = -2.0 * a.r;
          p.beta = cplx(0.0, a.r * a.r);
          p.b[0] = cplx(0.0, -a.r);
          return p;
        } else if constexpr (std::is_same_v<T, ExplicitLinear>) {
          for (int k = 0; k < a.diag.size(); ++k)
            if (std::abs(std::norm(a.diag[k]) - a.alpha) > 1e-12 * a.alpha)
              throw InvalidArgument("ExplicitLinear: |D_a|^2 must equal alpha");
          return SiegelPolynomial::linear(a.alpha, a.diag.asDiagonal().toDenseMatrix());
        } else {
          return a.f;
        }
      },
      t);
}

int dim_of(const NormalFormAutomorphism& t) {
  return std::visit(
      [](const auto& a) -> int {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, SiegelHyperbolic>) return 1 + static_cast<int>(a.phases.size());
        else if constexpr (std::is_same_v<T, SiegelParabolicTranslation>) return a.d;
        else if constexpr (std::is_same_v<T, ExplicitLinear>) return 1 + static_cast<int>(a.diag.size());
        else return static_cast<int>(a.f.U.rows());
      },
      t);
}

double dilation(const NormalFormAutomorphism& t) {
  return std::visit(
      [](const auto& a) -> double {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, SiegelHyperbolic>) return std::min(a.lambda, 1.0 / a.lambda);
        else if constexpr (std::is_same_v<T, SiegelParabolicTranslation>) return 1.0;
        else if constexpr (std::is_same_v<T, ExplicitLinear>) return std::min(a.alpha, 1.0 / a.alpha);
        else {
          auto h = hyperbolic_data(a.f);
          return h ? h->lambda : 1.0;
        }
      },
      t);
}

std::string describe(const NormalFormAutomorphism& t) {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, SiegelHyperbolic>) {
          os << "(z,w) -> (z/" << a.lambda << ", e^{it} w/sqrt(" << a.lambda << "))";
        } else if constexpr (std::is_same_v<T, SiegelParabolicTranslation>) {
          os << "(z,w) -> (z + i" << a.r * a.r << " - " << 2 * a.r << " w1, w1 - i" << a.r << ", ...)";
        } else if constexpr (std::is_same_v<T, ExplicitLinear>) {
          os << "(z,w) -> (" << a.alpha << " z, D w)";
        } else {
          os << "ball automorphism";
        }
      },
      t);
  return os.str();
}

// ------------------------------------------------------------ intertwiners

DomainPoint apply_intertwiner(const Intertwiner& l, const DomainPoint& x) {
  return std::visit(
      [&](const auto& a) -> DomainPoint {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, IdentityIntertwiner>) {
          if (kind_of(x) != a.domain || dim_of(x) != a.dim)
            throw InvalidArgument("intertwiner: point outside the source domain");
          return x;
        } else if constexpr (std::is_same_v<T, PolynomialIntertwiner>) {
          check_polynomial_shape(a);
          const auto* s = std::get_if<SiegelPoint>(&x);
          if (!s || s->dim() != a.source_dim())
            throw InvalidArgument("intertwiner: point outside the source domain");
          const CVec& w = s->w();
          CVec Kw = a.K * w;
          cplx quad = dot_bilinear(w, Kw);
          CVec W = a.P * w;
          double rho = s->rho() + w.squaredNorm() - W.squaredNorm() + quad.real();
          if (!(rho > 0.0)) throw DomainViolation("intertwiner: image outside the Siegel domain");
          return SiegelPoint(s->z() + kI * quad, W, rho, s->exponent()).renormalized();
        } else {
          const auto* b = std::get_if<BallPoint>(&x);
          if (!b || b->dim() != a.dim())
            throw InvalidArgument("intertwiner: point outside the source domain");
          return cayley_forward(a, *b);
        }
      },
      l);
}

CMat intertwiner_jacobian(const Intertwiner& l, const DomainPoint& x) {
  return std::visit(
      [&](const auto& a) -> CMat {
        using T = std::decay_t<decltype(a)>;
        int m = dim_of(x);
        if constexpr (std::is_same_v<T, IdentityIntertwiner>) {
          return CMat::Identity(m, m);
        } else if constexpr (std::is_same_v<T, PolynomialIntertwiner>) {
          check_polynomial_shape(a);
          CVec w = std::get<SiegelPoint>(x).w_value();
          int d = a.target_dim();
          CMat J = CMat::Zero(d, m);
          J(0, 0) = 1.0;
          J.row(0).tail(m - 1) = (2.0 * kI * (0.5 * (a.K + a.K.transpose()) * w)).transpose();
          J.bottomRightCorner(d - 1, m - 1) = a.P;
          return J;
        } else {
          const auto& b = std::get<BallPoint>(x);
          BallPoint vx(a.V * b.coords(), b.defect());
          CMat JT = CMat::Identity(m, m);
          JT.row(0).tail(m - 1) = -2.0 * kI * a.W0.conjugate().transpose();
          CMat JS = CMat::Identity(m, m);
          JS.bottomRightCorner(m - 1, m - 1) = a.Q;
          return JS * JT * cayley_jacobian(vx) * a.V;
        }
      },
      l);
}

double intertwining_residual(const CommutingFamily& F, const SemiModel& model, int samples,
                             std::uint64_t seed) {
  if (!model.intertwiner) throw InvalidArgument("intertwining_residual: model has no intertwiner");
  if (static_cast<int>(model.autos.size()) != F.size())
    throw InvalidArgument("intertwining_residual: one normal form per member required");
  auto xs = sample_domain(F.domain(), F.dim(), samples, seed);
  double worst = 0.0;
  for (int j = 0; j < F.size(); ++j) {
    MapDescription tau = to_map(model.autos[j]);
    std::vector<DomainPoint> lhs, rhs;
    lhs.reserve(xs.size());
    rhs.reserve(xs.size());
    for (const auto& x : xs) {
      lhs.push_back(apply_intertwiner(*model.intertwiner, eval(F.maps[j], x)));
      rhs.push_back(eval(tau, apply_intertwiner(*model.intertwiner, x)));
    }
    for (double r : kernels::distance_batch(lhs, rhs)) worst = std::max(worst, r);
  }
  return worst;
}

// ---------------------------------------------------- numerical functionals

LimitEstimate limit_pseudodistance(const CommutingFamily& F, const DomainPoint& x,
                                   const DomainPoint& y, const SemiModelParams& params) {
  require_certificate(F, "limit_pseudodistance");
  params.conv.validate();
  bool isometries = std::all_of(F.maps.begin(), F.maps.end(),
                                [](const auto& f) { return lower_to_automorphism(f).has_value(); });
  if (isometries) {
    double k = kobayashi_distance(x, y, params.conv);
    return LimitEstimate{k, k, k, 0, true};
  }
  std::vector<double> a;
  DomainPoint u = x, v = y;
  for (int n = 0; n <= params.max_iter; ++n) {
    a.push_back(kobayashi_distance(u, v, params.conv));
    if (n >= params.min_iter && a[n - 1] - a[n] < 1e-3 * params.tol) break;
    u = diagonal_step(F, u);
    v = diagonal_step(F, v);
  }
  return estimate_from_above(a, params.tol);
}

PullbackSpectrum relative_spectrum(const CMat& M, const CMat& H, double rel_tol) {
  PullbackSpectrum out;
  int n = static_cast<int>(M.rows());
  if (n == 0) return out;
  Eigen::LLT<CMat> llt(H);
  if (llt.info() != Eigen::Success) throw InvalidArgument("relative_spectrum: reference not positive");
  CMat T = llt.matrixL().solve(M);
  CMat A = llt.matrixL().solve(CMat(T.adjoint()));
  A = 0.5 * (A + A.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(A, Eigen::EigenvaluesOnly);
  out.eigenvalues = es.eigenvalues().reverse();
  double top = std::max(out.eigenvalues[0], 0.0);
  double floor = std::numeric_limits<double>::epsilon() * top;
  out.rank = 0;
  while (out.rank < n && out.eigenvalues[out.rank] > rel_tol * top) ++out.rank;
  if (out.rank == 0) {
    out.gap = 0.0;
  } else {
    double next = out.rank < n ? std::max(out.eigenvalues[out.rank], floor) : floor;
    out.gap = out.eigenvalues[out.rank - 1] / std::max(next, std::numeric_limits<double>::min());
  }
  return out;
}

PullbackResult limit_pullback_form(const CommutingFamily& F, const DomainPoint& x,
                                   const SemiModelParams& params) {
  require_certificate(F, "limit_pullback_form");
  params.conv.validate();
  if (dim_of(x) != F.dim() || kind_of(x) != F.domain())
    throw InvalidArgument("limit_pullback_form: point outside the domain");
  int m = dim_of(x);
  CMat Href = frame_metric(x, params.conv);
  FramedStep acc{x, CMat::Identity(m, m)};
  PullbackResult out;
  CMat M, prev;
  for (int n = 0;; ++n) {
    M = acc.frame_jacobian.adjoint() * frame_metric(acc.image, params.conv) * acc.frame_jacobian;
    M = 0.5 * (M + M.adjoint());
    out.spectrum = relative_spectrum(M, Href, params.rank_rel_tol);
    out.history.push_back(out.spectrum.eigenvalues);
    out.iterations = n;
    if (n > 0) {
      double change = (M - prev).norm() / std::max(M.norm(), std::numeric_limits<double>::min());
      if (n >= params.min_iter && change < 1e-2 * params.tol &&
          out.spectrum.gap >= params.gap_stop) {
        out.stabilized = true;
        break;
      }
    }
    if (n >= params.max_iter) break;
    prev = M;
    for (int j = F.size() - 1; j >= 0; --j) {
      FramedStep s = eval_framed(F.maps[j], acc.image);
      acc.image = std::move(s.image);
      acc.frame_jacobian = s.frame_jacobian * acc.frame_jacobian;
    }
  }
  RVec D = frame_scaling(x).cwiseInverse();
  out.form = HermitianForm(D.asDiagonal() * M * D.asDiagonal());
  return out;
}

TypeEstimate type_estimate(const CommutingFamily& F, const DomainPoint& x,
                           const SemiModelParams& params) {
  require_certificate(F, "type_estimate");
  if (params.window < 1) throw InvalidArgument("type_estimate: window must be >= 1");
  std::vector<DomainPoint> bases{x};
  for (int i = 1; i < params.window; ++i) bases.push_back(diagonal_step(F, bases.back()));
  auto results = kernels::pullback_forms(F, bases, params);
  TypeEstimate out;
  out.gap = std::numeric_limits<double>::infinity();
  bool agree = true;
  for (const auto& r : results) {
    out.window.push_back(r.spectrum);
    out.gap = std::min(out.gap, r.spectrum.gap);
    agree = agree && r.spectrum.rank == results[0].spectrum.rank;
  }
  if (!agree) {
    out.note = "rank differs across the window";
  } else if (out.gap < params.gap_accept) {
    out.note = "spectral gap below acceptance threshold";
  } else {
    out.d = results[0].spectrum.rank;
  }
  return out;
}

// ------------------------------------------ simultaneous diagonalization

namespace {

void refine(const std::vector<CMat>& Us, const CMat& B, std::mt19937_64& rng,
            std::vector<CVec>& out) {
  int k = static_cast<int>(B.cols());
  if (k == 1) {
    out.push_back(B.col(0));
    return;
  }
  std::vector<CMat> R;
  bool scalar = true;
  for (const auto& U : Us) {
    R.push_back(B.adjoint() * U * B);
    cplx t = R.back().trace() / double(k);
    scalar = scalar && (R.back() - t * CMat::Identity(k, k)).norm() < 1e-10;
  }
  if (scalar) {
    for (int c = 0; c < k; ++c) out.push_back(B.col(c));
    return;
  }
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int attempt = 0; attempt < 4; ++attempt) {
    CMat H = CMat::Zero(k, k);
    for (const auto& r : R) {
      double a = coef(rng), b = coef(rng);
      H += a * (r + r.adjoint()) + b * kI * (r - r.adjoint());
    }
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (H + H.adjoint()));
    const RVec& ev = es.eigenvalues();
    double scale = 1.0 + ev.cwiseAbs().maxCoeff();
    std::vector<int> starts{0};
    for (int i = 1; i < k; ++i)
      if (ev[i] - ev[i - 1] > 1e-8 * scale) starts.push_back(i);
    if (starts.size() == 1) continue;
    starts.push_back(k);
    for (size_t c = 0; c + 1 < starts.size(); ++c) {
      int len = starts[c + 1] - starts[c];
      refine(Us, B * es.eigenvectors().middleCols(starts[c], len), rng, out);
    }
    return;
  }
  for (int c = 0; c < k; ++c) out.push_back(B.col(c));
}

}  // namespace

SimultaneousDiagonalization simultaneous_diagonalize(const std::vector<CMat>& Us, double tol,
                                                     std::uint64_t seed) {
  if (Us.empty()) throw InvalidArgument("simultaneous_diagonalize: no matrices");
  int n = static_cast<int>(Us[0].rows());
  for (const auto& U : Us) {
    if (U.rows() != n || U.cols() != n)
      throw InvalidArgument("simultaneous_diagonalize: matrices must be square of one size");
    if (n > 0 && unitarity_defect(U) > 1e-8)
      throw InvalidArgument("simultaneous_diagonalize: input is not unitary");
  }
  SimultaneousDiagonalization out;
  for (size_t i = 0; i < Us.size(); ++i)
    for (size_t j = i + 1; j < Us.size(); ++j)
      out.max_commutator = std::max(out.max_commutator, (Us[i] * Us[j] - Us[j] * Us[i]).norm());
  if (out.max_commutator > tol) {
    std::ostringstream os;
    os << "simultaneous_diagonalize: matrices do not commute (max commutator norm "
       << out.max_commutator << ")";
    throw InvalidArgument(os.str());
  }
  std::mt19937_64 rng(seed);
  std::vector<CVec> cols;
  if (n > 0) refine(Us, CMat::Identity(n, n), rng, cols);
  CMat B(n, n);
  for (int c = 0; c < n; ++c) B.col(c) = cols[c];

  // phases of each column, then order by the first member (ties by the next ones)
  std::vector<std::vector<double>> ph(n, std::vector<double>(Us.size()));
  for (int c = 0; c < n; ++c)
    for (size_t j = 0; j < Us.size(); ++j)
      ph[c][j] = wrap_phase(std::arg(B.col(c).dot(Us[j] * B.col(c))));
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto key = [&](int c) {
    std::vector<long long> k;
    for (double t : ph[c]) k.push_back(std::llround(t * 1e9));
    return k;
  };
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key(a) < key(b); });
  CMat Bs(n, n);
  for (int c = 0; c < n; ++c) Bs.col(c) = B.col(order[c]);
  out.Q = Bs.adjoint();
  for (const auto& U : Us) {
    CMat D = out.Q * U * Bs;
    CVec d = D.diagonal();
    RVec t(n);
    for (int c = 0; c < n; ++c) t[c] = wrap_phase(std::arg(d[c]));
    D.diagonal().setZero();
    out.residual = std::max(out.residual, n ? D.cwiseAbs().maxCoeff() : 0.0);
    out.diagonals.push_back(d);
    out.phases.push_back(t);
  }
  return out;
}

// -------------------------------------------------------------- exact models

SemiModel csm_commuting_hyperbolic_automorphisms(const CommutingFamily& F, std::uint64_t seed) {
  require_certificate(F, "csm");
  std::vector<BallAutomorphism> autos;
  std::vector<HyperbolicData> data;
  for (int j = 0; j < F.size(); ++j) {
    auto a = lower_to_automorphism(F.maps[j]);
    if (!a) throw InvalidArgument("csm: member " + std::to_string(j) + " is not a ball automorphism");
    auto h = hyperbolic_data(*a);
    if (!h)
      throw InvalidArgument("csm: member " + std::to_string(j) +
                            " is not hyperbolic (elliptic or parabolic automorphism)");
    autos.push_back(*a);
    data.push_back(*h);
  }
  int q = F.dim();
  BoundaryPoint p(data[0].attract), pr(data[0].repel);
  std::vector<bool> towards_infinity;
  for (int j = 0; j < F.size(); ++j) {
    BoundaryPoint a(data[j].attract), r(data[j].repel);
    if (chordal_distance(a, p) < 1e-6 && chordal_distance(r, pr) < 1e-6) {
      towards_infinity.push_back(true);
    } else if (chordal_distance(a, pr) < 1e-6 && chordal_distance(r, p) < 1e-6) {
      towards_infinity.push_back(false);
    } else {
      throw InvalidArgument("csm: member " + std::to_string(j) +
                            " does not share the boundary fixed points of member 0");
    }
  }

  CayleyIntertwiner L;
  L.V = unitary_to_e1(p.coords());
  SiegelBoundary s = cayley(BoundaryPoint(CVec(L.V * pr.coords())));
  if (s.at_infinity) throw InvalidArgument("csm: attracting and repelling points coincide");
  L.W0 = s.w;
  L.c0 = -s.z + 2.0 * kI * s.w.squaredNorm();
  L.Q = CMat::Identity(q - 1, q - 1);

  std::vector<double> mu;
  std::vector<CMat> Us;
  for (int j = 0; j < F.size(); ++j) {
    SiegelPolynomial lin = conjugate_linear(L, autos[j]);
    if ((lin.alpha > 1.0) != towards_infinity[j])
      throw InvariantViolation("csm: conjugated dilation points the wrong way");
    mu.push_back(lin.alpha);
    Us.push_back(nearest_unitary(lin.A / std::sqrt(lin.alpha)));
  }
  SimultaneousDiagonalization sd = simultaneous_diagonalize(Us, 1e-8, seed);
  L.Q = sd.Q;

  SemiModel model;
  model.d = q;
  model.base = DomainKind::Siegel;
  model.intertwiner = L;
  for (int j = 0; j < F.size(); ++j) {
    double lam = 1.0 / mu[j];
    model.autos.push_back(SiegelHyperbolic{lam, sd.phases[j]});
  }
  model.exactness = Exactness::Exact;
  model.residual = intertwining_residual(F, model, 200, seed);
  if (model.residual > 1e-8) {
    std::ostringstream os;
    os << "csm: intertwining residual " << model.residual << " exceeds 1e-8";
    throw InvariantViolation(os.str());
  }
  model.note = "attracting point of member 0 sent to infinity";
  return model;
}

SemiModel identity_model(const CommutingFamily& F) {
  require_certificate(F, "identity_model");
  SemiModel model;
  model.d = F.dim();
  model.base = DomainKind::Ball;
  model.intertwiner = IdentityIntertwiner{DomainKind::Ball, F.dim()};
  for (int j = 0; j < F.size(); ++j) {
    auto a = lower_to_automorphism(F.maps[j]);
    if (!a) throw InvalidArgument("identity_model: members must be ball automorphisms");
    model.autos.push_back(BallIsometry{*a});
  }
  model.exactness = Exactness::Exact;
  return model;
}

ExampleModels csm_example_family(int m, int q, int p, double r, std::uint64_t seed) {
  if (!(q >= 1 && q <= m - 1)) throw InvalidArgument("example: need 1 <= q <= m-1");
  if (!(p >= 2 && p <= m)) throw InvalidArgument("example: need 2 <= p <= m");
  if (!(r != 0.0) || !std::isfinite(r)) throw InvalidArgument("example: r must be finite and nonzero");
  int n = m - 1;
  ExampleModels out;
  MapDescription f = ExampleHyperbolic{m, q}, g = ExampleParabolic{m, p, r};
  out.family = make_family({f, g}, 100, 1e-9, seed);

  auto selector = [n](int first, int count) {
    CMat P = CMat::Zero(count, n);
    for (int k = 0; k < count; ++k) P(k, first + k) = 1.0;
    return P;
  };
  CMat E11 = CMat::Zero(n, n);
  E11(0, 0) = 1.0;
  auto sqrt2 = [](int k) { return CVec(CVec::Constant(k, std::sqrt(2.0))); };

  auto finish = [&](SemiModel& model, const CommutingFamily& fam) {
    model.exactness = Exactness::Exact;
    model.residual = intertwining_residual(fam, model, 200, seed);
    if (model.residual > 1e-10) {
      std::ostringstream os;
      os << "example: intertwining residual " << model.residual;
      throw InvariantViolation(os.str());
    }
  };

  out.f.d = q;
  out.f.intertwiner = PolynomialIntertwiner{E11, selector(1, q - 1)};
  out.f.autos = {ExplicitLinear{2.0, sqrt2(q - 1)}};
  finish(out.f, make_family({f}));

  out.g.d = p;
  out.g.intertwiner = PolynomialIntertwiner{CMat::Zero(n, n), selector(0, p - 1)};
  out.g.autos = {SiegelParabolicTranslation{p, r}};
  finish(out.g, make_family({g}));

  int u = std::min(p - 2, q - 1);
  out.pair.d = u + 1;
  out.pair.intertwiner = PolynomialIntertwiner{E11, selector(1, u)};
  out.pair.autos = {ExplicitLinear{2.0, sqrt2(u)}, ExplicitLinear{1.0, CVec::Ones(u)}};
  finish(out.pair, out.family);
  return out;
}

MapDescription gamma_induced(const MapDescription& g, const SemiModel& model) {
  if (model.exactness != Exactness::Exact || !model.intertwiner)
    throw InvalidArgument("gamma: model must be exact");
  return std::visit(
      [&](const auto& l) -> MapDescription {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, IdentityIntertwiner>) {
          if (g.domain() != l.domain || g.dim() != l.dim)
            throw InvalidArgument("gamma: map and model live on different domains");
          return g;
        } else if constexpr (std::is_same_v<T, CayleyIntertwiner>) {
          auto a = lower_to_automorphism(g);
          if (!a || a->U.rows() != l.dim()) throw Unsupported("gamma: expected a ball automorphism");
          return conjugate_linear(l, *a);
        } else {
          check_polynomial_shape(l);
          auto h = lower_to_polynomial(g);
          if (!h || h->dim() != l.source_dim()) throw Unsupported("gamma: expected a Siegel polynomial");
          const CMat K = 0.5 * (l.K + l.K.transpose());
          const CMat& P = l.P;
          CMat Pp = pinv(P);
          SiegelPolynomial G;
          G.alpha = h->alpha;
          CVec rc = h->c + 2.0 * kI * (h->A.transpose() * (K * h->b));
          G.c = Pp.transpose() * rc;
          CMat R = h->S + h->A.transpose() * K * h->A - h->alpha * K;
          R = 0.5 * (R + R.transpose());
          G.S = Pp.transpose() * R * Pp;
          G.beta = h->beta + kI * dot_bilinear(h->b, K * h->b);
          G.A = P * h->A * Pp;
          G.b = P * h->b;
          double scale = 1.0 + rc.norm() + R.norm() + h->A.norm();
          double res = (P.transpose() * G.c - rc).norm() + (P.transpose() * G.S * P - R).norm() +
                       (G.A * P - P * h->A).norm();
          if (res > 1e-10 * scale) throw Unsupported("gamma: map does not descend through the model");
          return G;
        }
      },
      *model.intertwiner);
}

UnivalenceReport univalence_check(const CommutingFamily& F, const SemiModel& model,
                                  const DomainPoint& p, double r, int max_n, int pairs,
                                  std::uint64_t seed) {
  require_certificate(F, "univalence_check");
  if (model.exactness != Exactness::Exact || !model.intertwiner)
    throw InvalidArgument("univalence_check: model must be exact with a structured intertwiner");
  if (kind_of(p) != F.domain() || dim_of(p) != F.dim())
    throw InvalidArgument("univalence_check: point outside the domain");
  if (!(r > 0.0)) throw InvalidArgument("univalence_check: radius must be positive");
  UnivalenceReport out;
  out.guaranteed = model.d == F.dim();
  std::vector<bool> collided;
  DomainPoint center = p;
  for (int N = 0; N <= max_n; ++N) {
    auto pts = kobayashi_ball_sample(center, r, 2 * pairs, seed + N);
    double worst = std::numeric_limits<double>::infinity();
    bool hit = false;
    for (size_t i = 0; i + 1 < pts.size(); i += 2) {
      double kx = kobayashi_distance(pts[i], pts[i + 1]);
      if (kx < 1e-12) continue;
      double ky = kobayashi_distance(apply_intertwiner(*model.intertwiner, pts[i]),
                                     apply_intertwiner(*model.intertwiner, pts[i + 1]));
      worst = std::min(worst, ky / kx);
      hit = hit || ky / kx < 1e-10;
    }
    out.min_ratio.push_back(worst);
    collided.push_back(hit);
    center = diagonal_step(F, center);
  }
  int N0 = max_n + 1;
  while (N0 > 0 && !collided[N0 - 1]) --N0;
  if (N0 <= max_n) out.threshold = N0;
  bool any = std::find(collided.begin(), collided.end(), true) != collided.end();
  out.collision_in_guaranteed_regime = out.guaranteed && any;
  out.note = out.guaranteed ? "automorphism type: injectivity asserted"
                            : "type below ambient dimension: informational only";
  return out;
}

}  // namespace balldyn
