#pragma once

// Independent reference computations for the tests.  They use textbook
// formulas in long double and share no code with the library kernels.

#include <cmath>
#include <complex>
#include <random>

#include "balldyn/geometry.hpp"
#include "balldyn/maps.hpp"

namespace oracle {

using ld = long double;
using lc = std::complex<long double>;

inline ld ball_distance(const balldyn::CVec& a, const balldyn::CVec& b, ld scale = 2) {
  ld na = 0, nb = 0;
  lc ab = 0;
  for (int j = 0; j < a.size(); ++j) {
    lc x(a[j].real(), a[j].imag()), y(b[j].real(), b[j].imag());
    na += std::norm(x);
    nb += std::norm(y);
    ab += x * std::conj(y);
  }
  ld ratio = (1 - na) * (1 - nb) / std::norm(lc(1) - ab);
  ld m = std::sqrt(std::max<ld>(0, 1 - ratio));
  return scale * std::atanh(m);
}

// Siegel point (Z, W) -> ball, by the inverse Cayley formula in long double.
inline void siegel_to_ball(lc Z, const std::vector<lc>& W, std::vector<lc>& out) {
  out.assign(1 + W.size(), 0);
  lc u = Z + lc(0, 1);
  out[0] = (Z - lc(0, 1)) / u;
  for (size_t j = 0; j < W.size(); ++j) out[j + 1] = ld(2) * W[j] / u;
}

inline ld siegel_distance(lc Z1, const std::vector<lc>& W1, lc Z2, const std::vector<lc>& W2,
                          ld scale = 2) {
  // Classical formula: with rho = Im z - |w|^2,
  // cosh^2(k/scale) = |(z1 - conj z2)/(2i) - <w1, w2>|^2 / (rho1 rho2)
  ld r1 = Z1.imag(), r2 = Z2.imag();
  lc h = 0;
  for (size_t j = 0; j < W1.size(); ++j) {
    r1 -= std::norm(W1[j]);
    r2 -= std::norm(W2[j]);
    h += W1[j] * std::conj(W2[j]);
  }
  lc t = (Z1 - std::conj(Z2)) / lc(0, 2) - h;
  ld c2 = std::norm(t) / (r1 * r2);
  return scale * std::acosh(std::sqrt(std::max<ld>(1, c2)));
}

inline ld siegel_distance(const balldyn::SiegelPoint& a, const balldyn::SiegelPoint& b,
                          ld scale = 2) {
  auto conv = [](const balldyn::SiegelPoint& p, lc& Z, std::vector<lc>& W) {
    balldyn::cplx z = p.z_value();
    Z = lc(z.real(), z.imag());
    balldyn::CVec w = p.w_value();
    W.clear();
    for (int j = 0; j < w.size(); ++j) W.emplace_back(w[j].real(), w[j].imag());
  };
  lc Z1, Z2;
  std::vector<lc> W1, W2;
  conv(a, Z1, W1);
  conv(b, Z2, W2);
  return siegel_distance(Z1, W1, Z2, W2, scale);
}

inline balldyn::CMat random_unitary(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0, 1);
  balldyn::CMat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = {g(rng), g(rng)};
  Eigen::HouseholderQR<balldyn::CMat> qr(m);
  balldyn::CMat q = qr.householderQ();
  return q;
}

inline balldyn::CVec random_ball_vec(int n, std::mt19937_64& rng, double rmax = 0.9) {
  std::normal_distribution<double> g(0, 1);
  std::uniform_real_distribution<double> u(0, 1);
  balldyn::CVec v(n);
  for (int j = 0; j < n; ++j) v[j] = {g(rng), g(rng)};
  return v * (rmax * std::pow(u(rng), 1.0 / (2 * n)) / v.norm());
}

inline balldyn::SiegelPoint random_siegel(int m, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0, 1);
  std::uniform_real_distribution<double> u(0, 1);
  balldyn::CVec w(m - 1);
  for (int j = 0; j < m - 1; ++j) w[j] = {g(rng), g(rng)};
  double rho = std::pow(10.0, -1.0 + 2.0 * u(rng));
  return balldyn::SiegelPoint({4 * u(rng) - 2, rho + w.squaredNorm()}, w);
}

inline balldyn::BallAutomorphism random_automorphism(int q, std::mt19937_64& rng,
                                                     double rmax = 0.8) {
  return {random_unitary(q, rng), random_ball_vec(q, rng, rmax)};
}

// Ball automorphism conjugate, through the Cayley transform, to the Siegel map
// (z, w) -> (mu z, sqrt(mu) e^{i t_a} w_a).  Built on homogeneous coordinates.
inline balldyn::BallAutomorphism from_siegel_linear(double mu, const std::vector<double>& phases) {
  using balldyn::cplx;
  int q = 1 + static_cast<int>(phases.size());
  balldyn::CMat C = balldyn::CMat::Zero(q + 1, q + 1);
  C(0, 0) = cplx(0, 1);
  C(0, q) = cplx(0, 1);
  for (int k = 1; k < q; ++k) C(k, k) = cplx(0, 1);
  C(q, 0) = -1.0;
  C(q, q) = 1.0;
  balldyn::CMat T = balldyn::CMat::Zero(q + 1, q + 1);
  T(0, 0) = mu;
  for (int k = 1; k < q; ++k) T(k, k) = std::polar(std::sqrt(mu), phases[k - 1]);
  T(q, q) = 1.0;
  return balldyn::from_lift(C.inverse() * T * C);
}

}  // namespace oracle
