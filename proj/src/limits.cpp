#include "balldyn/limits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace balldyn {

Extrapolation richardson(const std::vector<double>& seq) {
  int N = static_cast<int>(seq.size());
  Extrapolation out;
  if (N == 0) return out;
  out.value = seq.back();
  std::vector<int> nodes;
  for (int n = N; n >= 4; n /= 2) nodes.push_back(n);
  std::reverse(nodes.begin(), nodes.end());
  int J = static_cast<int>(nodes.size());
  if (J < 2) {
    out.error = N >= 2 ? std::abs(seq[N - 1] - seq[N - 2]) : std::abs(seq.back());
    return out;
  }
  // Neville tableau T[j][k]: degree-k interpolant through nodes j-k..j, at h = 0.
  int K = std::min(4, J - 1);
  std::vector<std::vector<double>> T(J, std::vector<double>(K + 1, 0.0));
  for (int j = 0; j < J; ++j) {
    T[j][0] = seq[nodes[j] - 1];
    for (int k = 1; k <= std::min(j, K); ++k) {
      double hj = 1.0 / nodes[j], hjk = 1.0 / nodes[j - k];
      T[j][k] = T[j][k - 1] + (T[j][k - 1] - T[j - 1][k - 1]) * hj / (hjk - hj);
    }
  }
  int last = J - 1;
  out.error = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= K; ++k) {
    double err = k == 0 ? std::abs(T[last][0] - T[last - 1][0])
                        : std::abs(T[last][k] - T[last][k - 1]);
    if (err < out.error) {
      out.error = err;
      out.value = T[last][k];
      out.order = k;
    }
  }
  return out;
}

std::optional<Extrapolation> geometric_tail(const std::vector<double>& seq) {
  int N = static_cast<int>(seq.size());
  if (N < 5) return std::nullopt;
  double d[4];
  for (int i = 0; i < 4; ++i) d[i] = seq[N - 4 + i] - seq[N - 5 + i];
  double last = seq.back(), eps = 4e-16 * std::abs(last);
  if (std::abs(d[3]) <= eps && std::abs(d[2]) <= 4.0 * eps) return Extrapolation{last, 4.0 * std::abs(d[3]) + eps, 0};
  double rmin = 1.0, rmax = 0.0;
  for (int i = 1; i < 4; ++i) {
    if (d[i - 1] == 0.0 || (d[i] > 0) != (d[i - 1] > 0)) return std::nullopt;
    double r = d[i] / d[i - 1];
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
  }
  if (!(rmax <= 0.9 && rmax <= 2.0 * rmin + 1e-3)) return std::nullopt;
  double tail = d[3] * rmax / (1.0 - rmax);
  return Extrapolation{last + tail, std::abs(tail) + eps, 0};
}

LimitEstimate estimate_from_above(const std::vector<double>& seq, double tol) {
  LimitEstimate est;
  int N = static_cast<int>(seq.size());
  est.iterations = N;
  if (N == 0) return est;
  double upper = seq.back();
  est.upper = upper;
  // Geometric tail: the last differences shrink by a stable factor r < 1.
  if (N >= 5) {
    double d[4];
    bool down = true;
    for (int i = 0; i < 4; ++i) {
      d[i] = seq[N - 4 + i - 1] - seq[N - 4 + i];
      down = down && d[i] >= 0.0;
    }
    if (down && d[3] <= 4e-16 * std::abs(upper)) {
      est.value = upper;
      est.lower = std::max(0.0, upper - 4.0 * d[3] - 4e-16 * std::abs(upper));
      est.converged = est.upper - est.lower < tol;
      return est;
    }
    if (down && d[0] > 0.0 && d[1] > 0.0 && d[2] > 0.0) {
      double rmin = 1.0, rmax = 0.0;
      for (int i = 1; i < 4; ++i) {
        double r = d[i] / d[i - 1];
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
      }
      if (rmax <= 0.9 && rmax <= 2.0 * rmin + 1e-3) {
        double tail = d[3] * rmax / (1.0 - rmax);
        est.value = std::max(0.0, upper - tail);
        est.lower = std::max(0.0, upper - 2.0 * tail - 4e-16 * std::abs(upper));
        est.converged = est.upper - est.lower < tol;
        return est;
      }
    }
  }
  Extrapolation ex = richardson(seq);
  double value = std::min(std::max(ex.value, 0.0), upper);
  double err = ex.error + 1e-15 * std::abs(upper);
  est.value = value;
  est.lower = std::max(0.0, std::min(value, ex.value - err));
  est.converged = est.upper - est.lower < tol;
  return est;
}

}  // namespace balldyn
