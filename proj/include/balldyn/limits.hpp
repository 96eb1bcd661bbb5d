#pragma once

#include <functional>
#include <optional>
#include <vector>

namespace balldyn {

/// Bracketed estimate of a limit; lower <= value <= upper.
struct LimitEstimate {
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct Extrapolation {
  double value = 0.0;
  double error = 0.0;  // difference between the two best tableau entries
  int order = 0;
};

// Polynomial extrapolation in h = 1/n of seq[n-1] (n = 1..N) to h = 0, using
// the geometric nodes N, N/2, N/4, ... (>= 4).  Orders up to 4 are tried; the
// entry with the smallest error estimate wins.
Extrapolation richardson(const std::vector<double>& seq);

// Limit of a sequence whose last differences shrink by a stable factor
// r <= 0.9; empty when the tail does not look geometric.
std::optional<Extrapolation> geometric_tail(const std::vector<double>& seq);

// Estimate for a sequence that converges from above (non-increasing): the last
// term is a valid upper bound.  A geometric tail is summed directly; otherwise
// the extrapolation supplies value and lower end.
LimitEstimate estimate_from_above(const std::vector<double>& seq, double tol);

}  // namespace balldyn
