#pragma once

#include <atomic>
#include <optional>
#include <string>
#include <vector>

#include "balldyn/limits.hpp"
#include "balldyn/maps.hpp"

namespace balldyn {

/// Cooperative cancellation for the long-running estimators.
struct CancelToken {
  std::atomic<bool> cancelled{false};
  void cancel() { cancelled.store(true); }
  bool is_cancelled() const { return cancelled.load(); }
};

class Cancelled : public Error {
 public:
  using Error::Error;
};

struct DynamicsParams {
  int max_iter = 200;
  double tol = 1e-6;
  double tol_lambda = 1e-4;
  double k_max = 20.0;
  double boundary_eps = 1e-9;
  MetricConvention conv{};
  const CancelToken* cancel = nullptr;
};

enum class ClassKind { Elliptic, Hyperbolic, Parabolic, Unknown };
std::string to_string(ClassKind k);

struct Classification {
  ClassKind kind = ClassKind::Unknown;
  std::optional<DomainPoint> fixed_point;  // elliptic
  std::optional<BoundaryPoint> dw;         // hyperbolic / parabolic, in the ball picture
  double lambda = 1.0;                     // reported dilation
  double lambda_quotient = 1.0;            // from (1-|f z|)/(1-|z|) along the orbit
  double lambda_rate = 1.0;                // from the divergence rate
  LimitEstimate rate;                      // divergence rate c(f)
  int iterations = 0;
  std::vector<double> residuals;           // successive Kobayashi steps
  std::string note;
};

std::vector<DomainPoint> orbit(const MapDescription& f, const DomainPoint& x, int n,
                               const CancelToken* cancel = nullptr);

LimitEstimate divergence_rate(const MapDescription& f, const DomainPoint& x, int max_iter = 200,
                              double tol = 1e-6, const MetricConvention& conv = {});

// F^{(1, ..., 1)} y.
DomainPoint diagonal_step(const CommutingFamily& F, const DomainPoint& y);

// Limit of k(F^N x, F^{N+M} x) along the diagonal N = (n, ..., n).
LimitEstimate step(const CommutingFamily& F, const MultiIndex& M, const DomainPoint& x,
                   int max_iter = 200, double tol = 1e-6, const MetricConvention& conv = {});
// The diagonal sequence itself (n = 0..max_iter), for monotonicity checks.
std::vector<double> step_sequence(const CommutingFamily& F, const MultiIndex& M,
                                  const DomainPoint& x, int max_iter,
                                  const MetricConvention& conv = {});

Classification denjoy_wolff(const MapDescription& f, const DomainPoint& x,
                            const DynamicsParams& params = {});

// Point of the closed ball as a function of its Siegel/ball representation.
BallPoint to_ball(const DomainPoint& x);

struct BoundaryFixedPoint {
  cplx xi;            // in the disc coordinate
  BoundaryPoint point;
  double multiplier;  // |m'(xi)|
};

struct GeodesicRestriction {
  bool invariant = false;
  std::optional<DomainPoint> witness;
  Eigen::Matrix2cd mobius = Eigen::Matrix2cd::Identity();  // zeta -> (a zeta + b)/(c zeta + d)
  double max_residual = 0.0;
  bool is_automorphism = false;
  bool is_hyperbolic = false;
  bool is_identity = false;
  double dilation = 1.0;  // smallest boundary multiplier (attracting point)
  std::vector<BoundaryFixedPoint> boundary_fixed_points;
  // affine disc phi(zeta) = c + R zeta u
  CVec center;
  CVec direction;
  double radius = 1.0;
  std::string note;
};

// Restriction of f to the complex line through two boundary points.
// Siegel-domain maps are handled through the Cayley transform.
GeodesicRestriction restrict_to_geodesic(const MapDescription& f, const BoundaryPoint& p,
                                         const BoundaryPoint& p2, int samples = 32,
                                         std::uint64_t seed = 0);

cplx mobius_apply(const Eigen::Matrix2cd& m, cplx z);

}  // namespace balldyn
