#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "balldyn/linalg.hpp"

namespace balldyn {

/// Interior point of the unit ball B^q.
///
/// Besides the coordinates the point carries its defect 1 - |z|^2, computed
/// by whoever produced the point from a cancellation-free expression.  Near the
/// boundary the coordinates alone cannot resolve the defect in double precision.
class BallPoint {
 public:
  BallPoint() = default;
  explicit BallPoint(CVec coords);
  // Trusted constructor; defect must agree with the coordinates to ~1e-12.
  BallPoint(CVec coords, double defect);

  const CVec& coords() const { return z_; }
  int dim() const { return static_cast<int>(z_.size()); }
  double defect() const { return defect_; }
  // 1 - |z|, from the stored defect.
  double gap() const;

 private:
  CVec z_;
  double defect_ = 1.0;
};

/// Point of the unit sphere.
class BoundaryPoint {
 public:
  BoundaryPoint() = default;
  // Normalizes; rejects vectors far from unit length unless normalize is set.
  explicit BoundaryPoint(CVec coords, bool normalize = true);

  const CVec& coords() const { return p_; }
  int dim() const { return static_cast<int>(p_.size()); }

  static BoundaryPoint e1(int q);

 private:
  CVec p_;
};

// Chordal (Euclidean) distance between two points of the sphere.
double chordal_distance(const BoundaryPoint& a, const BoundaryPoint& b);

/// Point of the Siegel domain H^m = { Im z > |w|^2 } in scaled form.
///
/// Represents (2^e z, 2^(e/2) w).  rho = Im z - |w|^2 of the scaled pair is kept
/// alongside, so the represented height is 2^e * rho without cancellation.
class SiegelPoint {
 public:
  SiegelPoint() = default;
  SiegelPoint(cplx z, CVec w, int e = 0);
  // Trusted constructor with a precomputed height.
  SiegelPoint(cplx z, CVec w, double rho, int e);

  cplx z() const { return z_; }
  const CVec& w() const { return w_; }
  double rho() const { return rho_; }
  int exponent() const { return e_; }
  int dim() const { return 1 + static_cast<int>(w_.size()); }

  // Represented values; may overflow for huge exponents.
  cplx z_value() const;
  CVec w_value() const;
  double rho_value() const;
  // log2 of the represented |z| (finite for z != 0).
  double log2_abs_z() const;

  // Same point with the exponent moved (by an even amount) so that the
  // scaled coordinates are of unit size.
  SiegelPoint renormalized() const;
  // Same point re-expressed with exponent e; may lose range.
  SiegelPoint in_frame(int e) const;

 private:
  cplx z_{0.0, 1.0};
  CVec w_;
  double rho_ = 1.0;
  int e_ = 0;
};

// 2^(e/2) for any integer e.
double pow2_half(int e);

enum class DomainKind { Ball, Siegel };

using DomainPoint = std::variant<BallPoint, SiegelPoint>;

DomainKind kind_of(const DomainPoint& p);
int dim_of(const DomainPoint& p);

/// Boundary of H^m: either the point at infinity or a finite point with
/// Im z = |w|^2.
struct SiegelBoundary {
  bool at_infinity = false;
  cplx z{0.0, 0.0};
  CVec w;
};

/// Positive semi-definite Hermitian form on C^q.
class HermitianForm {
 public:
  HermitianForm() = default;
  explicit HermitianForm(CMat m);

  const CMat& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  double quad(const CVec& v) const;

 private:
  CMat m_;
};

struct MetricConvention {
  double scale = 2.0;

  void validate() const;
};

double kobayashi_distance_ball(const BallPoint& a, const BallPoint& b,
                               const MetricConvention& conv = {});
double kobayashi_distance_siegel(const SiegelPoint& a, const SiegelPoint& b,
                                 const MetricConvention& conv = {});
// Dispatches on the point kinds; mixing kinds is an error.
double kobayashi_distance(const DomainPoint& a, const DomainPoint& b,
                          const MetricConvention& conv = {});

HermitianForm kobayashi_metric_form_ball(const BallPoint& a,
                                         const MetricConvention& conv = {});
// In represented coordinates.  For points with large exponents use
// siegel_frame_metric, which is the same form in the point's own frame.
HermitianForm kobayashi_metric_form_siegel(const SiegelPoint& s,
                                           const MetricConvention& conv = {});
HermitianForm siegel_frame_metric(const SiegelPoint& s,
                                  const MetricConvention& conv = {});

SiegelPoint cayley(const BallPoint& p);
SiegelBoundary cayley(const BoundaryPoint& p);
BallPoint cayley_inverse(const SiegelPoint& s);
BoundaryPoint cayley_inverse(const SiegelBoundary& s, int dim);

// Derivatives of the Cayley transform and its inverse, represented coordinates.
CMat cayley_jacobian(const BallPoint& p);
CMat cayley_inverse_jacobian(const SiegelPoint& s);

bool in_koranyi_region(const BallPoint& x, const BoundaryPoint& v, double R);

// Points drawn uniformly in the Mobius chart at `center` with k(., center) < r.
std::vector<DomainPoint> kobayashi_ball_sample(const DomainPoint& center, double r,
                                               int count, std::uint64_t seed,
                                               const MetricConvention& conv = {});

// Ball automorphism M_{-c}: 0 -> c, with the precise defect carried along.
BallPoint mobius_from_origin(const BallPoint& c, const CVec& u);

}  // namespace balldyn
