#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "balldyn/geometry.hpp"

namespace balldyn {

/// Image point escaped the domain of a self-map (only possible for a
/// SiegelPolynomial that is not a self-map).
class DomainViolation : public Error {
 public:
  using Error::Error;
};

/// N = (n_1, ..., n_k) with the entrywise partial order.
struct MultiIndex {
  std::vector<int> entries;

  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> e);

  int size() const { return static_cast<int>(entries.size()); }
  static MultiIndex zero(int k);
  static MultiIndex unit(int j, int k);      // E_j
  static MultiIndex diagonal(int n, int k);  // (n, ..., n)

  MultiIndex operator+(const MultiIndex& o) const;
  bool operator==(const MultiIndex& o) const = default;
  // Partial order: M >= N iff entrywise.
  bool dominates(const MultiIndex& o) const;
};

// z -> U * M_a(z), with M_a the Mobius involution composed with -1 so that
// M_a(a) = 0 and M_a^{-1} = M_{-a}.
struct BallAutomorphism {
  CMat U;
  CVec a;
};

// (z, w) -> (alpha z + c.w + i w^T S w + beta, A w + b) on H^m; c.w is bilinear.
struct SiegelPolynomial {
  double alpha = 1.0;
  CVec c;
  CMat S;
  cplx beta{0.0, 0.0};
  CMat A;
  CVec b;

  int dim() const { return 1 + static_cast<int>(A.rows()); }
  static SiegelPolynomial identity(int m);
  static SiegelPolynomial linear(double alpha, const CMat& A);
};

// (z, w, y) -> (2z + i w^2, w, sqrt2 y_1..sqrt2 y_{q-1}, 0, ..., 0)
struct ExampleHyperbolic {
  int m = 2;
  int q = 1;
};

// (z, w, y) -> (z + i r^2 - 2 r w, w - i r, y_1..y_{p-2}, 0, ..., 0)
struct ExampleParabolic {
  int m = 2;
  int p = 2;
  double r = 1.0;
};

class MapDescription;

// maps[0] is applied first.
struct Composition {
  std::vector<MapDescription> maps;
};

struct Iterate {
  std::shared_ptr<const MapDescription> base;
  int power = 0;
};

class MapDescription {
 public:
  using Variant = std::variant<BallAutomorphism, SiegelPolynomial, ExampleHyperbolic,
                               ExampleParabolic, Composition, Iterate>;

  MapDescription(BallAutomorphism f);
  MapDescription(SiegelPolynomial f);
  MapDescription(ExampleHyperbolic f);
  MapDescription(ExampleParabolic f);
  MapDescription(Composition f);
  MapDescription(Iterate f);

  static MapDescription identity_ball(int q);
  static MapDescription identity_siegel(int m);
  static MapDescription iterate(const MapDescription& base, int power);
  // g after f.
  static MapDescription then(const MapDescription& f, const MapDescription& g);

  const Variant& v() const { return v_; }
  DomainKind domain() const { return domain_; }
  int dim() const { return dim_; }
  std::string tag() const;

 private:
  void check();
  Variant v_;
  DomainKind domain_ = DomainKind::Ball;
  int dim_ = 0;
};

enum class CertificateKind { Exact, Numeric, Unverified };

struct Certificate {
  CertificateKind kind = CertificateKind::Unverified;
  bool valid = false;
  double residual = 0.0;
  double tol = 0.0;
  std::optional<DomainPoint> witness;
  std::string note;
};

std::string to_string(CertificateKind k);

struct CommutingFamily {
  std::vector<MapDescription> maps;
  Certificate certificate;

  int size() const { return static_cast<int>(maps.size()); }
  DomainKind domain() const;
  int dim() const;
};

// --- evaluation -----------------------------------------------------------

DomainPoint eval(const MapDescription& f, const DomainPoint& x);

// Jacobian in represented coordinates.
CMat jacobian(const MapDescription& f, const DomainPoint& x);

// Image together with the Jacobian in scaled frames: for Siegel points
// D_{e'}^{-1} J D_e with D_e = diag(2^e, 2^{e/2} I); for ball points plain J.
struct FramedStep {
  DomainPoint image;
  CMat frame_jacobian;
};
FramedStep eval_framed(const MapDescription& f, const DomainPoint& x);

// Diagonal block D_e used to pass between frames (identity for ball points).
RVec frame_scaling(const DomainPoint& x);

// --- structured algebra ---------------------------------------------------

// Exact lowering of Siegel-domain tags to a single polynomial.
std::optional<SiegelPolynomial> lower_to_polynomial(const MapDescription& f);
// g after f.
SiegelPolynomial compose(const SiegelPolynomial& f, const SiegelPolynomial& g);
double coefficient_distance(const SiegelPolynomial& f, const SiegelPolynomial& g);

// Ball automorphisms are closed under composition; g after f.
BallAutomorphism compose(const BallAutomorphism& f, const BallAutomorphism& g);
BallAutomorphism inverse(const BallAutomorphism& f);
std::optional<BallAutomorphism> lower_to_automorphism(const MapDescription& f);
// (q+1)x(q+1) matrix acting on homogeneous coordinates (z, 1).
CMat lift(const BallAutomorphism& f);
// Recover (U, a) from a lift matrix (any nonzero multiple).
BallAutomorphism from_lift(const CMat& G);

// --- families -------------------------------------------------------------

DomainPoint iterate_multiindex(const CommutingFamily& F, const MultiIndex& N,
                               const DomainPoint& x);
// F^N together with its frame Jacobian.
FramedStep iterate_multiindex_framed(const CommutingFamily& F, const MultiIndex& N,
                                     const DomainPoint& x);

// Compares two maps on the same domain: exact at coefficient level when
// both lower to a structured class, sampled otherwise.
Certificate compare_maps(const MapDescription& h1, const MapDescription& h2, int samples,
                         double tol, std::uint64_t seed);
Certificate commute_check(const MapDescription& f, const MapDescription& g, int samples = 100,
                          double tol = 1e-9, std::uint64_t seed = 0);
Certificate validate_self_map(const MapDescription& f, int samples = 100,
                              std::uint64_t seed = 0);

// Pairwise commute_check over all members; the weakest certificate wins.
CommutingFamily make_family(std::vector<MapDescription> maps, int samples = 100,
                            double tol = 1e-9, std::uint64_t seed = 0);

// Sample points of the domain used by the checks: ball points of norm < 0.95,
// Siegel points with heights spread over several decades.
std::vector<DomainPoint> sample_domain(DomainKind kind, int dim, int count, std::uint64_t seed);

}  // namespace balldyn
