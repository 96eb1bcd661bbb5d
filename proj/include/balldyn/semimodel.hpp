#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "balldyn/dynamics.hpp"

namespace balldyn {

// --- normal forms ---------------------------------------------------------

// (z, w) -> (z / lambda, e^{i t_a} w_a / sqrt(lambda)) on H^d.  lambda < 1 sends
// orbits to infinity, lambda > 1 to the origin.
struct SiegelHyperbolic {
  double lambda = 0.5;
  RVec phases;  // d - 1 entries in (-pi, pi]
};

// (z, w) -> (z + i r^2 - 2 r w_1, w_1 - i r, w_2, ...) on H^d, d >= 2.
struct SiegelParabolicTranslation {
  int d = 2;
  double r = 1.0;
};

// (z, w) -> (alpha z, D w) with |D_a|^2 = alpha.
struct ExplicitLinear {
  double alpha = 1.0;
  CVec diag;
};

// Automorphism of the ball used as its own normal form (identity models).
struct BallIsometry {
  BallAutomorphism f;
};

using NormalFormAutomorphism =
    std::variant<SiegelHyperbolic, SiegelParabolicTranslation, ExplicitLinear, BallIsometry>;

MapDescription to_map(const NormalFormAutomorphism& t);
int dim_of(const NormalFormAutomorphism& t);
// Dilation at the attracting boundary point (1 for parabolic and elliptic forms).
double dilation(const NormalFormAutomorphism& t);
std::string describe(const NormalFormAutomorphism& t);

// --- intertwiners ---------------------------------------------------------

struct IdentityIntertwiner {
  DomainKind domain = DomainKind::Ball;
  int dim = 1;
};

// H^m -> H^d, (z, w) -> (z + i w^T K w, P w) with K complex symmetric.
struct PolynomialIntertwiner {
  CMat K;
  CMat P;
  int source_dim() const { return 1 + static_cast<int>(P.cols()); }
  int target_dim() const { return 1 + static_cast<int>(P.rows()); }
};

// B^q -> H^q: x -> S_Q(T(C(V x))) with V unitary, C the Cayley transform, T the
// Heisenberg translation (z, w) -> (z - 2i<w, W0> + c0, w - W0), S_Q(z, w) = (z, Q w).
struct CayleyIntertwiner {
  CMat V;
  CVec W0;
  cplx c0{0.0, 0.0};
  CMat Q;
  int dim() const { return static_cast<int>(V.rows()); }
};

using Intertwiner = std::variant<IdentityIntertwiner, PolynomialIntertwiner, CayleyIntertwiner>;

DomainPoint apply_intertwiner(const Intertwiner& l, const DomainPoint& x);
// Jacobian in represented coordinates.
CMat intertwiner_jacobian(const Intertwiner& l, const DomainPoint& x);

enum class Exactness { Exact, Numeric };

struct SemiModel {
  int d = 0;
  DomainKind base = DomainKind::Siegel;
  std::optional<Intertwiner> intertwiner;
  std::vector<NormalFormAutomorphism> autos;
  Exactness exactness = Exactness::Numeric;
  double residual = 0.0;  // max k_base(l f_j x, tau_j l x) over the verification samples
  std::string note;
};

// Max over members and samples of k_base(l(f_j x), tau_j(l x)).
double intertwining_residual(const CommutingFamily& F, const SemiModel& model, int samples,
                             std::uint64_t seed);

// --- numerical functionals ------------------------------------------------

struct SemiModelParams {
  int max_iter = 200;
  int min_iter = 8;
  double tol = 1e-6;
  double rank_rel_tol = 1e-6;
  double gap_stop = 1e8;    // pullback iteration stops once the gap reaches this
  double gap_accept = 1e3;  // type_estimate needs at least this gap
  int window = 5;
  MetricConvention conv{};
};

LimitEstimate limit_pseudodistance(const CommutingFamily& F, const DomainPoint& x,
                                   const DomainPoint& y, const SemiModelParams& params = {});

struct PullbackSpectrum {
  RVec eigenvalues;  // generalized eigenvalues relative to H(x), descending
  int rank = 0;
  double gap = 0.0;
};

// Rank and gap of a form relative to a positive definite reference form.
PullbackSpectrum relative_spectrum(const CMat& M, const CMat& H, double rel_tol);

struct PullbackResult {
  HermitianForm form;                    // limit form, represented coordinates at x
  std::vector<RVec> history;             // relative eigenvalues of M_0, M_1, ...
  PullbackSpectrum spectrum;             // of the final form
  int iterations = 0;
  bool stabilized = false;
};

PullbackResult limit_pullback_form(const CommutingFamily& F, const DomainPoint& x,
                                   const SemiModelParams& params = {});

struct TypeEstimate {
  std::optional<int> d;                       // empty: Unknown
  double gap = 0.0;                           // smallest gap across the window
  std::vector<PullbackSpectrum> window;       // one per base point F^{N0} x
  std::string note;
};

TypeEstimate type_estimate(const CommutingFamily& F, const DomainPoint& x,
                           const SemiModelParams& params = {});

// --- simultaneous diagonalization ------------------------------------------

struct SimultaneousDiagonalization {
  CMat Q;                     // Q U_j Q^{-1} = D_j
  std::vector<CVec> diagonals;
  std::vector<RVec> phases;   // arg of the diagonals, in (-pi, pi]
  double residual = 0.0;      // largest off-diagonal entry of Q U_j Q^*
  double max_commutator = 0.0;
};

SimultaneousDiagonalization simultaneous_diagonalize(const std::vector<CMat>& Us,
                                                     double tol = 1e-9,
                                                     std::uint64_t seed = 0);

// --- exact models -----------------------------------------------------------

SemiModel csm_commuting_hyperbolic_automorphisms(const CommutingFamily& F,
                                                 std::uint64_t seed = 0);

// Identity model of a family of ball automorphisms (d = q, tau_j = f_j).
SemiModel identity_model(const CommutingFamily& F);

struct ExampleModels {
  SemiModel f;
  SemiModel g;
  SemiModel pair;
  CommutingFamily family;  // (f, g)
};

ExampleModels csm_example_family(int m, int q, int p, double r, std::uint64_t seed = 0);

// Gamma with Gamma(l x) = l(g x), solved in the structured class.
MapDescription gamma_induced(const MapDescription& g, const SemiModel& model);

struct UnivalenceReport {
  bool guaranteed = false;  // d equals the ambient dimension
  std::vector<double> min_ratio;  // per N: min over sampled pairs of k(l x, l y) / k(x, y)
  std::optional<int> threshold;   // N_0 beyond which no collision was seen
  bool collision_in_guaranteed_regime = false;
  std::string note;
};

UnivalenceReport univalence_check(const CommutingFamily& F, const SemiModel& model,
                                  const DomainPoint& p, double r, int max_n = 8,
                                  int pairs = 64, std::uint64_t seed = 0);

}  // namespace balldyn
