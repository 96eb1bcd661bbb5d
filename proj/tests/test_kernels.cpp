#include <doctest.h>

#include "balldyn/kernels.hpp"
#include "oracles.hpp"

using namespace balldyn;

TEST_CASE("parallel kernels match the serial reference bit for bit") {
  auto a = sample_domain(DomainKind::Siegel, 3, 300, 1);
  auto b = sample_domain(DomainKind::Siegel, 3, 300, 2);
  CHECK(kernels::distance_batch(a, b) == kernels::serial::distance_batch(a, b));

  auto xs = sample_domain(DomainKind::Siegel, 4, 200, 3);
  MapDescription f = ExampleHyperbolic{4, 2}, g = ExampleParabolic{4, 3, 1.0};
  auto par = kernels::commutation_residuals(f, g, xs);
  CHECK(par == kernels::serial::commutation_residuals(f, g, xs));
  for (double r : par) CHECK(r < 1e-9);

  CommutingFamily F = make_family({f, g});
  std::vector<DomainPoint> bases(xs.begin(), xs.begin() + 6);
  auto p = kernels::pullback_forms(F, bases);
  auto s = kernels::serial::pullback_forms(F, bases);
  REQUIRE(p.size() == s.size());
  for (size_t i = 0; i < p.size(); ++i) {
    CHECK(p[i].form.matrix() == s[i].form.matrix());
    CHECK(p[i].spectrum.rank == s[i].spectrum.rank);
  }

  std::vector<DomainPoint> short_list(a.begin(), a.begin() + 3);
  CHECK_THROWS_AS(kernels::distance_batch(short_list, b), InvalidArgument);
}
