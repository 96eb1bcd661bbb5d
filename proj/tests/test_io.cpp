#include <doctest.h>

#include "balldyn/io.hpp"
#include "oracles.hpp"

using namespace balldyn;
using io::json;

namespace {

void same_action(const MapDescription& a, const MapDescription& b) {
  REQUIRE(a.domain() == b.domain());
  REQUIRE(a.dim() == b.dim());
  for (const auto& x : sample_domain(a.domain(), a.dim(), 10, 3))
    CHECK(kobayashi_distance(eval(a, x), eval(b, x)) < 1e-12);
}

}  // namespace

TEST_CASE("map JSON round trip") {
  std::mt19937_64 rng(60);
  SiegelPolynomial p = SiegelPolynomial::identity(3);
  p.alpha = 2.0;
  p.S(0, 0) = 1.0;
  p.A(1, 1) = std::sqrt(2.0);
  std::vector<MapDescription> maps = {
      oracle::random_automorphism(3, rng), p, ExampleHyperbolic{4, 2}, ExampleParabolic{3, 2, -0.5},
      MapDescription::then(ExampleHyperbolic{3, 1}, ExampleParabolic{3, 3, 1.0}),
      MapDescription::iterate(ExampleParabolic{2, 2, 1.0}, 3)};
  for (const auto& f : maps) {
    json j = io::to_json(f);
    MapDescription g = io::map_from_json(json::parse(j.dump()));
    CHECK(io::to_json(g) == j);
    same_action(f, g);
  }
}

TEST_CASE("family and point JSON") {
  CommutingFamily F = make_family({ExampleHyperbolic{4, 2}, ExampleParabolic{4, 3, 1.0}});
  json j = io::to_json(F);
  CHECK(j["certificate"]["kind"] == "exact");
  CommutingFamily G = io::family_from_json(j);
  CHECK(G.size() == 2);
  CHECK(G.certificate.kind == CertificateKind::Exact);
  // a bare map is a family of one
  CHECK(io::family_from_json(io::to_json(F.maps[0])).size() == 1);

  SiegelPoint s(cplx(0.5, 3.0), CVec::Constant(2, cplx(0.25, -0.5)), 4);
  auto back = std::get<SiegelPoint>(io::point_from_json(io::to_json(DomainPoint(s))));
  CHECK(back.exponent() == 4);
  CHECK(back.z() == s.z());
  CHECK(back.w() == s.w());
  BallPoint b(CVec::Constant(2, cplx(0.1, 0.2)));
  CHECK(std::get<BallPoint>(io::point_from_json(io::to_json(DomainPoint(b)))).coords() == b.coords());
}

TEST_CASE("malformed input is a ParseError") {
  const char* bad[] = {
      R"({"kind": "example_hyperbolic"})",
      R"({"kind": "nope", "dim": 2, "params": {}})",
      R"({"kind": "example_hyperbolic", "dim": 3, "params": {"q": 5}})",
      R"({"kind": "ball_automorphism", "dim": 2, "params": {"U": [[[1, 0]]], "a": [[0, 0], [0, 0]]}})",
      R"({"kind": "ball_automorphism", "dim": 1, "params": {"U": [[[1, 0]]], "a": [[2, 0]]}})",
      R"({"kind": "siegel_polynomial", "dim": 2, "params": {"alpha": 1, "c": [[0, 0]], "S": [[[0, 0]]], "beta": [0, 0], "A": [[[1, 0]]], "b": "x"}})",
      R"([1, 2, 3])",
  };
  for (const char* s : bad) CHECK_THROWS_AS(io::map_from_json(json::parse(s)), io::ParseError);
  CHECK_THROWS_AS(io::point_from_json(json::parse(R"({"kind": "ball", "coords": [[1, 0]]})")),
                  io::ParseError);
  CHECK_THROWS_AS(io::family_from_json(json::parse(R"({"maps": []})")), io::ParseError);
  CHECK_THROWS_AS(io::read_file("/nonexistent/file.json"), io::ParseError);
}

TEST_CASE("profile JSON") {
  MapProfile p{ClassKind::Parabolic, 1, 3, Tri::Yes};
  MapProfile q = io::profile_from_json(io::to_json(p));
  CHECK(q.kind == p.kind);
  CHECK(q.type == p.type);
  CHECK(q.step_positive == Tri::Yes);
  json missing = io::to_json(p);
  missing["type"] = nullptr;
  CHECK(!io::profile_from_json(missing).type.has_value());
  missing["kind"] = "loxodromic";
  CHECK_THROWS_AS(io::profile_from_json(missing), io::ParseError);
}

TEST_CASE("suite reports are deterministic") {
  verify::SuiteReport a = verify::run_suite("obstructions", 11);
  verify::SuiteReport b = verify::run_suite("obstructions", 11);
  CHECK(a.passed());
  CHECK(io::to_json(a).dump() == io::to_json(b).dump());
  CHECK_THROWS_AS(verify::run_suite("nope", 0), InvalidArgument);
}
