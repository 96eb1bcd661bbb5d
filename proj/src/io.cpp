#include "balldyn/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace balldyn::io {

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

cplx cplx_from(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2) throw ParseError("complex number must be [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

json vjson(const CVec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(cjson(v[i]));
  return a;
}

json rjson(const RVec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

CVec vec_from(const json& j) {
  if (!j.is_array()) throw ParseError("vector must be an array");
  CVec v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[i] = cplx_from(j[i]);
  return v;
}

json mjson(const CMat& m) {
  json a = json::array();
  for (int r = 0; r < m.rows(); ++r) a.push_back(vjson(m.row(r).transpose()));
  return a;
}

CMat mat_from(const json& j, int rows, int cols) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows)
    throw ParseError("matrix has the wrong number of rows");
  CMat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    CVec row = vec_from(j[r]);
    if (row.size() != cols) throw ParseError("matrix has the wrong number of columns");
    m.row(r) = row.transpose();
  }
  return m;
}

template <class T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  return j.at(key).get<T>();
}

}  // namespace

json to_json(const MapDescription& f) {
  json out;
  out["dim"] = f.dim();
  std::visit(
      [&](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, BallAutomorphism>) {
          out["kind"] = "ball_automorphism";
          out["params"] = {{"U", mjson(a.U)}, {"a", vjson(a.a)}};
        } else if constexpr (std::is_same_v<T, SiegelPolynomial>) {
          out["kind"] = "siegel_polynomial";
          out["params"] = {{"alpha", a.alpha}, {"c", vjson(a.c)}, {"S", mjson(a.S)},
                           {"beta", cjson(a.beta)}, {"A", mjson(a.A)}, {"b", vjson(a.b)}};
        } else if constexpr (std::is_same_v<T, ExampleHyperbolic>) {
          out["kind"] = "example_hyperbolic";
          out["params"] = {{"q", a.q}};
        } else if constexpr (std::is_same_v<T, ExampleParabolic>) {
          out["kind"] = "example_parabolic";
          out["params"] = {{"p", a.p}, {"r", a.r}};
        } else if constexpr (std::is_same_v<T, Composition>) {
          out["kind"] = "composition";
          json maps = json::array();
          for (const auto& g : a.maps) maps.push_back(to_json(g));
          out["params"] = {{"maps", maps}};
        } else {
          out["kind"] = "iterate";
          out["params"] = {{"base", to_json(*a.base)}, {"power", a.power}};
        }
      },
      f.v());
  return out;
}

MapDescription map_from_json(const json& j) {
  try {
    if (!j.is_object()) throw ParseError("map must be a JSON object");
    std::string kind = field<std::string>(j, "kind");
    int m = field<int>(j, "dim");
    const json& p = j.contains("params") ? j.at("params") : json::object();
    if (kind == "ball_automorphism") {
      return BallAutomorphism{mat_from(p.at("U"), m, m), vec_from(p.at("a"))};
    }
    if (kind == "siegel_polynomial") {
      SiegelPolynomial s;
      s.alpha = field<double>(p, "alpha");
      s.c = vec_from(p.at("c"));
      s.S = mat_from(p.at("S"), m - 1, m - 1);
      s.beta = cplx_from(p.at("beta"));
      s.A = mat_from(p.at("A"), m - 1, m - 1);
      s.b = vec_from(p.at("b"));
      return s;
    }
    if (kind == "example_hyperbolic") return ExampleHyperbolic{m, field<int>(p, "q")};
    if (kind == "example_parabolic")
      return ExampleParabolic{m, field<int>(p, "p"), field<double>(p, "r")};
    if (kind == "composition") {
      Composition c;
      for (const auto& g : p.at("maps")) c.maps.push_back(map_from_json(g));
      MapDescription out(std::move(c));
      if (out.dim() != m) throw ParseError("composition dimension mismatch");
      return out;
    }
    if (kind == "iterate") {
      MapDescription out = MapDescription::iterate(map_from_json(p.at("base")), field<int>(p, "power"));
      if (out.dim() != m) throw ParseError("iterate dimension mismatch");
      return out;
    }
    throw ParseError("unknown map kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed map JSON: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid map: ") + e.what());
  }
}

json to_json(const Certificate& c) {
  json out = {{"kind", to_string(c.kind)},
              {"valid", c.valid},
              {"residual", num(c.residual)},
              {"tol", num(c.tol)},
              {"note", c.note}};
  if (c.witness) out["witness"] = to_json(*c.witness);
  return out;
}

json to_json(const CommutingFamily& F) {
  json maps = json::array();
  for (const auto& f : F.maps) maps.push_back(to_json(f));
  return {{"maps", maps}, {"certificate", to_json(F.certificate)}};
}

CommutingFamily family_from_json(const json& j, std::uint64_t seed) {
  std::vector<MapDescription> maps;
  try {
    if (j.is_object() && j.contains("kind")) {
      maps.push_back(map_from_json(j));
    } else {
      for (const auto& m : j.at("maps")) maps.push_back(map_from_json(m));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed family JSON: ") + e.what());
  }
  if (maps.empty()) throw ParseError("family has no maps");
  return make_family(std::move(maps), 100, 1e-9, seed);
}

json to_json(const DomainPoint& x) {
  if (const auto* b = std::get_if<BallPoint>(&x))
    return {{"kind", "ball"}, {"coords", vjson(b->coords())}, {"defect", num(b->defect())}};
  const auto& s = std::get<SiegelPoint>(x);
  return {{"kind", "siegel"},
          {"z", cjson(s.z())},
          {"w", vjson(s.w())},
          {"rho", num(s.rho())},
          {"exponent", s.exponent()}};
}

DomainPoint point_from_json(const json& j) {
  try {
    std::string kind = field<std::string>(j, "kind");
    if (kind == "ball") return BallPoint(vec_from(j.at("coords")));
    if (kind == "siegel")
      return SiegelPoint(cplx_from(j.at("z")), vec_from(j.at("w")), j.value("exponent", 0));
    throw ParseError("unknown point kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed point JSON: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid point: ") + e.what());
  }
}

json to_json(const BoundaryPoint& p) { return vjson(p.coords()); }

json to_json(const LimitEstimate& e) {
  return {{"value", num(e.value)},
          {"lower", num(e.lower)},
          {"upper", num(e.upper)},
          {"iterations", e.iterations},
          {"converged", e.converged}};
}

json to_json(const Classification& c) {
  json out = {{"kind", to_string(c.kind)},
              {"lambda", num(c.lambda)},
              {"lambda_quotient", num(c.lambda_quotient)},
              {"lambda_rate", num(c.lambda_rate)},
              {"c", num(c.rate.value)},
              {"brackets", json::array({num(c.rate.lower), num(c.rate.upper)})},
              {"iterations", c.iterations},
              {"note", c.note}};
  out["dw"] = c.dw ? to_json(*c.dw) : json(nullptr);
  out["fixed_point"] = c.fixed_point ? to_json(*c.fixed_point) : json(nullptr);
  return out;
}

json to_json(const TypeEstimate& t) {
  json window = json::array();
  for (const auto& s : t.window)
    window.push_back({{"rank", s.rank}, {"gap", num(s.gap)}, {"eigenvalues", rjson(s.eigenvalues)}});
  return {{"type", t.d ? json(*t.d) : json(nullptr)},
          {"gap", num(t.gap)},
          {"window", window},
          {"note", t.note}};
}

json to_json(const NormalFormAutomorphism& t) {
  json out = std::visit(
      [](const auto& a) -> json {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, SiegelHyperbolic>)
          return {{"kind", "siegel_hyperbolic"}, {"lambda", a.lambda}, {"phases", rjson(a.phases)}};
        else if constexpr (std::is_same_v<T, SiegelParabolicTranslation>)
          return {{"kind", "siegel_parabolic_translation"}, {"d", a.d}, {"r", a.r}};
        else if constexpr (std::is_same_v<T, ExplicitLinear>)
          return {{"kind", "explicit_linear"}, {"alpha", a.alpha}, {"diag", vjson(a.diag)}};
        else
          return {{"kind", "ball_isometry"}, {"map", to_json(MapDescription(a.f))}};
      },
      t);
  out["dilation"] = num(dilation(t));
  out["formula"] = describe(t);
  return out;
}

json to_json(const Intertwiner& l) {
  return std::visit(
      [](const auto& a) -> json {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, IdentityIntertwiner>)
          return {{"kind", "identity"}, {"dim", a.dim}};
        else if constexpr (std::is_same_v<T, PolynomialIntertwiner>)
          return {{"kind", "polynomial"}, {"K", mjson(a.K)}, {"P", mjson(a.P)},
                  {"formula", "(z, w) -> (z + i w^T K w, P w)"}};
        else
          return {{"kind", "cayley"}, {"V", mjson(a.V)}, {"W0", vjson(a.W0)}, {"c0", cjson(a.c0)},
                  {"Q", mjson(a.Q)},
                  {"formula", "x -> S_Q(T(C(V x)))"}};
      },
      l);
}

json to_json(const SemiModel& s) {
  json autos = json::array();
  for (const auto& t : s.autos) autos.push_back(to_json(t));
  return {{"d", s.d},
          {"base", s.base == DomainKind::Ball ? "ball" : "siegel"},
          {"intertwiner", s.intertwiner ? to_json(*s.intertwiner) : json(nullptr)},
          {"autos", autos},
          {"exactness", s.exactness == Exactness::Exact ? "exact" : "numeric"},
          {"residual", num(s.residual)},
          {"note", s.note}};
}

json to_json(const MapProfile& p) {
  return {{"kind", to_string(p.kind)},
          {"type", p.type ? json(*p.type) : json(nullptr)},
          {"ambient_dim", p.ambient_dim},
          {"step_positive", to_string(p.step_positive)}};
}

MapProfile profile_from_json(const json& j) {
  try {
    MapProfile p;
    std::string kind = field<std::string>(j, "kind");
    if (kind == "elliptic") p.kind = ClassKind::Elliptic;
    else if (kind == "hyperbolic") p.kind = ClassKind::Hyperbolic;
    else if (kind == "parabolic") p.kind = ClassKind::Parabolic;
    else if (kind == "unknown") p.kind = ClassKind::Unknown;
    else throw ParseError("unknown classification '" + kind + "'");
    if (j.contains("type") && !j.at("type").is_null()) p.type = j.at("type").get<int>();
    p.ambient_dim = field<int>(j, "ambient_dim");
    std::string step = j.value("step_positive", std::string("unknown"));
    if (step == "yes") p.step_positive = Tri::Yes;
    else if (step == "no") p.step_positive = Tri::No;
    else if (step == "unknown") p.step_positive = Tri::Unknown;
    else throw ParseError("step_positive must be yes, no or unknown");
    return p;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed profile JSON: ") + e.what());
  }
}

json to_json(const PairVerdict& v) {
  json out = {{"verdict", to_string(v.kind)}, {"reason", v.reason}};
  out["clause"] = v.clause ? json(static_cast<int>(*v.clause)) : json(nullptr);
  out["clause_name"] = v.clause ? json(to_string(*v.clause)) : json(nullptr);
  if (v.hyperbolic) out["hyperbolic"] = to_json(*v.hyperbolic);
  if (v.parabolic) out["parabolic"] = to_json(*v.parabolic);
  return out;
}

json to_json(const GeodesicRestriction& r) {
  json fps = json::array();
  for (const auto& f : r.boundary_fixed_points)
    fps.push_back({{"xi", cjson(f.xi)}, {"point", to_json(f.point)}, {"multiplier", num(f.multiplier)}});
  json m = json::array();
  for (int i = 0; i < 2; ++i)
    m.push_back(json::array({cjson(r.mobius(i, 0)), cjson(r.mobius(i, 1))}));
  return {{"invariant", r.invariant},
          {"is_automorphism", r.is_automorphism},
          {"is_hyperbolic", r.is_hyperbolic},
          {"is_identity", r.is_identity},
          {"dilation", num(r.dilation)},
          {"max_residual", num(r.max_residual)},
          {"mobius", m},
          {"boundary_fixed_points", fps},
          {"note", r.note}};
}

json to_json(const DwVerdict& v) {
  json classes = json::array();
  for (const auto& c : v.classes) classes.push_back(to_json(c));
  json pts = json::array();
  for (const auto& p : v.points) pts.push_back(to_json(p));
  json out = {{"verdict", to_string(v.kind)}, {"reason", v.reason}, {"classes", classes},
              {"dw_points", pts}};
  out["restriction"] = v.restriction ? to_json(*v.restriction) : json(nullptr);
  return out;
}

json to_json(const UnivalenceReport& r) {
  json ratios = json::array();
  for (double v : r.min_ratio) ratios.push_back(num(v));
  return {{"guaranteed", r.guaranteed},
          {"min_ratio", ratios},
          {"threshold", r.threshold ? json(*r.threshold) : json(nullptr)},
          {"collision_in_guaranteed_regime", r.collision_in_guaranteed_regime},
          {"note", r.note}};
}

json to_json(const verify::PropertyResult& p) {
  return {{"name", p.name},     {"passed", p.passed}, {"measured", num(p.measured)},
          {"threshold", num(p.threshold)}, {"samples", p.samples}, {"detail", p.detail}};
}

json to_json(const verify::SuiteReport& r) {
  json props = json::array();
  for (const auto& p : r.properties) props.push_back(to_json(p));
  return {{"suite", r.suite}, {"seed", r.seed}, {"passed", r.passed()}, {"properties", props}};
}

json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::exception& e) {
    throw ParseError("'" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace balldyn::io
