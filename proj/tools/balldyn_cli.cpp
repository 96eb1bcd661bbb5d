// balldyn: command-line front end.  Each command prints one JSON report.
//
// Exit codes: 0 success or definite verdict, 1 usage / IO / malformed input,
// 2 Unknown verdict or unconverged estimate, 3 invariant violation.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "balldyn/io.hpp"

#ifndef BALLDYN_VERSION
#define BALLDYN_VERSION "0.0.0"
#endif

using namespace balldyn;
using io::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kUnknown = 2, kViolation = 3 };

struct RunConfig {
  double tol = 1e-6;
  int max_iter = 200;
  std::uint64_t seed = 0;
  double metric_scale = 2.0;
  std::string out;

  MetricConvention conv() const { return {metric_scale}; }
  DynamicsParams dynamics() const {
    DynamicsParams p;
    p.max_iter = max_iter;
    p.tol = tol;
    p.conv = conv();
    return p;
  }
  SemiModelParams semimodel() const {
    SemiModelParams p;
    p.max_iter = max_iter;
    p.tol = tol;
    p.conv = conv();
    return p;
  }
};

struct Outcome {
  json result;
  int code = kOk;
};

std::shared_ptr<spdlog::logger> logger() {
  static auto log = [] {
    auto l = spdlog::stderr_color_mt("balldyn");
    const char* env = std::getenv("BALLDYN_LOG");
    l->set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
    return l;
  }();
  return log;
}

// Inputs may be bare documents or earlier balldyn reports.
json load(const std::string& path) {
  json j = io::read_file(path);
  if (j.is_object() && j.value("tool", "") == "balldyn" && j.contains("result")) return j.at("result");
  return j;
}

DomainPoint default_point(DomainKind kind, int dim) {
  if (kind == DomainKind::Ball) return BallPoint(CVec::Zero(dim));
  return SiegelPoint(kI, CVec::Zero(dim - 1));
}

DomainPoint base_point(const std::string& path, DomainKind kind, int dim) {
  if (path.empty()) return default_point(kind, dim);
  DomainPoint x = io::point_from_json(load(path));
  if (kind_of(x) != kind || dim_of(x) != dim)
    throw io::ParseError("base point does not live in the domain of the input");
  return x;
}

MultiIndex parse_multiindex(const std::vector<int>& entries, int k) {
  if (entries.empty()) return MultiIndex::diagonal(1, k);
  if (static_cast<int>(entries.size()) != k)
    throw InvalidArgument("--M needs one entry per family member");
  for (int e : entries)
    if (e < 0) throw InvalidArgument("--M entries must be nonnegative");
  return MultiIndex(entries);
}

// Exact model for the structured families the library knows how to model.
std::optional<SemiModel> exact_model(const CommutingFamily& F, std::uint64_t seed) {
  bool all_auto = std::all_of(F.maps.begin(), F.maps.end(),
                              [](const auto& f) { return lower_to_automorphism(f).has_value(); });
  if (all_auto) {
    try {
      return csm_commuting_hyperbolic_automorphisms(F, seed);
    } catch (const InvalidArgument& e) {
      logger()->info("no automorphism model: {}", e.what());
      return std::nullopt;
    }
  }
  const auto* h = F.size() >= 1 ? std::get_if<ExampleHyperbolic>(&F.maps[0].v()) : nullptr;
  const auto* p = F.size() >= 1 ? std::get_if<ExampleParabolic>(&F.maps[0].v()) : nullptr;
  if (F.size() == 1 && h) return csm_example_family(h->m, h->q, 2, 1.0, seed).f;
  if (F.size() == 1 && p) return csm_example_family(p->m, 1, p->p, p->r, seed).g;
  if (F.size() == 2) {
    bool swapped = false;
    if (!h) {
      h = std::get_if<ExampleHyperbolic>(&F.maps[1].v());
      p = std::get_if<ExampleParabolic>(&F.maps[0].v());
      swapped = true;
    } else {
      p = std::get_if<ExampleParabolic>(&F.maps[1].v());
    }
    if (h && p) {
      SemiModel s = csm_example_family(h->m, h->q, p->p, p->r, seed).pair;
      if (swapped) std::swap(s.autos[0], s.autos[1]);
      return s;
    }
  }
  return std::nullopt;
}

Outcome cmd_classify(const std::string& path, const std::string& point, const RunConfig& cfg) {
  MapDescription f = io::map_from_json(load(path));
  Classification c = denjoy_wolff(f, base_point(point, f.domain(), f.dim()), cfg.dynamics());
  logger()->info("classified {} as {}", f.tag(), to_string(c.kind));
  return {io::to_json(c), c.kind == ClassKind::Unknown ? kUnknown : kOk};
}

Outcome cmd_divrate(const std::string& path, const std::string& point, const RunConfig& cfg) {
  MapDescription f = io::map_from_json(load(path));
  LimitEstimate e = divergence_rate(f, base_point(point, f.domain(), f.dim()), cfg.max_iter, cfg.tol,
                                    cfg.conv());
  return {io::to_json(e), e.converged ? kOk : kUnknown};
}

Outcome cmd_step(const std::string& path, const std::string& point, const std::vector<int>& M,
                 const RunConfig& cfg) {
  CommutingFamily F = io::family_from_json(load(path), cfg.seed);
  MultiIndex idx = parse_multiindex(M, F.size());
  LimitEstimate e = step(F, idx, base_point(point, F.domain(), F.dim()), cfg.max_iter, cfg.tol, cfg.conv());
  json r = io::to_json(e);
  r["M"] = idx.entries;
  return {r, e.converged ? kOk : kUnknown};
}

Outcome cmd_type(const std::string& path, const std::string& point, const RunConfig& cfg) {
  CommutingFamily F = io::family_from_json(load(path), cfg.seed);
  TypeEstimate t = type_estimate(F, base_point(point, F.domain(), F.dim()), cfg.semimodel());
  return {io::to_json(t), t.d ? kOk : kUnknown};
}

Outcome cmd_semimodel(const std::string& path, const std::string& point, const RunConfig& cfg) {
  CommutingFamily F = io::family_from_json(load(path), cfg.seed);
  DomainPoint x = base_point(point, F.domain(), F.dim());
  TypeEstimate t = type_estimate(F, x, cfg.semimodel());
  json r = {{"type", io::to_json(t)}};
  std::optional<SemiModel> s = exact_model(F, cfg.seed);
  if (!s) {
    r["model"] = nullptr;
    r["note"] = "no exact model for this family; only the type is reported";
    return {r, kUnknown};
  }
  s->residual = std::max(s->residual, intertwining_residual(F, *s, 64, cfg.seed));
  r["model"] = io::to_json(*s);
  if (t.d && *t.d != s->d) {
    r["note"] = "estimated type disagrees with the model dimension";
    return {r, kViolation};
  }
  if (s->residual > 1e-8) {
    r["note"] = "intertwining residual above 1e-8";
    return {r, kViolation};
  }
  return {r, kOk};
}

Outcome cmd_gamma(const std::string& path, const std::string& map_path, const RunConfig& cfg) {
  CommutingFamily F = io::family_from_json(load(path), cfg.seed);
  MapDescription g = io::map_from_json(load(map_path));
  if (g.domain() != F.domain() || g.dim() != F.dim())
    throw io::ParseError("map and family live on different domains");
  for (const auto& f : F.maps)
    if (!commute_check(f, g, 100, 1e-9, cfg.seed).valid)
      throw InvalidArgument("the map does not commute with the family");
  std::optional<SemiModel> s = exact_model(F, cfg.seed);
  if (!s) return {{{"map", nullptr}, {"note", "no exact model for this family"}}, kUnknown};
  try {
    MapDescription G = gamma_induced(g, *s);
    return {{{"map", io::to_json(G)}, {"model_dim", s->d}}, kOk};
  } catch (const Unsupported& e) {
    return {{{"map", nullptr}, {"note", e.what()}}, kUnknown};
  }
}

Outcome cmd_check_pair(const std::string& path, const std::string& point, const RunConfig& cfg) {
  json in = load(path);
  MapProfile a, b;
  bool certified = false;
  if (in.is_object() && in.contains("profiles")) {
    const json& p = in.at("profiles");
    if (!p.is_array() || p.size() != 2) throw io::ParseError("'profiles' must hold two entries");
    a = io::profile_from_json(p[0]);
    b = io::profile_from_json(p[1]);
  } else {
    CommutingFamily F = io::family_from_json(in, cfg.seed);
    if (F.size() != 2) throw InvalidArgument("check-pair needs a family of two maps");
    DomainPoint x = base_point(point, F.domain(), F.dim());
    a = profile_map(F.maps[0], x, cfg.dynamics(), cfg.semimodel());
    b = profile_map(F.maps[1], x, cfg.dynamics(), cfg.semimodel());
    certified = F.certificate.valid;
  }
  PairVerdict v = check_pair(a, b);
  json r = io::to_json(v);
  r["profiles"] = {io::to_json(a), io::to_json(b)};
  if (v.kind == VerdictKind::Unknown) return {r, kUnknown};
  if (v.kind == VerdictKind::Inconsistent && certified) {
    r["note"] = "certified commuting pair contradicts the obstruction rules";
    return {r, kViolation};
  }
  return {r, kOk};
}

Outcome cmd_gen_counterexample(int m, int u, int v, double r) {
  return {io::to_json(counterexample(m, u, v, r)), kOk};
}

Outcome cmd_verify(const std::string& suite, const RunConfig& cfg) {
  verify::VerifyConfig vc{cfg.tol, cfg.max_iter, cfg.conv()};
  std::vector<std::string> names = suite == "all" ? verify::suite_names() : std::vector{suite};
  json suites = json::array();
  bool ok = true;
  for (const auto& n : names) {
    verify::SuiteReport rep = verify::run_suite(n, cfg.seed, vc);
    logger()->info("suite {}: {}", n, rep.passed() ? "pass" : "FAIL");
    ok = ok && rep.passed();
    suites.push_back(io::to_json(rep));
  }
  return {{{"passed", ok}, {"suites", suites}}, ok ? kOk : kViolation};
}

int emit(const std::string& command, const json& input, const Outcome& o, const RunConfig& cfg) {
  json report = {{"tool", "balldyn"},
                 {"tool_version", BALLDYN_VERSION},
                 {"command", command},
                 {"seed", cfg.seed},
                 {"config",
                  {{"tol", cfg.tol},
                   {"max_iter", cfg.max_iter},
                   {"seed", cfg.seed},
                   {"metric_scale", cfg.metric_scale}}},
                 {"input", input},
                 {"exit_code", o.code},
                 {"result", o.result}};
  std::string text = report.dump(2) + "\n";
  if (cfg.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(cfg.out, std::ios::binary);
    if (!(out << text)) {
      std::cerr << "balldyn: cannot write '" << cfg.out << "'\n";
      return kUsage;
    }
  }
  return o.code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical dynamics of holomorphic maps on the ball"};
  app.set_version_flag("--version", std::string(BALLDYN_VERSION));
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig cfg;
  app.add_option("--tol", cfg.tol, "Convergence tolerance")->check(CLI::PositiveNumber);
  app.add_option("--max-iter", cfg.max_iter, "Iteration budget")->check(CLI::Range(1, 1 << 20));
  app.add_option("--seed", cfg.seed, "Seed for sampling");
  app.add_option("--metric-scale", cfg.metric_scale, "Kobayashi normalization (1 or 2)")
      ->check(CLI::IsMember({1.0, 2.0}));
  app.add_option("--out", cfg.out, "Write the report here instead of stdout");

  std::string input, point, map_path, suite = "all";
  std::vector<int> M;
  int m = 0, u = 0, v = 0;
  double r = 1.0;

  auto with_input = [&](CLI::App* sub, const char* what) {
    sub->add_option("input", input, what)->required();
    sub->add_option("--point", point, "Base point JSON (default: origin or (i, 0))");
    return sub;
  };
  auto* classify = with_input(app.add_subcommand("classify", "Denjoy-Wolff classification of a map"), "Map JSON");
  auto* divrate = with_input(app.add_subcommand("divrate", "Divergence rate of a map"), "Map JSON");
  auto* stepc = with_input(app.add_subcommand("step", "M-step of a commuting family"), "Family JSON");
  stepc->add_option("--M", M, "Multi-index, one entry per member (default all ones)")->delimiter(',');
  auto* type = with_input(app.add_subcommand("type", "Type of a commuting family"), "Family JSON");
  auto* semimodel = with_input(app.add_subcommand("semimodel", "Canonical semi-model of a family"), "Family JSON");
  auto* gamma = app.add_subcommand("gamma", "Map induced on the semi-model base");
  gamma->add_option("input", input, "Family JSON")->required();
  gamma->add_option("--map", map_path, "Map JSON commuting with the family")->required();
  auto* pair = with_input(app.add_subcommand("check-pair", "Obstruction rules for a commuting pair"),
                          "Family JSON with two maps, or {\"profiles\": [..]}");
  auto* gen = app.add_subcommand("gen-counterexample", "Commuting hyperbolic/parabolic pair");
  gen->add_option("--m", m, "Ambient dimension")->required();
  gen->add_option("--u", u, "Type of the hyperbolic member")->required();
  gen->add_option("--v", v, "Type of the parabolic member")->required();
  gen->add_option("--r", r, "Parabolic translation parameter");
  auto* ver = app.add_subcommand("verify", "Run a property suite");
  ver->add_option("--suite", suite, "distances | steps | divrate | csm | obstructions | all")
      ->check(CLI::IsMember({"all", "distances", "steps", "divrate", "csm", "obstructions"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  json in = input.empty() ? json(nullptr) : json(input);
  try {
    Outcome o;
    if (sub == classify) o = cmd_classify(input, point, cfg);
    else if (sub == divrate) o = cmd_divrate(input, point, cfg);
    else if (sub == stepc) o = cmd_step(input, point, M, cfg);
    else if (sub == type) o = cmd_type(input, point, cfg);
    else if (sub == semimodel) o = cmd_semimodel(input, point, cfg);
    else if (sub == gamma) o = cmd_gamma(input, map_path, cfg);
    else if (sub == pair) o = cmd_check_pair(input, point, cfg);
    else if (sub == gen) {
      in = {{"m", m}, {"u", u}, {"v", v}, {"r", r}};
      o = cmd_gen_counterexample(m, u, v, r);
    } else {
      in = {{"suite", suite}};
      o = cmd_verify(suite, cfg);
    }
    return emit(command, in, o, cfg);
  } catch (const io::ParseError& e) {
    std::cerr << "balldyn " << command << ": " << e.what() << "\n";
    return kUsage;
  } catch (const InvalidArgument& e) {
    std::cerr << "balldyn " << command << ": invalid input: " << e.what() << "\n";
    return kUsage;
  } catch (const InvariantViolation& e) {
    std::cerr << "balldyn " << command << ": invariant violation: " << e.what() << "\n";
    return kViolation;
  } catch (const std::exception& e) {
    std::cerr << "balldyn " << command << ": " << e.what() << "\n";
    return kUnknown;
  }
}
