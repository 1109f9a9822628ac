#include "lipschitz/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lipschitz/errors.hpp"
#include "lipschitz/metric.hpp"
#include "lipschitz/translation.hpp"

#ifndef LIPSCHITZ_VERSION
#define LIPSCHITZ_VERSION "0.0.0"
#endif

namespace lipschitz {

using nlohmann::json;

const char* version_string() { return LIPSCHITZ_VERSION; }

namespace {

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<double> parse_numbers(const std::string& text, std::size_t expected,
                                  const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && item[used] == ' ') ++used;
    if (used == 0 || used != item.size()) {
      throw InvalidInput(what + ": '" + item + "' is not a number");
    }
    out.push_back(v);
  }
  if (expected && out.size() != expected) {
    throw InvalidInput(what + ": expected " + std::to_string(expected) + " comma-separated values");
  }
  return out;
}

json matrix_to_json(const MCGMatrix& m) { return json::array({m.a(), m.b(), m.c(), m.d()}); }

MCGMatrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4 ||
      !std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_number_integer(); })) {
    throw InvalidInput("matrix must be an array of 4 integers [a,b,c,d]");
  }
  return MCGMatrix(j[0].get<Int>(), j[1].get<Int>(), j[2].get<Int>(), j[3].get<Int>());
}

json nt_to_json(const NTType& nt) {
  json j{{"tag", to_string(nt.tag)}};
  switch (nt.tag) {
    case NTTag::Periodic: j["order"] = nt.order; break;
    case NTTag::Reducible: j["invariant_slope"] = nt.invariant_slope->str(); break;
    case NTTag::Anosov:
      j["dilatation"] = round9(nt.dilatation);
      j["log_dilatation"] = round9(std::log(nt.dilatation));
      j["stable_slope"] = round9(nt.stable_slope);
      j["unstable_slope"] = round9(nt.unstable_slope);
      break;
  }
  return j;
}

json dl_to_json(const DLReport& r) {
  json conv = json::array();
  for (const auto& [b, v] : r.convergence) conv.push_back(json::array({b, round9(v)}));
  return {{"value", round9(r.value)},
          {"argmax_slope", r.argmax_slope.str()},
          {"budget_used", r.budget_used},
          {"convergence", conv}};
}

json tdist_to_json(const TDistReport& r) {
  return {{"a_est", round9(r.a_est)},
          {"argmin_point", point_to_json(r.argmin_point)},
          {"chart", {{"u", round9(r.chart_u)},
                     {"v", round9(r.chart_v)},
                     {"branch", r.branch == Branch::Plus ? "plus" : "minus"}}},
          {"restarts", r.restarts},
          {"evaluations", r.evaluations},
          {"converged", r.converged},
          {"seed", r.seed},
          {"budget", r.budget}};
}

json pinch_to_json(const PinchReport& r) {
  json samples = json::array();
  for (const PinchSample& s : r.samples) {
    samples.push_back({{"epsilon", round9(s.epsilon)},
                       {"displacement", round9(s.displacement)},
                       {"systole", round9(s.systole)}});
  }
  return {{"pinched_slope", r.pinched.str()},
          {"samples", samples},
          {"limit_estimate", round9(r.limit_estimate)}};
}

json orbit_to_json(const std::vector<OrbitDefect>& defects) {
  json list = json::array();
  double max_abs = 0.0, min_defect = 0.0;
  for (const OrbitDefect& d : defects) {
    list.push_back({{"i", d.i}, {"j", d.j}, {"defect", round9(d.defect)}});
    max_abs = std::max(max_abs, std::abs(d.defect));
    min_defect = std::min(min_defect, d.defect);
  }
  return {{"defects", list},
          {"max_abs_defect", round9(max_abs)},
          {"min_defect", round9(min_defect)}};
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<double>>& rows, RunRecord& rec) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write trace file '" + path + "'");
  out << header << "\n";
  char buf[64];
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.9g", row[i]);
      out << (i ? "," : "") << buf;
    }
    out << "\n";
  }
  rec.outputs.push_back(path);
}

// Options shared by every subcommand.
struct CommonOptions {
  std::string scene_path;
  std::string out_path;
  std::string trace_path;
  Int budget = 0;  // 0: take the scene or default config
  std::uint64_t seed = 1;
  int restarts = 8;
  Int search_budget = 64;
  int threads = 1;
};

struct Context {
  CommonOptions common;
  Scene scene;
  AnalysisConfig cfg;
  bool have_scene = false;

  void resolve() {
    if (!common.scene_path.empty()) {
      scene = load_scene(common.scene_path);
      have_scene = true;
    }
    cfg = scene.config;
    if (common.budget != 0) cfg.slope_budget = common.budget;
    cfg.validate();
  }

  MCGMatrix matrix(const std::string& spec) const {
    if (have_scene) {
      if (auto it = scene.matrices.find(spec); it != scene.matrices.end()) return it->second;
    }
    return MCGMatrix::parse(spec);
  }

  MarkovPoint point(const std::string& spec) const {
    if (have_scene) {
      if (auto it = scene.points.find(spec); it != scene.points.end()) return it->second;
    }
    if (spec.size() > 5 && spec.ends_with(".json")) {
      json j;
      try {
        j = json::parse(read_file(spec));
      } catch (const json::parse_error& e) {
        throw InvalidInput("point file '" + spec + "' is not valid JSON: " + e.what());
      }
      return point_from_json(j);
    }
    const auto v = parse_numbers(spec, 3, "point");
    return MarkovPoint::from_traces(v[0], v[1], v[2]);
  }

  Fixture rep(const std::string& spec) const {
    if (have_scene) {
      if (auto it = scene.reps.find(spec); it != scene.reps.end()) return it->second;
    }
    return load_fixture(spec);
  }

  TDistOptions tdist_options() const {
    TDistOptions o;
    o.seed = common.seed;
    o.restarts = common.restarts;
    o.search_budget = std::min(common.search_budget, cfg.slope_budget);
    o.budget = cfg.slope_budget;
    o.tolerance = cfg.tolerance;
    o.threads = common.threads;
    o.validate();
    return o;
  }

  json config_json() const {
    json j = config_to_json(cfg);
    j["search_budget"] = std::min(common.search_budget, cfg.slope_budget);
    j["restarts"] = common.restarts;
    return j;
  }
};

void add_common(CLI::App* sub, CommonOptions& c) {
  sub->add_option("--scene", c.scene_path, "scene JSON with named points, matrices and reps");
  sub->add_option("--out", c.out_path, "write the JSON report here instead of stdout");
  sub->add_option("--trace", c.trace_path, "write a CSV trace here");
  sub->add_option("--budget", c.budget, "slope budget Q")->check(CLI::PositiveNumber);
  sub->add_option("--seed", c.seed, "seed for multistart");
  sub->add_option("--restarts", c.restarts, "simplex restarts")->check(CLI::PositiveNumber);
  sub->add_option("--search-budget", c.search_budget, "slope budget during the simplex search")
      ->check(CLI::PositiveNumber);
  sub->add_option("--threads", c.threads, "worker threads for restarts")
      ->check(CLI::PositiveNumber);
}

}  // namespace

double round9(double v) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return std::strtod(buf, nullptr);
}

SceneError::SceneError(std::vector<std::string> problems)
    : std::invalid_argument("invalid scene:\n  " + join(problems, "\n  ")),
      problems_(std::move(problems)) {}

MarkovPoint point_from_json(const json& j) {
  if (!j.is_object()) throw InvalidInput("point must be an object {\"x\",\"y\",\"z\"}");
  for (const char* k : {"x", "y", "z"}) {
    if (!j.contains(k) || !j[k].is_number()) {
      throw InvalidInput(std::string("point field '") + k + "' missing or not a number");
    }
  }
  return MarkovPoint::from_traces(j["x"].get<double>(), j["y"].get<double>(),
                                  j["z"].get<double>());
}

json point_to_json(const MarkovPoint& x) {
  return {{"x", round9(x.x())}, {"y", round9(x.y())}, {"z", round9(x.z())}};
}

json config_to_json(const AnalysisConfig& cfg) {
  return {{"delta0", round9(cfg.delta0)},
          {"slope_budget", cfg.slope_budget},
          {"tolerance", round9(cfg.tolerance)},
          {"thin_epsilon", round9(cfg.thin_epsilon)}};
}

Scene parse_scene(std::string_view json_text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SceneError({std::string("scene is not valid JSON: ") + e.what()});
  }
  if (!j.is_object()) throw SceneError({"scene must be a JSON object"});
  Scene scene;
  std::vector<std::string> problems;

  auto section = [&](const char* name) -> const json* {
    if (!j.contains(name)) return nullptr;
    if (!j[name].is_object()) {
      problems.push_back(std::string(name) + ": expected an object of named entries");
      return nullptr;
    }
    return &j[name];
  };

  if (const json* pts = section("points")) {
    for (const auto& [name, value] : pts->items()) {
      try {
        scene.points.emplace(name, point_from_json(value));
      } catch (const InvalidInput& e) {
        problems.push_back("points." + name + ": " + e.what());
      }
    }
  }
  if (const json* mats = section("matrices")) {
    for (const auto& [name, value] : mats->items()) {
      try {
        scene.matrices.emplace(name, matrix_from_json(value));
      } catch (const InvalidInput& e) {
        problems.push_back("matrices." + name + ": " + e.what());
      }
    }
  }
  if (const json* reps = section("reps")) {
    for (const auto& [name, value] : reps->items()) {
      try {
        if (value.is_string()) {
          std::filesystem::path p(value.get<std::string>());
          if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
          scene.reps.emplace(name, load_fixture(p.string()));
        } else {
          scene.reps.emplace(name, parse_fixture(value.dump()));
        }
      } catch (const InvalidInput& e) {
        problems.push_back("reps." + name + ": " + e.what());
      }
    }
  }
  if (j.contains("config")) {
    const json& c = j["config"];
    if (!c.is_object()) {
      problems.push_back("config: expected an object");
    } else {
      for (const auto& [key, value] : c.items()) {
        if (key == "slope_budget") {
          if (!value.is_number_integer()) {
            problems.push_back("config.slope_budget: expected an integer");
          } else {
            scene.config.slope_budget = value.get<Int>();
          }
        } else if (key == "delta0" || key == "tolerance" || key == "thin_epsilon") {
          if (!value.is_number()) {
            problems.push_back("config." + key + ": expected a number");
            continue;
          }
          const double v = value.get<double>();
          if (key == "delta0") scene.config.delta0 = v;
          if (key == "tolerance") scene.config.tolerance = v;
          if (key == "thin_epsilon") scene.config.thin_epsilon = v;
        } else {
          problems.push_back("config." + key + ": unknown setting");
        }
      }
      try {
        scene.config.validate();
      } catch (const InvalidInput& e) {
        problems.push_back(std::string("config: ") + e.what());
      }
    }
  }
  for (const auto& [key, value] : j.items()) {
    if (key != "points" && key != "matrices" && key != "reps" && key != "config") {
      problems.push_back(key + ": unknown scene section");
    }
  }
  if (!problems.empty()) throw SceneError(std::move(problems));
  return scene;
}

Scene load_scene(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const InvalidInput& e) {
    throw SceneError({e.what()});
  }
  const auto parent = std::filesystem::path(path).parent_path();
  return parse_scene(text, parent.empty() ? "." : parent.string());
}

json RunRecord::to_json() const {
  return {{"command", command}, {"argv", argv},         {"config", config},
          {"seed", seed},       {"wall_seconds", wall_seconds}, {"outputs", outputs}};
}

int run_command(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err,
                RunRecord* record) {
  const auto started = std::chrono::steady_clock::now();
  RunRecord local;
  RunRecord& rec = record ? *record : local;
  rec = RunRecord{};
  rec.argv = argv;

  CLI::App app{"Thurston's asymmetric metric and translation distances on the punctured torus"};
  app.name("lipschitz");
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version_string()));

  Context ctx;
  std::string matrix_spec, point_spec, from_spec, to_spec, eps_spec = "1e-1,1e-2,1e-3,1e-4";
  std::string alphas_spec = "0/1,1/0,1/1", rep_spec, rep2_spec, automorphism;
  int k_max = 4, m_max = 8, max_length = 8;

  auto* classify = app.add_subcommand("classify", "action type of a mapping class");
  auto* dl = app.add_subcommand("dl", "lower bound for d_L(from, to)");
  auto* tdist = app.add_subcommand("tdist", "translation distance a(phi)");
  auto* pinch = app.add_subcommand("pinch", "displacement along a pinching family");
  auto* orbit = app.add_subcommand("orbit", "additivity defects along an orbit");
  auto* sandwich = app.add_subcommand("sandwich", "length/intersection sandwich residuals");
  auto* syscheck = app.add_subcommand("syscheck", "systole-Lipschitz inequality");
  auto* holo = app.add_subcommand("holo-dl", "length-ratio bound between representations");
  for (auto* sub : {classify, dl, tdist, pinch, orbit, sandwich, syscheck, holo}) {
    add_common(sub, ctx.common);
  }
  for (auto* sub : {classify, tdist, pinch, orbit, sandwich, syscheck}) {
    sub->add_option("--matrix", matrix_spec, "a,b,c,d or a scene name")->required();
  }
  for (auto* sub : {orbit, sandwich}) {
    sub->add_option("--point", point_spec, "x,y,z, a point file or a scene name; "
                                           "default: the tdist minimizer");
  }
  syscheck->add_option("--point", point_spec, "x,y,z, a point file or a scene name")->required();
  dl->add_option("--from", from_spec, "x,y,z, a point file or a scene name")->required();
  dl->add_option("--to", to_spec, "x,y,z, a point file or a scene name")->required();
  pinch->add_option("--eps", eps_spec, "strictly decreasing comma-separated epsilons");
  orbit->add_option("--k-max", k_max, "orbit half-width")->check(CLI::PositiveNumber);
  sandwich->add_option("--alphas", alphas_spec, "comma-separated slopes");
  sandwich->add_option("--m-max", m_max, "largest iterate");
  holo->add_option("--rep", rep_spec, "fixture file or scene rep name")->required();
  auto* to_rep = holo->add_option("--to", rep2_spec, "second fixture file or scene rep name");
  holo->add_option("--automorphism", automorphism, "named automorphism of the first fixture")
      ->excludes(to_rep);
  holo->add_option("--max-length", max_length, "word length cap")->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(argv.rbegin(), argv.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << version_string() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitMalformed;
  }

  CLI::App* chosen = app.get_subcommands().front();
  rec.command = chosen->get_name();

  try {
    ctx.resolve();
    rec.seed = ctx.common.seed;
    json result;
    std::vector<std::vector<double>> rows;
    std::string header;

    if (chosen == classify) {
      const MCGMatrix m = ctx.matrix(matrix_spec);
      ClassifyOptions opts;
      opts.tdist = ctx.tdist_options();
      opts.orbit_k_max = k_max;
      opts.orbit_budget = ctx.cfg.slope_budget;
      const ActionTypeReport r = classify_action(m, opts);
      result = {{"matrix", matrix_to_json(m)},
                {"nielsen_thurston", nt_to_json(r.nt)},
                {"type", to_string(r.type)}};
      if (r.tdist) {
        result["a_est"] = round9(r.tdist->a_est);
        result["tdist"] = tdist_to_json(*r.tdist);
      }
      if (r.type == ActionType::Elliptic) {
        result["fixed_point"] = point_to_json(r.tdist->argmin_point);
        result["fixed_point_displacement"] = round9(r.fixed_point_displacement);
      }
      if (r.pinch) result["pinch"] = pinch_to_json(*r.pinch);
      if (!r.orbit.empty()) result["orbit"] = orbit_to_json(r.orbit);
    } else if (chosen == dl) {
      const DLReport r = dl_estimate(ctx.point(from_spec), ctx.point(to_spec),
                                     ctx.cfg.slope_budget);
      result = dl_to_json(r);
      header = "budget,value";
      for (const auto& [b, v] : r.convergence) rows.push_back({static_cast<double>(b), v});
    } else if (chosen == tdist) {
      const MCGMatrix m = ctx.matrix(matrix_spec);
      result = tdist_to_json(minimize_displacement(m, ctx.tdist_options()));
      result["matrix"] = matrix_to_json(m);
    } else if (chosen == pinch) {
      const MCGMatrix m = ctx.matrix(matrix_spec);
      const auto grid = parse_numbers(eps_spec, 0, "--eps");
      const PinchReport r = pinch_scan(m, grid, ctx.cfg.slope_budget);
      result = pinch_to_json(r);
      result["matrix"] = matrix_to_json(m);
      header = "epsilon,displacement,systole";
      for (const auto& s : r.samples) rows.push_back({s.epsilon, s.displacement, s.systole});
    } else if (chosen == orbit || chosen == sandwich) {
      const MCGMatrix m = ctx.matrix(matrix_spec);
      MarkovPoint x = MarkovPoint::from_traces(3.0, 3.0, 3.0);
      json where;
      if (point_spec.empty()) {
        const TDistReport t = minimize_displacement(m, ctx.tdist_options());
        x = t.argmin_point;
        where = {{"source", "tdist minimizer"}, {"tdist", tdist_to_json(t)}};
      } else {
        x = ctx.point(point_spec);
        where = {{"source", "given"}};
      }
      where["point"] = point_to_json(x);
      if (chosen == orbit) {
        const auto defects = orbit_audit(m, x, k_max, ctx.cfg.slope_budget);
        result = orbit_to_json(defects);
        header = "i,j,defect";
        for (const auto& d : defects) {
          rows.push_back({static_cast<double>(d.i), static_cast<double>(d.j), d.defect});
        }
      } else {
        std::vector<Slope> alphas;
        std::stringstream ss(alphas_spec);
        for (std::string item; std::getline(ss, item, ',');) alphas.push_back(Slope::parse(item));
        const SandwichReport r = sandwich_check(x, m, alphas, m_max, ctx.cfg.tolerance);
        json residuals = json::array();
        for (const auto& s : r.residuals) {
          residuals.push_back({{"m", s.m},
                               {"alpha", s.alpha.str()},
                               {"length", round9(s.length)},
                               {"intersection", round9(s.intersection)},
                               {"residual", round9(s.residual)}});
          rows.push_back({static_cast<double>(s.m), s.alpha.value(), s.residual});
        }
        json parallel = json::array();
        for (const auto& s : r.near_parallel) parallel.push_back(s.str());
        result = {{"weight", round9(r.weight)},
                  {"fitted_C", round9(r.fitted_C)},
                  {"min_residual", round9(r.min_residual)},
                  {"within_bounds", r.within_bounds},
                  {"max_m", r.max_m},
                  {"expanding_slope", round9(r.expanding_slope)},
                  {"near_parallel", parallel},
                  {"residuals", residuals}};
        header = "m,alpha,residual";
      }
      result["matrix"] = matrix_to_json(m);
      result["at"] = where;
    } else if (chosen == syscheck) {
      const MCGMatrix m = ctx.matrix(matrix_spec);
      const MarkovPoint x = ctx.point(point_spec);
      const bool holds = systole_inequality_check(x, m, ctx.cfg);
      const Systole sys = systole(x, ctx.cfg);
      const double disp = displacement(x, m, ctx.cfg.slope_budget);
      result = {{"matrix", matrix_to_json(m)},
                {"point", point_to_json(x)},
                {"holds", holds},
                {"lipschitz_constant", round9(std::exp(disp))},
                {"systole", {{"slope", sys.slope.str()}, {"length", round9(sys.length)}}},
                {"threshold", round9(ctx.cfg.delta0 / sys.length)}};
    } else if (chosen == holo) {
      const Fixture f1 = ctx.rep(rep_spec);
      std::optional<FuchsianRep> rep2;
      json target;
      if (!automorphism.empty()) {
        auto it = std::find_if(f1.automorphisms.begin(), f1.automorphisms.end(),
                               [&](const FreeAutomorphism& a) { return a.name() == automorphism; });
        if (it == f1.automorphisms.end()) {
          throw InvalidInput("fixture has no automorphism named '" + automorphism + "'");
        }
        rep2 = push_forward_rep(f1.rep, *it);
        target = {{"automorphism", automorphism}};
      } else if (!rep2_spec.empty()) {
        rep2 = ctx.rep(rep2_spec).rep;
        target = {{"rep", rep2->label()}};
      } else {
        throw InvalidInput("holo-dl needs --to or --automorphism");
      }
      const HoloDLReport r = dl_lower_bound(f1.rep, *rep2, max_length);
      result = {{"value", round9(r.value)},
                {"argmax_word", r.argmax_word.str()},
                {"max_word_length", r.max_word_length},
                {"classes", r.classes},
                {"from", f1.rep.label()},
                {"to", target}};
    }

    if (!ctx.common.trace_path.empty()) {
      if (header.empty()) throw InvalidInput("--trace is not supported by " + rec.command);
      write_csv(ctx.common.trace_path, header, rows, rec);
    }

    const json config = ctx.config_json();
    rec.config = config;
    json report{{"schema", kReportSchema},
                {"version", version_string()},
                {"command", rec.command},
                {"seed", ctx.common.seed},
                {"config", config},
                {"result", result}};
    const std::string text = report.dump(2) + "\n";
    if (ctx.common.out_path.empty()) {
      out << text;
    } else {
      std::ofstream file(ctx.common.out_path);
      if (!file) throw InvalidInput("cannot write '" + ctx.common.out_path + "'");
      file << text;
      rec.outputs.push_back(ctx.common.out_path);
    }
  } catch (const SceneError& e) {
    err << "error: " << e.what() << "\n";
    return kExitMalformed;
  } catch (const PreconditionViolation& e) {
    err << "error: precondition violated: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const DegenerateStructure& e) {
    err << "error: degenerate structure: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const std::invalid_argument& e) {  // InvalidInput and friends
    err << "error: " << e.what() << "\n";
    return kExitMalformed;
  } catch (const std::domain_error& e) {  // chart domain
    err << "error: " << e.what() << "\n";
    return kExitMalformed;
  } catch (const std::overflow_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitMalformed;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitFault;
  }
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return kExitOk;
}

}  // namespace lipschitz
