// extremal: linsolve / construct / verify front end.
//
// Exit codes: 0 ok, 2 invalid input, 3 solver failure, 4 audit failure,
// 5 failed bound check.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <utility>
#include <vector>

#include "extremal/extremal.hpp"

using namespace extremal;
using io::Json;

namespace {

constexpr int kInvalid = 2;
constexpr int kSolver = 3;
constexpr int kAudit = 4;
constexpr int kBound = 5;

struct BoundFailure {
  std::string message;
};

struct Common {
  int dim = 0;
  double density = 0.0;  // nodes per unit log-radius; 0 picks a default
  double t_min = std::numeric_limits<double>::quiet_NaN();
  double rtol = 1e-10;
  std::uint64_t seed = 0;
  std::string config;
  std::string out;
};

struct LinsolveArgs {
  std::string potential;
  std::vector<double> probes;
};

struct ConstructArgs {
  std::string mode;
  std::string phi = "inv_r2";
  int stages = 2;
  double c1 = std::numeric_limits<double>::quiet_NaN();
  double c2 = std::numeric_limits<double>::quiet_NaN();
  std::string psi;
};

struct VerifyArgs {
  std::string case_name;
  std::string case_file;
  int stages = 2;
  double window = 5.0;
  double depth = 0.0;
  double tolerance = 1e-6;
};

void add_common(CLI::App& sub, Common& c) {
  sub.add_option("--dim", c.dim, "Space dimension N");
  sub.add_option("--density", c.density, "Grid nodes per unit of log r");
  sub.add_option("--t-min", c.t_min, "Innermost log-radius of the grid");
  sub.add_option("--rtol", c.rtol, "ODE relative tolerance");
  sub.add_option("--seed", c.seed, "Seed, recorded in the manifest");
  sub.add_option("--config", c.config, "JSON file of option values");
  sub.add_option("--out", c.out, "Output directory (default $EXTREMAL_OUT_DIR or .)");
}

std::string config_token(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  throw PreconditionError("config value " + v.dump() + " is not a scalar");
}

/// Fills options not given on the command line from the JSON config.
void apply_config(CLI::App& sub, const std::string& path) {
  if (path.empty()) return;
  const Json cfg = io::read_json(path);
  if (!cfg.is_object()) throw PreconditionError("config " + path + " must be a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    if (key == "config" || key == "command") continue;
    std::string name = "--" + key;
    std::replace(name.begin(), name.end(), '_', '-');
    CLI::Option* opt = sub.get_option_no_throw(name);
    if (opt == nullptr) throw PreconditionError("unknown config key \"" + key + "\"");
    if (opt->count() > 0) continue;
    if (value.is_array()) {
      for (const auto& v : value) opt->add_result(config_token(v));
    } else {
      opt->add_result(config_token(value));
    }
    try {
      opt->run_callback();
    } catch (const CLI::ParseError& e) {
      throw PreconditionError("config key \"" + key + "\": " + e.what());
    }
  }
}

void require(bool ok, const std::string& message) {
  if (!ok) throw PreconditionError(message);
}

void validate_common(const Common& c, int min_dim = 3) {
  require(c.dim >= min_dim, "--dim must be at least " + std::to_string(min_dim));
  require(c.density == 0.0 || (std::isfinite(c.density) && c.density > 0.0),
          "--density must be positive");
  require(std::isnan(c.t_min) || (std::isfinite(c.t_min) && c.t_min < 0.0),
          "--t-min must be negative");
  require(std::isfinite(c.rtol) && c.rtol > 0.0, "--rtol must be positive");
}

std::optional<double> t_min_of(const Common& c) {
  if (std::isnan(c.t_min)) return std::nullopt;
  return c.t_min;
}

Json common_json(const Common& c) {
  Json j{{"dim", c.dim}, {"density", c.density}};
  j["t_min"] = std::isnan(c.t_min) ? Json(nullptr) : Json(c.t_min);
  j["rtol"] = c.rtol;
  j["seed"] = c.seed;
  return j;
}

/// Output files, written together once the run is complete.
class Outputs {
 public:
  Outputs(std::string command, Json config) : command_(std::move(command)), config_(std::move(config)) {
    config_hash_ = io::fnv1a(config_.dump());
  }

  const std::string& hash() const { return config_hash_; }
  io::Stamp stamp() const { return {config_hash_}; }

  Json meta() const {
    return Json{{"config_hash", config_hash_}, {"versions", io::module_versions()}};
  }

  void add(std::string name, std::string text) { files_.emplace_back(std::move(name), std::move(text)); }
  void add_json(std::string name, Json body) {
    Json j{{"meta", meta()}};
    for (auto& [k, v] : body.items()) j[k] = v;
    add(std::move(name), io::dump(j));
  }

  void write(const std::filesystem::path& dir, const Json& stats) {
    std::filesystem::create_directories(dir);
    Json listing = Json::array();
    for (const auto& [name, text] : files_)
      listing.push_back(Json{{"file", name}, {"bytes", text.size()}, {"fnv1a", io::fnv1a(text)}});
    Json manifest{{"command", command_},
                  {"config", config_},
                  {"config_hash", config_hash_},
                  {"versions", io::module_versions()},
                  {"outputs", listing},
                  {"stats", stats}};
    for (const auto& [name, text] : files_) io::write_file((dir / name).string(), text);
    io::write_file((dir / "manifest.json").string(), io::dump(manifest));
  }

 private:
  std::string command_;
  Json config_;
  std::string config_hash_;
  std::vector<std::pair<std::string, std::string>> files_;
};

std::filesystem::path output_dir(const Common& c) {
  if (!c.out.empty()) return c.out;
  if (const char* env = std::getenv("EXTREMAL_OUT_DIR"); env != nullptr && *env != '\0') return env;
  return ".";
}

LinearSolveOptions solve_options(const Common& c) {
  LinearSolveOptions o;
  o.ode.rtol = c.rtol;
  return o;
}

// ---------------------------------------------------------------------------

int run_linsolve(const Common& c, const LinsolveArgs& a) {
  validate_common(c);
  require(!a.potential.empty(), "--potential is required");
  const auto psi = io::parse_potential(a.potential, c.dim);

  auto bps = psi.breakpoints();
  const double lo = t_min_of(c).value_or(bps.empty() ? -40.0 : bps.front() - 10.0);
  std::erase_if(bps, [&](double b) { return b <= lo || b >= 0.0; });
  std::vector<double> probe_t;
  for (double r : a.probes) {
    require(std::isfinite(r) && r > 0.0 && r <= 1.0, "--probe radii must lie in (0, 1]");
    const double t = std::log(r);
    require(t > lo || r == 1.0, "--probe " + io::format_number(r) + " lies below the grid");
    probe_t.push_back(t);
    if (t < 0.0) bps.push_back(t);
  }
  const double density = c.density > 0 ? c.density : 100.0;
  const auto grid = make_log_grid(c.dim, lo, density, bps);

  LinearSolveStats stats;
  const auto omega = solve_linearized(psi, grid, solve_options(c), &stats);

  Json cfg = common_json(c);
  cfg["density"] = density;
  cfg["t_min"] = lo;
  cfg["potential"] = io::potential_to_json(psi);
  cfg["probes"] = a.probes;
  Outputs out("linsolve", cfg);
  out.add("omega.csv", io::profile_csv(omega, "omega", out.stamp()));

  Json probes = Json::array();
  for (std::size_t k = 0; k < probe_t.size(); ++k) {
    const std::size_t i = grid.find_node(probe_t[k]);
    probes.push_back(Json{{"r", a.probes[k]}, {"t", probe_t[k]}, {"omega", omega.value(i)}});
  }
  Json s{{"nodes", grid.size()},
         {"inner_level", stats.inner_level},
         {"inner_exponent", stats.inner_exponent},
         {"rescalings", stats.rescalings},
         {"boundary_slope", stats.boundary_slope},
         {"probes", probes}};
  out.write(output_dir(c), s);
  return 0;
}

// ---------------------------------------------------------------------------

PhiTarget parse_phi(const std::string& name) {
  if (name == "inv_r2") return {2.0, 1.0};
  if (name == "inv_r") return {1.0, 1.0};
  throw PreconditionError("unknown --phi \"" + name + "\" (expected inv_r2 or inv_r)");
}

Json stage_levels(const PotentialSpec& psi, const OscillationSchedule& s, bool ratio) {
  Json rows = Json::array();
  for (std::size_t k = 0; k < s.stages.size(); ++k) {
    const auto& st = s.stages[k];
    const double log_ratio = psi.log_level(st.ty, Side::Below) - (s.phi.log_phi(st.ty) + 2.0 * st.ty);
    Json row{{"n", k + 1},
             {"level_at_x", psi.level(st.tx, Side::Below)},
             {"level_at_y", psi.level(st.ty, Side::Below)}};
    if (ratio) row["psi_over_phi_at_y"] = std::exp(log_ratio);
    rows.push_back(row);
  }
  return rows;
}

int run_construct(const Common& c, const ConstructArgs& a) {
  validate_common(c);
  require(a.stages >= 0, "--stages must be nonnegative");
  std::optional<PotentialSpec> psi;
  std::optional<OscillationSchedule> schedule;
  Json cfg = common_json(c);
  cfg["mode"] = a.mode;
  bool deep = false;
  if (a.mode == "liminf") {
    auto b = build_oscillatory(parse_phi(a.phi), c.dim, a.stages);
    psi.emplace(std::move(b.potential));
    schedule = std::move(b.schedule);
    cfg["phi"] = a.phi;
    cfg["stages"] = a.stages;
    deep = a.stages >= 2;
  } else if (a.mode == "oscillate") {
    require(std::isfinite(a.c1) && std::isfinite(a.c2), "oscillate mode needs --c1 and --c2");
    const double border = 2.0 * (c.dim - 2);
    auto b = build_oscillatory(PhiTarget{2.0, border}, c.dim, a.stages);
    psi.emplace(blend(a.c1, a.c2, b.potential, c.dim));
    schedule = std::move(b.schedule);
    cfg["c1"] = a.c1;
    cfg["c2"] = a.c2;
    cfg["stages"] = a.stages;
    deep = a.stages >= 2;
  } else if (a.mode == "prescribed") {
    require(!a.psi.empty(), "prescribed mode needs --psi");
    psi.emplace(io::parse_potential(a.psi, c.dim));
  } else {
    throw PreconditionError("--mode must be liminf, oscillate or prescribed");
  }
  const double density = c.density > 0 ? c.density : (deep ? 4.0 : 100.0);
  const auto grid = grid_for(*psi, density, t_min_of(c));
  cfg["density"] = density;
  cfg["t_min"] = grid.t_min();
  cfg["potential"] = io::potential_to_json(*psi);

  LinearSolveStats stats;
  const auto omega = solve_linearized(*psi, grid, solve_options(c), &stats);
  const auto table = reconstruct_nonlinearity(omega, *psi);
  const auto& u = extremal_profile(table);
  const double fprime_error = verify_fprime_equals_psi(table, *psi, u);

  Outputs out("construct", cfg);
  Json pot = io::potential_to_json(*psi);
  out.add_json("potential.json", pot);
  if (schedule) {
    out.add_json("schedule.json", Json{{"schedule", io::schedule_to_json(*schedule)},
                                       {"stage_levels", stage_levels(*psi, *schedule, a.mode == "liminf")}});
  } else {
    out.add_json("schedule.json", Json{{"schedule", nullptr}, {"stage_levels", Json::array()}});
  }
  out.add("f.csv", io::table_csv(table, out.stamp()));
  out.add("u.csv", io::profile_csv(u, "u", out.stamp()));
  const auto& audit = table.audit();
  out.add_json("audit.json", Json{{"audit", io::audit_to_json(audit)},
                                  {"f0", table.f(0).value()},
                                  {"s_max", table.s_max()},
                                  {"samples", table.size()},
                                  {"fprime_max_relative_error", fprime_error}});
  out.add_json("case.json", Json{{"dim", c.dim},
                                 {"lambda_star", 1.0},
                                 {"density", density},
                                 {"t_min", grid.t_min()},
                                 {"audit_passed", audit.passed()},
                                 {"potential", pot}});
  out.write(output_dir(c), Json{{"nodes", grid.size()},
                                {"rescalings", stats.rescalings},
                                {"boundary_slope", stats.boundary_slope}});
  if (!audit.passed()) {
    std::string where = audit.first_violation
                            ? " at sample " + std::to_string(*audit.first_violation)
                            : std::string();
    throw AuditError("condition (1) audit failed: " + audit.failing_flag + where);
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct VerifyCase {
  std::string id;
  int dim = 0;
  double lambda_star = 0.0;
  LevelSamples levels;
  std::optional<StabilityReport> stability;
  Json extra = Json::object();
};

LogRadialGrid shallow(const LogRadialGrid& g, double t_floor, double density) {
  return make_log_grid(g.dim(), std::max(g.t_min(), t_floor), density, {});
}

VerifyCase exp_case(const Common& c, int dim) {
  require(dim >= 10, "the singular exponential case needs N >= 10");
  const auto f = Nonlinearity::exponential();
  const auto branch = minimal_branch(f, dim, linear_m_grid(0.5, 40.0, 80));
  VerifyCase v{"exp" + std::to_string(dim), dim, 2.0 * (dim - 2), {}, {}, {}};
  const auto grid =
      make_log_grid(dim, t_min_of(c).value_or(-40.0), c.density > 0 ? c.density : 20.0, {});
  const auto u = RadialProfile::sample_t(
      grid, [](double t) { return -2.0 * t; }, [](double) { return -2.0; });
  v.levels = levels_from_solution(f, u);
  const auto g2 = shallow(grid, -30.0, 20.0);
  const auto u2 = RadialProfile::sample_t(
      g2, [](double t) { return -2.0 * t; }, [](double) { return -2.0; });
  v.stability = stability_at_solution(f, v.lambda_star, u2);
  v.extra["singular_profile"] = "u = -2 log r";
  v.extra["branch"] = Json{{"lambda_star_estimate", branch.lambda_star_estimate},
                           {"m_at_max", branch.m_at_max},
                           {"monotone", branch.monotone},
                           {"relative_gap", branch.lambda_star_estimate / v.lambda_star - 1.0}};
  return v;
}

VerifyCase hardy_case(const Common& c, int dim) {
  const auto psi = hardy_potential(dim);
  const auto grid = grid_for(psi, c.density > 0 ? c.density : 100.0, t_min_of(c).value_or(-30.0));
  auto table = std::make_shared<const NonlinearityTable>(
      reconstruct_nonlinearity(solve_linearized(psi, grid, solve_options(c)), psi));
  if (!table->audit().passed()) throw AuditError("condition (1) audit failed: " + table->audit().failing_flag);
  const auto f = Nonlinearity::from_table(table);
  VerifyCase v{"hardy" + std::to_string(dim), dim, 1.0, {}, {}, {}};
  v.levels = levels_from_solution(f, extremal_profile(*table));
  double dev = 0.0;
  for (std::size_t i = 0; i < v.levels.t.size(); ++i)
    dev = std::max(dev, std::abs(v.levels.hi(i) - psi.hardy_level()));
  v.stability = stability_quadratic_form(psi, shallow(grid, -30.0, 50.0));
  BranchOptions bo;
  bo.refine = false;
  const auto branch = minimal_branch(f, dim, linear_m_grid(1.0, 0.95 * table->s_max(), 30), bo);
  v.extra["c_star_max_deviation"] = dev;
  v.extra["branch"] = Json{{"lambda_star_estimate", branch.lambda_star_estimate},
                           {"monotone", branch.monotone}};
  return v;
}

VerifyCase potential_case(const std::string& id, const PotentialSpec& psi, const LogRadialGrid& grid) {
  check_admissible(psi, grid);
  VerifyCase v{id, psi.dim(), 1.0, levels_from_potential(psi, grid), {}, {}};
  v.stability = stability_quadratic_form(psi, shallow(grid, -30.0, 20.0));
  return v;
}

VerifyCase blend_case(const Common& c, const VerifyArgs& a, int dim) {
  const double border = 2.0 * (dim - 2);
  auto b = build_oscillatory(PhiTarget{2.0, border}, dim, a.stages);
  const auto psi = blend(dim - 2.0, border, b.potential, dim);
  const double density = c.density > 0 ? c.density : (a.stages >= 2 ? 4.0 : 100.0);
  auto v = potential_case("blend" + std::to_string(dim), psi, grid_for(psi, density, t_min_of(c)));
  v.extra["stage_levels"] = stage_levels(psi, b.schedule, false);
  return v;
}

VerifyCase file_case(const Common& c, const std::string& path) {
  const Json j = io::read_json(path);
  const Json pj = j.contains("potential") ? j.at("potential") : j;
  if (j.contains("audit_passed") && !j.at("audit_passed").get<bool>())
    throw AuditError("case " + path + " failed the condition (1) audit");
  const auto psi = io::potential_from_json(pj);
  if (c.dim != 0) require(c.dim == psi.dim(), "--dim differs from the case file");
  double density = c.density;
  if (density <= 0) density = j.contains("density") ? j.at("density").get<double>() : 100.0;
  std::optional<double> lo = t_min_of(c);
  if (!lo && j.contains("t_min")) lo = j.at("t_min").get<double>();
  const double lambda = j.contains("lambda_star") ? j.at("lambda_star").get<double>() : 1.0;
  const std::filesystem::path file(path);
  std::string id = file.stem().string();
  if (id == "case" && file.has_parent_path()) id = file.parent_path().filename().string();
  auto v = potential_case(id, psi, grid_for(psi, density, lo));
  v.lambda_star = lambda;
  return v;
}

int run_verify(Common c, const VerifyArgs& a) {
  require(a.case_name.empty() != a.case_file.empty(), "give exactly one of --case or --case-file");
  require(a.window > 0 && std::isfinite(a.window), "--window must be positive");
  require(a.tolerance > 0 && std::isfinite(a.tolerance), "--tolerance must be positive");
  require(a.depth <= 0 && std::isfinite(a.depth), "--depth must be nonpositive");
  require(a.stages >= 0, "--stages must be nonnegative");

  VerifyCase v;
  if (!a.case_file.empty()) {
    if (c.dim != 0) validate_common(c);
    v = file_case(c, a.case_file);
    c.dim = v.dim;
  } else {
    static const std::regex builtin("(exp|hardy|blend)([0-9]+)");
    std::smatch m;
    if (a.case_name == "torsion") {
      const auto f = Nonlinearity::constant(1.0);
      require(!f.properties().superlinear, "torsion nonlinearity reported superlinear");
      throw AuditError("torsion case: constant f is not superlinear, condition (1) fails");
    }
    if (!std::regex_match(a.case_name, m, builtin))
      throw PreconditionError("unknown case \"" + a.case_name +
                              "\" (expected exp10, hardy12, blend10, torsion or a case file)");
    const int dim = std::stoi(m[2].str());
    require(c.dim == 0 || c.dim == dim, "--dim differs from the case name");
    c.dim = dim;
    validate_common(c);
    if (m[1] == "exp") v = exp_case(c, dim);
    else if (m[1] == "hardy") v = hardy_case(c, dim);
    else v = blend_case(c, a, dim);
  }

  const double lambda1 = first_eigenvalue(v.dim).lambda;
  BoundOptions bo;
  bo.window = a.window;
  bo.depth = a.depth;
  bo.tolerance = a.tolerance;
  bo.lambda1 = lambda1;
  const auto report = bound_check(v.levels, v.lambda_star, v.dim, bo, v.id);

  Json integrals = Json::array();
  if (v.dim >= 10) {
    for (double s : {0.7, 0.5, 0.35}) {
      const auto w = window_integral_bound(s, v.dim);
      integrals.push_back(Json{{"s", s},
                               {"numeric", w.numeric},
                               {"intermediate", w.intermediate},
                               {"bound", w.bound},
                               {"holds", w.numeric >= w.bound}});
    }
  }

  Json cfg = common_json(c);
  cfg["case"] = a.case_name.empty() ? Json(nullptr) : Json(a.case_name);
  cfg["case_file"] = a.case_file.empty() ? Json(nullptr) : Json(io::fnv1a(io::read_file(a.case_file)));
  cfg["stages"] = a.stages;
  cfg["window"] = a.window;
  cfg["depth"] = a.depth;
  cfg["tolerance"] = a.tolerance;
  Outputs out("verify", cfg);

  Json body = io::report_to_json(report);
  body["lambda1"] = lambda1;
  body["passed"] = report.passed();
  if (v.stability)
    body["stability"] = Json{{"min_rayleigh_quotient", v.stability->min_quotient},
                             {"basis_size", v.stability->basis_size},
                             {"nonnegative", v.stability->min_quotient >= -1e-8}};
  body["window_integral"] = integrals;
  for (auto& [k, val] : v.extra.items()) body[k] = val;
  out.add_json("report.json", body);
  out.add("windows.csv", io::windows_csv(report, out.stamp()));

  std::string summary = "case " + report.case_id + "  N=" + std::to_string(report.dim) + "\n";
  auto line = [&](const std::string& k, const std::string& val) { summary += "  " + k + ": " + val + "\n"; };
  line("config_hash", out.hash());
  line("lambda_star", io::format_number(report.lambda_star));
  line("lambda_1", io::format_number(lambda1));
  line("pointwise c* <= lambda_1", std::string(report.pointwise_upper.passed ? "pass" : "FAIL") +
                                       " (margin " + io::format_number(report.pointwise_upper.margin) + ")");
  line("windowed sup >= 2(N-2)", std::string(report.windowed_lower.passed ? "pass" : "FAIL") +
                                     " (margin " + io::format_number(report.windowed_lower.margin) + ")");
  line("windows", std::to_string(report.windows.size()) + " of width " + io::format_number(report.window));
  line("max level", io::format_number(report.max_level));
  if (v.stability) line("min Rayleigh quotient", io::format_number(v.stability->min_quotient));
  if (v.extra.contains("c_star_max_deviation"))
    line("max |c* - (N-2)^2/4|", io::format_number(v.extra["c_star_max_deviation"].get<double>()));
  if (v.extra.contains("branch"))
    line("branch lambda* estimate",
         io::format_number(v.extra["branch"]["lambda_star_estimate"].get<double>()));
  for (const auto& w : integrals)
    line("window integral s=" + CLI::detail::to_string(w["s"].get<double>()),
         io::format_number(w["numeric"].get<double>()) + " >= " +
             io::format_number(w["bound"].get<double>()));
  out.add("summary.txt", summary);
  out.write(output_dir(c), Json{{"nodes", report.nodes}, {"windows", report.windows.size()}});

  if (!report.passed()) {
    std::string msg;
    if (!report.pointwise_upper.passed)
      msg += "pointwise upper bound failed, margin " + io::format_number(report.pointwise_upper.margin);
    if (!report.windowed_lower.passed)
      msg += std::string(msg.empty() ? "" : "; ") + "windowed lower bound failed, margin " +
             io::format_number(report.windowed_lower.margin);
    throw BoundFailure{msg};
  }
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"Extremal solutions: linear solves, reconstruction and bound checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(io::kVersion));

  Common common;
  LinsolveArgs la;
  ConstructArgs ca;
  VerifyArgs va;

  auto* lin = app.add_subcommand("linsolve", "Solve the linearized problem for a potential");
  add_common(*lin, common);
  lin->add_option("--potential", la.potential,
                  "zero | borderline | hardy | shifted:EPS | window:A,B | table:FILE");
  lin->add_option("--probe", la.probes, "Radii to report omega at (inserted as grid nodes)");

  auto* con = app.add_subcommand("construct", "Build a potential and reconstruct the nonlinearity");
  add_common(*con, common);
  con->add_option("--mode", ca.mode, "liminf | oscillate | prescribed");
  con->add_option("--phi", ca.phi, "Target for liminf mode: inv_r2 | inv_r");
  con->add_option("--stages", ca.stages, "Number of oscillation stages");
  con->add_option("--c1", ca.c1, "Lower blend constant");
  con->add_option("--c2", ca.c2, "Upper blend constant");
  con->add_option("--psi", ca.psi, "Potential for prescribed mode");

  auto* ver = app.add_subcommand("verify", "Check the two-sided bound on a singular case");
  add_common(*ver, common);
  ver->add_option("--case", va.case_name, "exp10 | hardy12 | blend10 | torsion");
  ver->add_option("--case-file", va.case_file, "case.json written by construct");
  ver->add_option("--stages", va.stages, "Stages of the blend case");
  ver->add_option("--window", va.window, "Window width in log r");
  ver->add_option("--depth", va.depth, "Only windows below this log r enter the lower check");
  ver->add_option("--tolerance", va.tolerance, "Slack of the lower check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInvalid;
  }

  CLI::App* sub = app.get_subcommands().front();
  apply_config(*sub, common.config);
  if (sub == lin) return run_linsolve(common, la);
  if (sub == con) return run_construct(common, ca);
  return run_verify(common, va);
}

}  // namespace

int main(int argc, char** argv) {
  auto fail = [](int code, const std::string& kind, const std::string& what) {
    std::cerr << "extremal: " << kind << ": " << what << '\n';
    return code;
  };
  try {
    return run(argc, argv);
  } catch (const BoundFailure& e) {
    return fail(kBound, "bound check failed", e.message);
  } catch (const PreconditionError& e) {
    return fail(kInvalid, "invalid input", e.what());
  } catch (const AuditError& e) {
    return fail(kAudit, "audit failed", e.what());
  } catch (const SolverError& e) {
    return fail(kSolver, "solver failed", e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(kInvalid, "invalid input", e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(kInvalid, "invalid input", e.what());
  } catch (const std::exception& e) {
    return fail(kSolver, "solver failed", e.what());
  }
}
