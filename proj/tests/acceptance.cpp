// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <sys/wait.h>

#include <boost/math/special_functions/bessel.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "extremal/extremal.hpp"

using namespace extremal;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double bessel_lambda1(int dim) {
  const double j = boost::math::cyl_bessel_j_zero(dim / 2.0 - 1.0, 1);
  return j * j;
}

std::string num(double x, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::string detail;
  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [failed]");
  }
};

Outcome closed_form_oracle() {
  Outcome o;
  for (auto [a, b, n] : {std::tuple{0.25, 0.5, 10}, std::tuple{0.1, 0.3, 12},
                         std::tuple{0.5 * std::exp(-8.0), 0.5, 10}}) {
    const auto start = Clock::now();
    const auto psi = window_potential(a, b, n);
    const auto g = grid_for(psi);
    const auto w = solve_linearized(psi, g);
    const double secs = seconds_since(start);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      worst = std::max(worst, rel(w.value(i), closed_form_window(a, b, n, g.radius(i))));
    o.check(worst <= 1e-6 && secs < 1.0, "(N=" + std::to_string(n) + ", A=" + num(a) + ", B=" + num(b) +
                                             ") err " + num(worst, 2) + " in " + num(secs, 2) + " s");
  }
  return o;
}

Outcome power_law_oracles() {
  Outcome o;
  for (int n : {10, 12}) {
    const std::vector<std::pair<std::string, PotentialSpec>> cases{
        {"0", zero_potential(n)},
        {"2(N-2)", borderline_potential(n)},
        {"2(N-2)-1", shifted_potential(n, 1.0)},
        {"(N-2)^2/4", hardy_potential(n)}};
    for (const auto& [name, psi] : cases) {
      const double beta = power_law_solution(psi.level(-1.0, Side::Below), n).beta_plus;
      const auto g = grid_for(psi);
      const auto w = solve_linearized(psi, g);
      double worst = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i)
        worst = std::max(worst, std::abs(std::expm1(w.scaled(i).log_abs() - beta * g[i])));
      const bool listed = (n == 10 && name == "2(N-2)-1") || (n == 12 && name == "(N-2)^2/4");
      o.check(worst <= 1e-6, "N=" + std::to_string(n) + " c=" + name + (listed ? " beta=" + num(beta, 7) : "") +
                                 " err " + num(worst, 2));
    }
  }
  const double b10 = power_law_solution(15.0, 10).beta_plus;
  const double b12 = power_law_solution(25.0, 12).beta_plus;
  o.check(std::abs(b10 + 0.837722) < 5e-7 && std::abs(b12 + 1.683375) < 5e-7, "listed exponents");
  return o;
}

Outcome comparison_suite() {
  Outcome o;
  std::mt19937_64 rng(20240601);
  int violations = 0;
  double worst = -INFINITY;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 10 + trial % 3;
    const double hardy = (n - 2.0) * (n - 2.0) / 4.0;
    std::uniform_real_distribution<double> level(0.0, hardy);
    std::uniform_real_distribution<double> edge(-15.0, -0.05);
    std::uniform_int_distribution<int> count(1, 6);
    std::vector<double> edges(static_cast<std::size_t>(count(rng)));
    for (auto& e : edges) e = edge(rng);
    std::sort(edges.begin(), edges.end());
    std::vector<double> c1(edges.size() + 1), c2(edges.size() + 1);
    for (std::size_t k = 0; k < c1.size(); ++k) {
      const double x = level(rng), y = level(rng);
      c1[k] = std::min(x, y);
      c2[k] = std::max(x, y);
    }
    const auto p1 = steps_potential(n, edges, c1);
    const auto p2 = steps_potential(n, edges, c2);
    const auto r = compare_potentials(p1, p2, grid_for(p1, 50.0, -20.0));
    worst = std::max(worst, r.max_difference);
    if (r.max_difference > 1e-8) ++violations;
  }
  o.check(violations == 0, "100 pairs, " + std::to_string(violations) + " violations, max(w1-w2) " +
                               num(worst, 3));
  return o;
}

Outcome window_integral() {
  Outcome o;
  double prev = 0.0;
  for (double s : {0.7, 0.5, 0.35}) {
    const auto w = window_integral_bound(s, 10);
    o.check(w.numeric >= w.bound && w.bound > prev,
            "s=" + num(s) + " integral " + num(w.numeric) + " >= bound " + num(w.bound));
    prev = w.bound;
  }
  o.check(std::abs(window_integral_bound(0.5, 10).bound - 1.87454) < 5e-6, "bound(0.5) = 1.87454");
  return o;
}

Outcome gelfand_branch() {
  Outcome o;
  const auto start = Clock::now();
  const auto f = Nonlinearity::exponential();
  const auto d10 = minimal_branch(f, 10, linear_m_grid(0.5, 40.0, 80));
  o.check(rel(d10.lambda_star_estimate, 16.0) <= 0.005, "N=10 lambda* " + num(d10.lambda_star_estimate, 8));
  const auto d2 = minimal_branch(f, 2, linear_m_grid(0.25, 10.0, 14));
  o.check(rel(d2.lambda_star_estimate, 2.0) <= 0.01, "N=2 lambda* " + num(d2.lambda_star_estimate, 8));
  BranchOptions coarse;
  coarse.refine = false;
  const auto d9 = minimal_branch(f, 9, linear_m_grid(0.25, 40.0, 160), coarse);
  o.check(!d9.monotone, "N=9 non-monotone (" + std::to_string(d9.interior_maxima) + " interior maxima)");
  o.check(d10.monotone, "N=10 monotone");
  const double secs = seconds_since(start);
  o.check(secs < 10.0, num(secs, 3) + " s");
  return o;
}

Outcome borderline_round_trip() {
  Outcome o;
  const auto psi = borderline_potential(10);
  const auto grid = grid_for(psi, 100.0, -20.0);
  const auto table = std::make_shared<const NonlinearityTable>(reconstruct_nonlinearity(psi, grid));
  double worst = 0.0;
  for (std::size_t j = 0; j + 1 < table->size() && table->s(j) <= 10.0; ++j) {
    const double s = table->s(j), mid = 0.5 * (s + table->s(j + 1));
    worst = std::max(worst, rel(table->f(j).value(), 8.0 * std::exp(2.0 * s)));
    worst = std::max(worst, rel(table->value(mid), 8.0 * std::exp(2.0 * mid)));
  }
  o.check(worst <= 1e-5, "grid t_min=-20, max rel err on [0,10] " + num(worst, 2));
  o.check(std::abs(table->f(0).value() - 8.0) <= 1e-9, "f(0) = " + num(table->f(0).value(), 12));
  BranchOptions bo;
  bo.refine = false;
  const auto d = minimal_branch(Nonlinearity::from_table(table), 10, linear_m_grid(1.0, 19.5, 38), bo);
  o.check(rel(d.lambda_star_estimate, 1.0) <= 0.01, "lambda* " + num(d.lambda_star_estimate, 6));
  return o;
}

Outcome bound_suite() {
  Outcome o;
  BoundOptions opts;
  {
    const auto g = make_log_grid(10, -40.0, 20.0, {});
    const auto u = RadialProfile::sample_t(
        g, [](double t) { return -2.0 * t; }, [](double) { return -2.0; });
    const auto r = bound_check(levels_from_solution(Nonlinearity::exponential(), u), 16.0, 10, opts, "exp10");
    o.check(r.passed(), "exp10 upper margin " + num(r.pointwise_upper.margin) + ", lower margin " +
                            num(r.windowed_lower.margin, 2));
  }
  {
    const auto psi = hardy_potential(12);
    const auto table = std::make_shared<const NonlinearityTable>(
        reconstruct_nonlinearity(psi, grid_for(psi, 100.0, -30.0)));
    const auto levels = levels_from_solution(Nonlinearity::from_table(table), extremal_profile(*table));
    double dev = 0.0;
    for (std::size_t i = 0; i < levels.t.size(); ++i) dev = std::max(dev, std::abs(levels.hi(i) - 25.0));
    const auto r = bound_check(levels, 1.0, 12, opts, "hardy12");
    o.check(r.passed() && dev <= 1e-6, "hardy12 |c*-25| <= " + num(dev, 2) + ", lower margin " +
                                           num(r.windowed_lower.margin));
  }
  {
    const auto osc = build_oscillatory(PhiTarget{2.0, 16.0}, 10, 2);
    const auto phi = blend(8.0, 16.0, osc.potential, 10);
    const auto r = bound_check(levels_from_potential(phi, grid_for(phi, 4.0)), 1.0, 10, opts, "blend10");
    o.check(r.passed(), "blend10 " + std::to_string(r.windows.size()) + " windows, lower margin " +
                            num(r.windowed_lower.margin));
  }
  for (int n : {10, 12}) {
    const double l = first_eigenvalue(n).lambda;
    const double oracle = bessel_lambda1(n);
    o.check(rel(l, oracle) <= 1e-6, "lambda1(" + std::to_string(n) + ") = " + num(l, 9) +
                                        " vs Bessel oracle " + num(oracle, 9));
  }
  o.detail += "; note: the listed 87.6302 and 114.73 differ from the Bessel oracle";
  return o;
}

Outcome oscillatory_construction() {
  Outcome o;
  const auto b = build_oscillatory(PhiTarget{2.0, 1.0}, 10, 2);
  const auto& psi = b.potential;
  double id_x = 0.0, id_y = 0.0;
  for (std::size_t k = 0; k < b.schedule.stages.size(); ++k) {
    const auto& st = b.schedule.stages[k];
    for (Side side : {Side::Below, Side::Above})
      id_x = std::max(id_x, std::abs(psi.level(st.tx, side) - 16.0) / 16.0);
    const double ratio =
        std::exp(psi.log_level(st.ty, Side::Below) - (b.schedule.phi.log_phi(st.ty) + 2.0 * st.ty));
    id_y = std::max(id_y, rel(ratio, 1.0 / (k + 2.0)));
  }
  o.check(id_x <= 4e-16 && id_y <= 1e-14,
          "r^2 Psi(x_n)=16 err " + num(id_x, 2) + ", Psi/phi(y_n)=1/(n+1) err " + num(id_y, 2));
  const auto table = reconstruct_nonlinearity(psi, grid_for(psi, 4.0));
  const auto& a = table.audit();
  o.check(a.passed(), "condition (1) audit on " + std::to_string(table.size()) + " samples" +
                          (a.passed() ? "" : " (" + a.failing_flag + ")"));

  const auto inner = build_oscillatory(PhiTarget{2.0, 16.0}, 10, 2);
  const auto phi = blend(8.0, 16.0, inner.potential, 10);
  double at_x = 0.0;
  for (const auto& st : inner.schedule.stages) at_x = std::max(at_x, std::abs(phi.level(st.tx, Side::Below) - 16.0));
  const double at_y2 = phi.level(inner.schedule.stages[1].ty, Side::Below);
  o.check(at_x <= 1e-8 && std::abs(at_y2 - (8.0 + 8.0 / 3.0)) <= 1e-8,
          "blend (inner target 16/r^2) c(x_n)=16, c(y_2)=" + num(at_y2, 10));
  const auto literal = blend(8.0, 16.0, psi, 10);
  o.detail += "; blend over the 1/r^2 build gives c(y_2)=" +
              num(literal.level(b.schedule.stages[1].ty, Side::Below), 10);
  return o;
}

Outcome stability() {
  Outcome o;
  double worst = INFINITY;
  auto run = [&](const std::string& name, const PotentialSpec& psi, const LogRadialGrid& g) {
    const double q = stability_quadratic_form(psi, g).min_quotient;
    worst = std::min(worst, q);
    o.check(q >= -1e-8, name + " " + num(q, 4));
  };
  const auto k1 = build_oscillatory(PhiTarget{2.0, 1.0}, 10, 1);
  run("liminf K=1", k1.potential, grid_for(k1.potential, 100.0));
  const auto k2 = build_oscillatory(PhiTarget{2.0, 1.0}, 10, 2);
  run("liminf K=2 (t>=-30)", k2.potential, grid_for(k2.potential, 20.0, -30.0));
  const auto i1 = build_oscillatory(PhiTarget{2.0, 16.0}, 10, 1);
  const auto b1 = blend(8.0, 16.0, i1.potential, 10);
  run("blend K=1", b1, grid_for(b1, 100.0));
  for (int n : {10, 12}) {
    const auto h = hardy_potential(n);
    run("hardy" + std::to_string(n), h, grid_for(h, 50.0, -30.0));
  }
  const auto bl = borderline_potential(10);
  run("borderline", bl, grid_for(bl, 50.0, -30.0));
  const double q = quadratic_form_value(bl, [](double r) { return 1.0 - r; }, [](double) { return -1.0; });
  o.check(std::abs(q - 0.0555556) <= 1e-6, "Q(1-r) = " + num(q, 8));
  return o;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(EXTREMAL_CLI_PATH) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome reproducibility() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "extremal_acceptance_repro";
  fs::remove_all(root);
  const std::vector<std::string> commands{
      "linsolve --dim 10 --potential window:0.25,0.5 --probe 0.75 --seed 3",
      "construct --mode oscillate --dim 10 --c1 8 --c2 16 --stages 2",
      "construct --mode prescribed --dim 12 --psi hardy",
      "verify --case exp10",
      "verify --case blend10"};
  for (std::size_t k = 0; k < commands.size(); ++k) {
    const fs::path a = root / (std::to_string(k) + "a"), b = root / (std::to_string(k) + "b");
    const int ra = run_cli(commands[k] + " --out " + a.string());
    const int rb = run_cli(commands[k] + " --out " + b.string());
    bool same = ra == 0 && rb == 0;
    std::size_t files = 0;
    if (same) {
      for (const auto& e : fs::directory_iterator(a)) {
        ++files;
        same = same && slurp(e.path()) == slurp(b / e.path().filename());
      }
    }
    const std::string name = commands[k].substr(0, commands[k].find(" --"));
    o.check(same && files >= 2, name + " (" + std::to_string(files) + " files)");
  }
  fs::remove_all(root);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"closed-form window oracle", closed_form_oracle},
      {"power-law oracles", power_law_oracles},
      {"comparison principle suite", comparison_suite},
      {"window integral bound", window_integral},
      {"Gelfand branch", gelfand_branch},
      {"borderline round trip", borderline_round_trip},
      {"two-sided bound suite", bound_suite},
      {"oscillatory construction", oscillatory_construction},
      {"stability", stability},
      {"reproducibility", reproducibility}};
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome out;
    const auto start = Clock::now();
    try {
      out = criteria[k].second();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    if (!out.pass) ++failed;
    std::cout << (out.pass ? "PASS" : "FAIL") << " criterion " << k + 1 << " (" << criteria[k].first
              << ", " << num(seconds_since(start), 3) << " s): " << out.detail << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << '\n';
  return failed == 0 ? 0 : 1;
}
