#include <gtest/gtest.h>

#include <sys/wait.h>

#include <boost/math/special_functions/bessel.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "extremal/io.hpp"
#include "extremal/linear_ode.hpp"
#include "extremal/oscillatory.hpp"
#include "extremal/potentials.hpp"

namespace fs = std::filesystem;
using extremal::io::Json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("extremal_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + EXTREMAL_CLI_PATH + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Json load(const fs::path& p) { return Json::parse(slurp(p)); }

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string hardy_table(int dim) {
  Json t = Json::array(), c = Json::array();
  const double level = (dim - 2.0) * (dim - 2.0) / 4.0;
  for (int k = -40; k <= 0; ++k) {
    t.push_back(static_cast<double>(k));
    c.push_back(level);
  }
  return Json{{"dim", dim}, {"t", t}, {"level", c}}.dump();
}

/// Fields of the first data row, below the stamp and the header.
std::vector<std::string> first_data_row(const fs::path& csv) {
  std::istringstream in(slurp(csv));
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  std::getline(in, line);
  std::vector<std::string> out;
  std::istringstream row(line);
  for (std::string cell; std::getline(row, cell, ',');) out.push_back(cell);
  return out;
}

}  // namespace

TEST(CliLinsolve, BorderlineProbeIsInverseRadius) {
  const auto dir = scratch("borderline");
  ASSERT_EQ(run("linsolve --dim 10 --potential borderline --probe 0.5 --out " + dir.string()), 0);
  const auto m = load(dir / "manifest.json");
  EXPECT_NEAR(m["stats"]["probes"][0]["omega"].get<double>(), 2.0, 1e-9);
  const std::string csv = slurp(dir / "omega.csv");
  EXPECT_EQ(csv.rfind("# extremal ", 0), 0u);
  EXPECT_NE(csv.find("config_hash=" + m["config_hash"].get<std::string>()), std::string::npos);
  EXPECT_NE(csv.find("\nt,r,omega\n"), std::string::npos);
}

TEST(CliLinsolve, WindowProbeMatchesClosedForm) {
  const auto dir = scratch("window");
  ASSERT_EQ(run("linsolve --dim 10 --potential window:0.25,0.5 --probe 0.75 --out " + dir.string()), 0);
  const double w = load(dir / "manifest.json")["stats"]["probes"][0]["omega"].get<double>();
  EXPECT_NEAR(w, 0.753023, 1e-6);
  EXPECT_NEAR(w, extremal::closed_form_window(0.25, 0.5, 10, 0.75), 1e-8);
}

TEST(CliLinsolve, RejectsTableAboveHardyLevel) {
  const auto dir = scratch("bad");
  write(dir / "bad.json", R"({"dim": 10, "t": [-2, -1, 0], "level": [30, 30, 30]})");
  EXPECT_EQ(run("linsolve --dim 10 --potential table:" + (dir / "bad.json").string() +
                " --out " + (dir / "out").string()),
            2);
  EXPECT_FALSE(fs::exists(dir / "out" / "omega.csv"));
}

TEST(CliLinsolve, ValidationFailuresExitTwo) {
  const auto dir = scratch("invalid").string();
  EXPECT_EQ(run("linsolve --dim 2 --potential zero --out " + dir), 2);
  EXPECT_EQ(run("linsolve --dim 10 --potential nonsense --out " + dir), 2);
  EXPECT_EQ(run("linsolve --dim 10 --out " + dir), 2);
  EXPECT_EQ(run("linsolve --dim 10 --potential shifted:abc --out " + dir), 2);
  EXPECT_EQ(run("linsolve --dim 10 --potential borderline --rtol -1 --out " + dir), 2);
  EXPECT_EQ(run("linsolve --dim 10 --potential borderline --probe 2 --out " + dir), 2);
  EXPECT_EQ(run("nosuchcommand"), 2);
  EXPECT_EQ(run("--help"), 0);
}

TEST(CliConfig, FileFillsOnlyMissingOptions) {
  const auto dir = scratch("config");
  write(dir / "cfg.json", R"({"dim": 10, "potential": "hardy", "probe": [0.5], "t_min": -20})");
  ASSERT_EQ(run("linsolve --config " + (dir / "cfg.json").string() +
                " --potential borderline --out " + (dir / "out").string()),
            0);
  const auto m = load(dir / "out" / "manifest.json");
  EXPECT_EQ(m["config"]["potential"]["kind"], "borderline");
  EXPECT_EQ(m["config"]["dim"], 10);
  EXPECT_EQ(m["config"]["t_min"], -20.0);
  EXPECT_NEAR(m["stats"]["probes"][0]["omega"].get<double>(), 2.0, 1e-9);

  write(dir / "unknown.json", R"({"dim": 10, "potential": "hardy", "colour": "red"})");
  EXPECT_EQ(run("linsolve --config " + (dir / "unknown.json").string() + " --out " +
                (dir / "x").string()),
            2);
}

TEST(CliConfig, EnvironmentSetsDefaultOutputDirectory) {
  const auto dir = scratch("env");
  ASSERT_EQ(run("linsolve --dim 10 --potential borderline", "EXTREMAL_OUT_DIR=" + dir.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "omega.csv"));
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
}

TEST(CliConstruct, LiminfScheduleIdentities) {
  const auto dir = scratch("liminf");
  ASSERT_EQ(run("construct --mode liminf --dim 10 --phi inv_r2 --stages 2 --out " + dir.string()), 0);
  const auto s = load(dir / "schedule.json");
  const double y1 = s["schedule"]["stages"][0]["y"].get<double>();
  EXPECT_NEAR(y1, std::exp(-1.0) / std::sqrt(32.0) / 2.0, 1e-15);
  EXPECT_NEAR(y1, 0.0325159, 2e-5 * 0.0325159);
  for (int n = 1; n <= 2; ++n) {
    const auto& row = s["stage_levels"][n - 1];
    EXPECT_EQ(row["level_at_x"].get<double>(), 16.0);
    EXPECT_NEAR(row["psi_over_phi_at_y"].get<double>(), 1.0 / (n + 1), 1e-12);
  }
  EXPECT_TRUE(load(dir / "audit.json")["audit"]["passed"].get<bool>());
  for (const char* f : {"potential.json", "schedule.json", "f.csv", "u.csv", "audit.json",
                        "case.json", "manifest.json"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
}

TEST(CliConstruct, OscillateBlendStageValues) {
  const auto dir = scratch("oscillate");
  ASSERT_EQ(run("construct --mode oscillate --dim 10 --c1 8 --c2 16 --stages 2 --out " + dir.string()),
            0);
  const auto rows = load(dir / "schedule.json")["stage_levels"];
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NEAR(rows[0]["level_at_x"].get<double>(), 16.0, 1e-8);
  EXPECT_NEAR(rows[1]["level_at_x"].get<double>(), 16.0, 1e-8);
  EXPECT_NEAR(rows[1]["level_at_y"].get<double>(), 8.0 + 8.0 / 3.0, 1e-8);
  EXPECT_TRUE(load(dir / "audit.json")["audit"]["passed"].get<bool>());
}

TEST(CliConstruct, PrescribedHardyTable) {
  const auto dir = scratch("prescribed");
  write(dir / "hardy.json", hardy_table(12));
  ASSERT_EQ(run("construct --mode prescribed --dim 12 --psi table:" + (dir / "hardy.json").string() +
                " --out " + (dir / "out").string()),
            0);
  const auto row = first_data_row(dir / "out" / "f.csv");
  ASSERT_GE(row.size(), 2u);
  EXPECT_EQ(row[0], "0");
  EXPECT_NEAR(std::stod(row[1]), 9.316625, 1e-6);
  EXPECT_NEAR(std::stod(row[2]), 25.0, 1e-12);
  EXPECT_TRUE(load(dir / "out" / "audit.json")["audit"]["passed"].get<bool>());
}

TEST(CliConstruct, AuditFailureExitsFour) {
  const auto dir = scratch("torsion_construct");
  EXPECT_EQ(run("construct --mode prescribed --dim 10 --psi zero --t-min -6 --out " + dir.string()), 4);
  const auto a = load(dir / "audit.json")["audit"];
  EXPECT_FALSE(a["passed"].get<bool>());
  EXPECT_EQ(a["failing_flag"], "superlinear");
  EXPECT_EQ(run("construct --mode sideways --dim 10 --out " + dir.string()), 2);
  EXPECT_EQ(run("construct --mode oscillate --dim 10 --stages 1 --out " + dir.string()), 2);
}

TEST(CliVerify, ExponentialCase) {
  const auto dir = scratch("exp10");
  ASSERT_EQ(run("verify --case exp10 --out " + dir.string()), 0);
  const auto r = load(dir / "report.json");
  const double lower = r["checks"]["windowed_lower"]["margin"].get<double>();
  EXPECT_LE(std::abs(lower), 1e-3);
  const double j = boost::math::cyl_bessel_j_zero(4.0, 1);
  EXPECT_NEAR(r["lambda1"].get<double>(), j * j, 1e-6 * j * j);
  EXPECT_NEAR(r["checks"]["pointwise_upper"]["margin"].get<double>(), j * j - 16.0, 1e-5);
  EXPECT_NEAR(r["branch"]["lambda_star_estimate"].get<double>(), 16.0, 0.08);
  EXPECT_TRUE(r["passed"].get<bool>());
  EXPECT_TRUE(fs::exists(dir / "windows.csv"));
  EXPECT_TRUE(fs::exists(dir / "summary.txt"));
}

TEST(CliVerify, HardyCaseHasConstantLevel) {
  const auto dir = scratch("hardy12");
  ASSERT_EQ(run("verify --case hardy12 --out " + dir.string()), 0);
  const auto r = load(dir / "report.json");
  EXPECT_LE(r["c_star_max_deviation"].get<double>(), 1e-6);
  EXPECT_TRUE(r["checks"]["pointwise_upper"]["passed"].get<bool>());
  EXPECT_TRUE(r["checks"]["windowed_lower"]["passed"].get<bool>());
}

TEST(CliVerify, BlendCasePasses) {
  const auto dir = scratch("blend10");
  ASSERT_EQ(run("verify --case blend10 --out " + dir.string()), 0);
  const auto r = load(dir / "report.json");
  EXPECT_NEAR(r["max_level"].get<double>(), 16.0, 1e-9);
  EXPECT_GE(r["stability"]["min_rayleigh_quotient"].get<double>(), -1e-8);
}

TEST(CliVerify, TorsionRejected) {
  const auto dir = scratch("torsion");
  EXPECT_EQ(run("verify --case torsion --out " + dir.string()), 4);
  EXPECT_FALSE(fs::exists(dir / "report.json"));
  EXPECT_EQ(run("verify --case exp9 --out " + dir.string()), 2);
  EXPECT_EQ(run("verify --out " + dir.string()), 2);
}

TEST(CliVerify, CaseFileFromConstruct) {
  const auto dir = scratch("casefile");
  ASSERT_EQ(run("construct --mode oscillate --dim 10 --c1 8 --c2 16 --stages 1 --out " +
                (dir / "c").string()),
            0);
  ASSERT_EQ(run("verify --case-file " + (dir / "c" / "case.json").string() + " --out " +
                (dir / "v").string()),
            0);
  EXPECT_TRUE(load(dir / "v" / "report.json")["passed"].get<bool>());

  // Level 2(N-2) - 1 everywhere: admissible, but below the lower constant.
  ASSERT_EQ(run("construct --mode prescribed --dim 10 --psi shifted:1 --out " +
                (dir / "w").string()),
            0);
  EXPECT_EQ(run("verify --case-file " + (dir / "w" / "case.json").string() + " --out " +
                (dir / "wv").string()),
            5);
  const auto r = load(dir / "wv" / "report.json");
  EXPECT_FALSE(r["checks"]["windowed_lower"]["passed"].get<bool>());
  EXPECT_EQ(r["case"], "w");
  EXPECT_NEAR(r["checks"]["windowed_lower"]["margin"].get<double>(), -1.0, 1e-12);
}

TEST(CliReproducibility, ByteIdenticalOutputs) {
  const auto dir = scratch("repro");
  for (const std::string cmd :
       {"linsolve --dim 12 --potential window:0.1,0.3 --probe 0.2 --seed 7",
        "construct --mode oscillate --dim 10 --c1 8 --c2 16 --stages 1",
        "verify --case hardy12"}) {
    ASSERT_EQ(run(cmd + " --out " + (dir / "a").string()), 0) << cmd;
    ASSERT_EQ(run(cmd + " --out " + (dir / "b").string()), 0) << cmd;
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(dir / "a")) {
      ++files;
      EXPECT_EQ(slurp(e.path()), slurp(dir / "b" / e.path().filename())) << cmd << " " << e.path();
    }
    EXPECT_GE(files, 2u);
    fs::remove_all(dir / "a");
    fs::remove_all(dir / "b");
  }
}

TEST(CliManifest, EveryOutputCarriesHashAndVersions) {
  const auto dir = scratch("manifest");
  ASSERT_EQ(run("construct --mode oscillate --dim 10 --c1 8 --c2 16 --stages 1 --out " + dir.string()),
            0);
  const auto m = load(dir / "manifest.json");
  const std::string hash = m["config_hash"];
  EXPECT_EQ(m["versions"].size(), 7u);
  for (const auto& entry : m["outputs"]) {
    const std::string name = entry["file"];
    const std::string text = slurp(dir / name);
    EXPECT_EQ(entry["fnv1a"], extremal::io::fnv1a(text)) << name;
    if (name.ends_with(".json")) {
      const auto j = Json::parse(text);
      EXPECT_EQ(j["meta"]["config_hash"], hash) << name;
      EXPECT_EQ(j["meta"]["versions"], m["versions"]) << name;
    } else {
      EXPECT_NE(text.find("config_hash=" + hash), std::string::npos) << name;
    }
  }
}

TEST(Io, FnvReferenceVectors) {
  EXPECT_EQ(extremal::io::fnv1a(""), "cbf29ce484222325");
  EXPECT_EQ(extremal::io::fnv1a("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(extremal::io::fnv1a("foobar"), "85944171f73967e8");
}

TEST(Io, NumbersKeepSeventeenDigits) {
  using extremal::Scaled;
  using extremal::io::format_number;
  using extremal::io::format_scaled;
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_EQ(format_scaled(Scaled(2.5)), "2.5");
  EXPECT_EQ(format_scaled(Scaled(0.0)), "0");
  // e^{2000} = 10^{868.588963806503...}
  const std::string big = format_scaled(Scaled::from_log(2000.0));
  EXPECT_EQ(big.substr(big.find('e')), "e+868");
  EXPECT_NEAR(std::stod(big.substr(0, big.find('e'))), std::pow(10.0, 2000.0 / std::log(10.0) - 868), 1e-12);
  const std::string tiny = format_scaled(Scaled::from_log(-2000.0, -1));
  EXPECT_EQ(tiny.front(), '-');
  EXPECT_EQ(tiny.substr(tiny.find('e')), "e-869");
}

TEST(Io, PotentialJsonRoundTrip) {
  using namespace extremal;
  const auto osc = build_oscillatory(PhiTarget{2.0, 1.0}, 10, 1);
  const std::vector<PotentialSpec> cases{
      zero_potential(10),        borderline_potential(11),   hardy_potential(12),
      shifted_potential(10, 1.5), window_potential(0.25, 0.5, 10),
      steps_potential(10, {-3.0, -1.0}, {4.0, 16.0, 2.0}), osc.potential,
      blend(8.0, 16.0, osc.potential, 10)};
  for (const auto& psi : cases) {
    const auto back = io::potential_from_json(Json::parse(io::potential_to_json(psi).dump()));
    EXPECT_EQ(back.tag(), psi.tag());
    EXPECT_EQ(back.dim(), psi.dim());
    for (double t : {-0.1, -0.7, -1.5, -2.9, -3.5, -12.0})
      for (Side side : {Side::Below, Side::Above})
        EXPECT_EQ(back.level(t, side), psi.level(t, side)) << psi.tag() << " t=" << t;
  }
  auto j = io::potential_to_json(osc.potential);
  j["schedule"]["stages"][0]["t_y"] = -5.0;
  EXPECT_THROW(io::potential_from_json(j), PreconditionError);
  EXPECT_THROW(io::potential_from_json(Json{{"kind", "mystery"}, {"dim", 10}}), PreconditionError);
  EXPECT_THROW(io::potential_from_json(Json{{"kind", "shifted"}, {"dim", 10}}), PreconditionError);
}

TEST(Io, ParsePotentialStrings) {
  using namespace extremal;
  EXPECT_EQ(io::parse_potential("borderline", 10).level(-1.0, Side::Below), 16.0);
  EXPECT_EQ(io::parse_potential("shifted:1", 10).level(-1.0, Side::Below), 15.0);
  const auto w = io::parse_potential("window:0.25,0.5", 10);
  EXPECT_EQ(w.level(std::log(0.3), Side::Below), 16.0);
  EXPECT_EQ(w.level(std::log(0.7), Side::Below), 0.0);
  EXPECT_THROW(io::parse_potential("window:0.25", 10), PreconditionError);
  EXPECT_THROW(io::parse_potential("shifted:1x", 10), PreconditionError);
  EXPECT_THROW(io::parse_potential("table:/nonexistent/file.json", 10), PreconditionError);
  const auto dir = scratch("parse");
  write(dir / "h.json", hardy_table(12));
  EXPECT_EQ(io::parse_potential("table:" + (dir / "h.json").string(), 12).level(-50.0, Side::Below), 25.0);
  EXPECT_THROW(io::parse_potential("table:" + (dir / "h.json").string(), 10), PreconditionError);
}
