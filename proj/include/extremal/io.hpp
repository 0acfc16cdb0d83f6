#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "extremal/branch.hpp"
#include "extremal/error.hpp"
#include "extremal/oscillatory.hpp"
#include "extremal/potentials.hpp"
#include "extremal/profile.hpp"
#include "extremal/reconstruction.hpp"
#include "extremal/scaled.hpp"
#include "extremal/verification.hpp"

namespace extremal::io {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";

inline Json module_versions() {
  Json v;
  for (const char* m : {"radial_core", "linear_ode", "potentials", "reconstruction",
                        "branch", "verification", "cli_report"})
    v[m] = kVersion;
  return v;
}

/// 64-bit FNV-1a, as 16 hex digits.
inline std::string fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// 17 significant digits.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// 17 significant digits; values outside double range are written in
/// decimal scientific form from their logarithm.
inline std::string format_scaled(const Scaled& x) {
  if (x.is_zero()) return "0";
  const double l = x.log_abs();
  if (l > -700.0 && l < 700.0) return format_number(x.value());
  const double l10 = l / std::log(10.0);
  double e = std::floor(l10);
  double m = std::pow(10.0, l10 - e);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16f", m);
  if (buf[0] == '1' && buf[1] == '0') {  // rounded up to 10
    e += 1.0;
    m /= 10.0;
    std::snprintf(buf, sizeof buf, "%.16f", m);
  }
  std::ostringstream out;
  if (x.sign() < 0) out << '-';
  out << buf << 'e' << (e >= 0 ? "+" : "") << static_cast<long long>(e);
  return out.str();
}

/// Identifies the producing run in every output file.
struct Stamp {
  std::string config_hash;
  std::string version = kVersion;
  std::string comment() const {
    return "# extremal " + version + " config_hash=" + config_hash + "\n";
  }
};

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PreconditionError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw PreconditionError("failed writing " + path);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PreconditionError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline Json read_json(const std::string& path) {
  try {
    return Json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError("malformed JSON in " + path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// CSV

inline std::string profile_csv(const RadialProfile& p, const std::string& name,
                               const Stamp& stamp) {
  std::string out = stamp.comment() + "t,r," + name + "\n";
  const auto& g = p.grid();
  for (std::size_t i = 0; i < g.size(); ++i) {
    out += format_number(g[i]) + ',' + format_scaled(Scaled::from_log(g[i])) + ',' +
           format_scaled(p.scaled(i)) + '\n';
  }
  return out;
}

inline std::string table_csv(const NonlinearityTable& f, const Stamp& stamp) {
  std::string out = stamp.comment() + "s,f,fprime,fsecond,t\n";
  for (std::size_t j = 0; j < f.size(); ++j) {
    const auto t = f.t(j);
    out += format_number(f.s(j)) + ',' + format_scaled(f.f(j)) + ',' +
           format_scaled(f.fprime(j)) + ',' + format_scaled(f.fsecond(j)) + ',' +
           (t ? format_number(*t) : std::string()) + '\n';
  }
  return out;
}

inline std::string branch_csv(const BranchDiagram& d, const Stamp& stamp) {
  std::string out = stamp.comment() + "m,R,lambda\n";
  for (const auto& p : d.points)
    out += format_number(p.m) + ',' + format_number(p.R) + ',' + format_number(p.lambda) + '\n';
  return out;
}

inline std::string windows_csv(const VerificationReport& r, const Stamp& stamp) {
  std::string out = stamp.comment() + "t0,t1,sup,inf\n";
  for (const auto& w : r.windows)
    out += format_number(w.t0) + ',' + format_number(w.t1) + ',' + format_number(w.sup) +
           ',' + format_number(w.inf) + '\n';
  return out;
}

// ---------------------------------------------------------------------------
// JSON

inline Json phi_to_json(const PhiTarget& phi) {
  return Json{{"exponent", phi.exponent}, {"scale", phi.scale}};
}

inline Json schedule_to_json(const OscillationSchedule& s) {
  Json stages = Json::array();
  for (std::size_t k = 0; k < s.stages.size(); ++k) {
    const auto& st = s.stages[k];
    stages.push_back(Json{{"n", k + 1},
                          {"t_x", st.tx},
                          {"t_g", st.tg},
                          {"t_y", st.ty},
                          {"x", std::exp(st.tx)},
                          {"y", std::exp(st.ty)},
                          {"level_at_y", st.level_y},
                          {"log_level_at_y", st.log_level_y}});
  }
  return Json{{"dim", s.dim}, {"phi", phi_to_json(s.phi)}, {"stages", stages},
              {"t_x_next", s.tx_next}};
}

inline Json potential_to_json(const PotentialSpec& psi) {
  Json j{{"kind", psi.tag()}, {"dim", psi.dim()}};
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, form::Shifted>) {
          j["epsilon"] = f.epsilon;
        } else if constexpr (std::is_same_v<T, form::Window>) {
          j["a"] = f.a;
          j["b"] = f.b;
        } else if constexpr (std::is_same_v<T, form::Steps>) {
          j["edges"] = f.edges;
          j["levels"] = f.levels;
        } else if constexpr (std::is_same_v<T, form::Oscillatory>) {
          j["phi"] = phi_to_json(f.schedule.phi);
          j["stages"] = f.schedule.stages.size();
          j["schedule"] = schedule_to_json(f.schedule);
        } else if constexpr (std::is_same_v<T, form::Blend>) {
          j["c1"] = f.c1;
          j["c2"] = f.c2;
          j["inner"] = potential_to_json(*f.inner);
        } else if constexpr (std::is_same_v<T, form::Table>) {
          std::vector<double> t, c;
          const auto& g = f.levels->grid();
          for (std::size_t i = 0; i < g.size(); ++i) {
            t.push_back(g[i]);
            c.push_back(f.levels->value(i));
          }
          j["t"] = t;
          j["level"] = c;
        }
      },
      psi.form());
  return j;
}

namespace detail {

template <class T>
T field(const Json& j, const char* key) {
  if (!j.contains(key)) throw PreconditionError(std::string("potential JSON lacks \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw PreconditionError(std::string("potential JSON field \"") + key + "\" has the wrong type");
  }
}

}  // namespace detail

/// Inverse of potential_to_json. Oscillatory potentials are rebuilt from
/// (φ, N, stages) and must reproduce the stored schedule.
inline PotentialSpec potential_from_json(const Json& j) {
  if (!j.is_object()) throw PreconditionError("potential JSON must be an object");
  const auto kind = detail::field<std::string>(j, "kind");
  const int dim = detail::field<int>(j, "dim");
  if (kind == "zero") return zero_potential(dim);
  if (kind == "borderline") return borderline_potential(dim);
  if (kind == "hardy") return hardy_potential(dim);
  if (kind == "shifted") return shifted_potential(dim, detail::field<double>(j, "epsilon"));
  if (kind == "window")
    return window_potential(detail::field<double>(j, "a"), detail::field<double>(j, "b"), dim);
  if (kind == "steps")
    return steps_potential(dim, detail::field<std::vector<double>>(j, "edges"),
                           detail::field<std::vector<double>>(j, "levels"));
  if (kind == "oscillatory") {
    const auto phi_j = detail::field<Json>(j, "phi");
    const PhiTarget phi{detail::field<double>(phi_j, "exponent"),
                        detail::field<double>(phi_j, "scale")};
    auto build = build_oscillatory(phi, dim, detail::field<int>(j, "stages"));
    if (j.contains("schedule")) {
      const auto& stored = j.at("schedule").at("stages");
      const auto& st = build.schedule.stages;
      bool same = stored.size() == st.size();
      for (std::size_t k = 0; same && k < st.size(); ++k)
        same = stored[k].at("t_x").get<double>() == st[k].tx &&
               stored[k].at("t_y").get<double>() == st[k].ty;
      if (!same)
        throw PreconditionError("stored schedule differs from the rebuilt one");
    }
    return std::move(build.potential);
  }
  if (kind == "blend")
    return blend(detail::field<double>(j, "c1"), detail::field<double>(j, "c2"),
                 potential_from_json(detail::field<Json>(j, "inner")), dim);
  if (kind == "table") {
    auto t = detail::field<std::vector<double>>(j, "t");
    auto c = detail::field<std::vector<double>>(j, "level");
    if (t.size() != c.size() || t.size() < 2)
      throw PreconditionError("table potential needs matching t and level arrays (>= 2 entries)");
    const LogRadialGrid grid(dim, std::move(t), {});
    return table_potential(RadialProfile(grid, std::move(c)));
  }
  throw PreconditionError("unknown potential kind \"" + kind + "\"");
}

/// "zero", "borderline", "hardy", "shifted:EPS", "window:A,B", "table:FILE".
inline PotentialSpec parse_potential(const std::string& recipe, int dim) {
  const auto colon = recipe.find(':');
  const std::string head = recipe.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : recipe.substr(colon + 1);
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size())
      throw PreconditionError("bad number \"" + s + "\" in potential \"" + recipe + "\"");
    return v;
  };
  if (head == "zero") return zero_potential(dim);
  if (head == "borderline") return borderline_potential(dim);
  if (head == "hardy") return hardy_potential(dim);
  if (head == "shifted") return shifted_potential(dim, number(rest));
  if (head == "window") {
    const auto comma = rest.find(',');
    if (comma == std::string::npos)
      throw PreconditionError("window potential needs A,B");
    return window_potential(number(rest.substr(0, comma)), number(rest.substr(comma + 1)), dim);
  }
  if (head == "table") {
    auto j = read_json(rest);
    if (!j.contains("kind")) j["kind"] = "table";
    if (!j.contains("dim")) j["dim"] = dim;
    auto psi = potential_from_json(j);
    if (psi.dim() != dim)
      throw PreconditionError("potential file dimension " + std::to_string(psi.dim()) +
                              " differs from --dim " + std::to_string(dim));
    return psi;
  }
  throw PreconditionError("unknown potential \"" + recipe + "\"");
}

inline Json audit_to_json(const AuditReport& a) {
  Json j{{"positive", a.positive},       {"monotone", a.monotone},
         {"convex", a.convex},           {"superlinear", a.superlinear},
         {"passed", a.passed()},         {"growth_ratio", a.growth_ratio}};
  j["first_violation"] = a.first_violation ? Json(*a.first_violation) : Json(nullptr);
  j["failing_flag"] = a.failing_flag.empty() ? Json(nullptr) : Json(a.failing_flag);
  return j;
}

inline Json report_to_json(const VerificationReport& r) {
  Json windows = Json::array();
  for (const auto& w : r.windows)
    windows.push_back(Json{{"t0", w.t0}, {"t1", w.t1}, {"sup", w.sup}, {"inf", w.inf}});
  return Json{{"case", r.case_id},
              {"dim", r.dim},
              {"lambda_star", r.lambda_star},
              {"constants",
               {{"lower", r.lower_constant}, {"upper", r.upper_constant}, {"hardy", r.hardy_constant}}},
              {"checks",
               {{"pointwise_upper", {{"passed", r.pointwise_upper.passed},
                                     {"margin", r.pointwise_upper.margin}}},
                {"windowed_lower", {{"passed", r.windowed_lower.passed},
                                    {"margin", r.windowed_lower.margin}}}}},
              {"max_level", r.max_level},
              {"grid", {{"t_min", r.t_min}, {"nodes", r.nodes}}},
              {"window", {{"width", r.window}, {"depth", r.depth}}},
              {"windows", windows}};
}

/// Stable text form: two-space indent, insertion order, trailing newline.
inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace extremal::io
