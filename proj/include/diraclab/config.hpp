#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "diraclab/csv.hpp"
#include "diraclab/errors.hpp"
#include "diraclab/model.hpp"
#include "diraclab/solver.hpp"

namespace diraclab {

// Flat sectioned key-value config text:
//   [grid] [solver] [model.N] [schedule] [psi] [ic] / [ic.N] [hj] [sweep] [output]
// '#' and ';' start comments; keys are `name = value`. Parsing keeps line
// numbers so that validation can point at the offending entry.

struct ConfigEntry {
  std::string value;
  int line = 0;
};

struct ParsedConfig {
  std::map<std::string, std::map<std::string, ConfigEntry>> sections;

  bool has(const std::string& sec) const { return sections.count(sec) > 0; }
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline double parse_double(const std::string& raw, const std::string& where, int line) {
  std::string s = trim(raw);
  const char* b = s.data();
  const char* e = b + s.size();
  double v = 0.0;
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e)
    throw ConfigError(where + " (line " + std::to_string(line) + "): not a number: '" + s + "'");
  return v;
}

inline long parse_int(const std::string& raw, const std::string& where, int line) {
  std::string s = trim(raw);
  const char* b = s.data();
  const char* e = b + s.size();
  long v = 0;
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e)
    throw ConfigError(where + " (line " + std::to_string(line) + "): not an integer: '" + s + "'");
  return v;
}

}  // namespace detail

inline ParsedConfig parse_config_text(const std::string& text) {
  ParsedConfig pc;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    std::string s = detail::trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw ConfigError("config line " + std::to_string(line_no) + ": unterminated section header");
      section = detail::trim(s.substr(1, s.size() - 2));
      if (section.empty())
        throw ConfigError("config line " + std::to_string(line_no) + ": empty section name");
      if (pc.sections.count(section))
        throw ConfigError("config line " + std::to_string(line_no) + ": duplicate section [" +
                          section + "]");
      pc.sections[section];
      continue;
    }
    std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    if (section.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": key outside any section");
    std::string key = detail::trim(s.substr(0, eq));
    std::string value = detail::trim(s.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    auto& sec = pc.sections[section];
    if (sec.count(key))
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key +
                        "' in [" + section + "]");
    sec[key] = {value, line_no};
  }
  return pc;
}

// Override "section.key=value"; the rightmost dot before '=' splits the key,
// so `model.1.r=0.5` targets key r of section model.1.
inline void apply_override(ParsedConfig& pc, const std::string& entry) {
  std::size_t eq = entry.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + entry + "': expected key=value");
  std::string path = detail::trim(entry.substr(0, eq));
  std::string value = detail::trim(entry.substr(eq + 1));
  std::size_t dot = path.rfind('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == path.size())
    throw ConfigError("override '" + entry + "': expected section.key=value");
  pc.sections[path.substr(0, dot)][path.substr(dot + 1)] = {value, 0};
}

struct HJConfig {
  std::optional<double> x0, M0, t_end;
  double dt = 1e-3;
  std::optional<ConcavityConstants> constants;
};

struct OutputConfig {
  std::string dir;  // empty = resolved by the caller (flag, env, cwd)
  std::string trajectory = "trajectory.csv";
  std::string snapshots = "snapshots.csv";
  std::string hj_trajectory = "hj_trajectory.csv";
  std::string hj_bounds = "hj_bounds.json";
  std::string sweep = "sweep.csv";
  bool deterministic = true;
};

struct RunConfig {
  TraitGrid grid = TraitGrid::from_step(-3.0, 3.0, 1e-3);
  double eps = 1e-3;
  double dt = 1e-4;
  double t_end = 10.0;
  int snapshot_stride = 0;
  double density_floor = 0.0;
  double u_floor = -2.0;
  std::optional<double> I_M_cap;

  std::vector<GrowthModel> models;
  EnvironmentSchedule schedule = EnvironmentSchedule::single(0);
  ConsumptionWeight psi = ConsumptionWeight::constant(1.0);
  InitialCondition ic = InitialCondition::gaussian(0.0, 0.2);

  HJConfig hj;
  std::vector<double> sweep_values;
  OutputConfig output;

  SolverConfig solver_config() const {
    SolverConfig sc;
    sc.eps = eps;
    sc.dt = dt;
    sc.t_end = t_end;
    sc.grid = grid;
    sc.snapshot_stride = snapshot_stride;
    sc.density_floor = density_floor;
    sc.u_floor = u_floor;
    return sc;
  }

  void validate() const {
    solver_config().validate();
    if (models.empty()) throw ConfigError("[model.1]: at least one model is required");
    if (schedule.max_model_index() >= static_cast<int>(models.size()))
      throw ConfigError("[schedule].segments: model index out of range");
    psi.bounds_on(grid);
    for (const GrowthModel& m : models) {
      GrowthBounds b = GrowthBounds::derive(m, grid, I_M_cap);
      if (dt * b.K0 / eps >= 1.0)
        throw ConfigError("[solver].dt: dt*K0/eps >= 1 violates the stability precondition");
    }
    for (const auto& comp : ic.components()) {
      bool outside = comp.kind == InitialCondition::Kind::Box
                         ? (comp.c < grid.x_min || comp.b > grid.x_max)
                         : (comp.center < grid.x_min || comp.center > grid.x_max);
      if (outside) throw ConfigError("[ic]: support lies outside the trait domain");
    }
    if (hj.constants) hj.constants->validate();
    for (double v : sweep_values)
      if (!(v > 0.0)) throw ConfigError("[sweep].values: periods must be > 0");
  }
};

namespace detail {

class SectionReader {
 public:
  SectionReader(const ParsedConfig& pc, std::string name) : name_(std::move(name)) {
    auto it = pc.sections.find(name_);
    if (it != pc.sections.end()) sec_ = &it->second;
  }

  bool present() const { return sec_ != nullptr; }

  std::optional<std::string> raw(const std::string& key) {
    if (!sec_) return std::nullopt;
    auto it = sec_->find(key);
    if (it == sec_->end()) return std::nullopt;
    seen_.insert(key);
    return it->second.value;
  }

  int line(const std::string& key) const {
    auto it = sec_->find(key);
    return it == sec_->end() ? 0 : it->second.line;
  }

  double number(const std::string& key, double fallback) {
    auto v = raw(key);
    if (!v) return fallback;
    return parse_double(*v, where(key), line(key));
  }

  std::optional<double> number_opt(const std::string& key) {
    auto v = raw(key);
    if (!v) return std::nullopt;
    return parse_double(*v, where(key), line(key));
  }

  double number_required(const std::string& key) {
    auto v = raw(key);
    if (!v) throw ConfigError(where(key) + ": missing required key");
    return parse_double(*v, where(key), line(key));
  }

  long integer(const std::string& key, long fallback) {
    auto v = raw(key);
    if (!v) return fallback;
    return parse_int(*v, where(key), line(key));
  }

  std::string text(const std::string& key, const std::string& fallback) {
    auto v = raw(key);
    return v ? *v : fallback;
  }

  std::string text_required(const std::string& key) {
    auto v = raw(key);
    if (!v) throw ConfigError(where(key) + ": missing required key");
    return *v;
  }

  bool boolean(const std::string& key, bool fallback) {
    auto v = raw(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1") return true;
    if (*v == "false" || *v == "0") return false;
    throw ConfigError(where(key) + " (line " + std::to_string(line(key)) +
                      "): expected true or false");
  }

  std::string where(const std::string& key) const { return "[" + name_ + "]." + key; }

  void reject_unknown() const {
    if (!sec_) return;
    for (const auto& [key, entry] : *sec_)
      if (!seen_.count(key))
        throw ConfigError("[" + name_ + "]." + key + " (line " + std::to_string(entry.line) +
                          "): unknown key");
  }

 private:
  std::string name_;
  const std::map<std::string, ConfigEntry>* sec_ = nullptr;
  std::set<std::string> seen_;
};

inline std::vector<double> parse_number_list(const std::string& raw, const std::string& where,
                                             int line) {
  std::vector<double> out;
  for (const std::string& tok : split(raw, ',')) {
    if (tok.empty()) continue;
    out.push_back(parse_double(tok, where, line));
  }
  if (out.empty()) throw ConfigError(where + ": empty list");
  return out;
}

inline GrowthModel parse_model(const ParsedConfig& pc, const std::string& section) {
  SectionReader r(pc, section);
  std::string form = r.text_required("form");
  GrowthModel m = GrowthModel::quadratic(1.0, 1.0, 0.0);
  if (form == "quadratic") {
    double rr = r.number_required("r");
    double g = r.number_required("g");
    double theta = r.number_required("theta");
    m = GrowthModel::quadratic(rr, g, theta);
  } else if (form == "polynomial") {
    auto coeffs = parse_number_list(r.text_required("coeffs"), r.where("coeffs"), r.line("coeffs"));
    m = GrowthModel::polynomial(Polynomial(coeffs));
  } else {
    throw ConfigError(r.where("form") + ": expected quadratic or polynomial");
  }
  r.reject_unknown();
  return m;
}

inline InitialCondition::Component parse_ic_component(const ParsedConfig& pc,
                                                      const std::string& section) {
  SectionReader r(pc, section);
  InitialCondition::Component comp;
  std::string kind = r.text_required("kind");
  std::string mass = r.text_required("mass");
  if (mass == "eps" || mass == "epsilon") {
    comp.mass = 1.0;
    comp.mass_is_epsilon = true;
  } else {
    comp.mass = parse_double(mass, r.where("mass"), r.line("mass"));
  }
  if (kind == "box") {
    comp.kind = InitialCondition::Kind::Box;
    comp.b = r.number_required("b");
    comp.c = r.number_required("c");
  } else if (kind == "gaussian") {
    comp.kind = InitialCondition::Kind::Gaussian;
    comp.center = r.number_required("center");
  } else if (kind == "ground_state_gaussian") {
    comp.kind = InitialCondition::Kind::GroundStateGaussian;
    comp.center = r.number_required("center");
    comp.g = r.number_required("g");
  } else {
    throw ConfigError(r.where("kind") + ": expected box, gaussian or ground_state_gaussian");
  }
  r.reject_unknown();
  return comp;
}

inline std::vector<std::string> numbered_sections(const ParsedConfig& pc,
                                                  const std::string& prefix) {
  std::vector<std::pair<long, std::string>> found;
  for (const auto& [name, _] : pc.sections) {
    if (name.rfind(prefix + ".", 0) == 0) {
      std::string tail = name.substr(prefix.size() + 1);
      long idx = parse_int(tail, "section [" + name + "]", 0);
      found.emplace_back(idx, name);
    }
  }
  std::sort(found.begin(), found.end());
  std::vector<std::string> out;
  for (std::size_t i = 0; i < found.size(); ++i) {
    if (found[i].first != static_cast<long>(i) + 1)
      throw ConfigError("sections [" + prefix + ".N] must be numbered 1.." +
                        std::to_string(found.size()) + " without gaps");
    out.push_back(found[i].second);
  }
  return out;
}

}  // namespace detail

inline RunConfig build_run_config(const ParsedConfig& pc) {
  for (const auto& [name, _] : pc.sections) {
    bool known = name == "grid" || name == "solver" || name == "schedule" || name == "psi" ||
                 name == "ic" || name == "hj" || name == "sweep" || name == "output" ||
                 name.rfind("model.", 0) == 0 || name.rfind("ic.", 0) == 0;
    if (!known) throw ConfigError("unknown section [" + name + "]");
  }

  RunConfig rc;

  {
    detail::SectionReader r(pc, "grid");
    double x_min = r.number("x_min", -3.0);
    double x_max = r.number("x_max", 3.0);
    auto dx = r.number_opt("dx");
    long n_points = r.integer("n_points", 0);
    if (dx && n_points > 0)
      throw ConfigError("[grid]: give either dx or n_points, not both");
    rc.grid = n_points > 0 ? TraitGrid::from_points(x_min, x_max, static_cast<int>(n_points))
                           : TraitGrid::from_step(x_min, x_max, dx.value_or(1e-3));
    r.reject_unknown();
  }

  {
    detail::SectionReader r(pc, "solver");
    rc.eps = r.number("epsilon", 1e-3);
    rc.dt = r.number("dt", 1e-4);
    rc.t_end = r.number_required("t_end");
    rc.snapshot_stride = static_cast<int>(r.integer("snapshot_stride", 0));
    rc.density_floor = r.number("density_floor", 0.0);
    rc.u_floor = r.number("u_floor", -2.0);
    rc.I_M_cap = r.number_opt("i_m_cap");
    r.reject_unknown();
  }

  {
    auto names = detail::numbered_sections(pc, "model");
    if (names.empty()) throw ConfigError("[model.1]: at least one model section is required");
    for (const std::string& name : names) rc.models.push_back(detail::parse_model(pc, name));
  }

  if (pc.has("schedule")) {
    detail::SectionReader r(pc, "schedule");
    std::string segs = r.text_required("segments");
    std::vector<EnvironmentSchedule::Segment> segments;
    for (const std::string& tok : detail::split(segs, ',')) {
      if (tok.empty()) continue;
      auto parts = detail::split(tok, ':');
      if (parts.size() != 2)
        throw ConfigError(r.where("segments") + ": expected 't:model' pairs");
      double t = detail::parse_double(parts[0], r.where("segments"), r.line("segments"));
      long id = detail::parse_int(parts[1], r.where("segments"), r.line("segments"));
      if (id < 1 || id > static_cast<long>(rc.models.size()))
        throw ConfigError(r.where("segments") + ": model id " + std::to_string(id) +
                          " out of range");
      segments.push_back({t, static_cast<int>(id - 1)});
    }
    auto period = r.number_opt("period");
    rc.schedule = EnvironmentSchedule::piecewise(segments, period);
    r.reject_unknown();
  } else {
    if (rc.models.size() > 1)
      throw ConfigError("[schedule]: required when more than one model is given");
    rc.schedule = EnvironmentSchedule::single(0);
  }

  if (pc.has("psi")) {
    detail::SectionReader r(pc, "psi");
    std::string kind = r.text("kind", "constant");
    if (kind == "constant") {
      rc.psi = ConsumptionWeight::constant(r.number("value", 1.0));
    } else if (kind == "polynomial") {
      auto coeffs = detail::parse_number_list(r.text_required("coeffs"), r.where("coeffs"),
                                              r.line("coeffs"));
      rc.psi = ConsumptionWeight::polynomial(Polynomial(coeffs));
    } else {
      throw ConfigError(r.where("kind") + ": expected constant or polynomial");
    }
    r.reject_unknown();
  }

  {
    auto names = detail::numbered_sections(pc, "ic");
    if (pc.has("ic") && !names.empty())
      throw ConfigError("[ic]: give either a single [ic] or numbered [ic.N], not both");
    std::vector<InitialCondition::Component> comps;
    if (pc.has("ic")) comps.push_back(detail::parse_ic_component(pc, "ic"));
    for (const std::string& name : names) comps.push_back(detail::parse_ic_component(pc, name));
    if (comps.empty()) throw ConfigError("[ic]: an initial condition is required");
    rc.ic = InitialCondition::mixture(std::move(comps));
  }

  if (pc.has("hj")) {
    detail::SectionReader r(pc, "hj");
    rc.hj.x0 = r.number_opt("x0");
    rc.hj.M0 = r.number_opt("m0");
    rc.hj.t_end = r.number_opt("t_end");
    rc.hj.dt = r.number("dt", 1e-3);
    auto k2l = r.number_opt("k2_lower");
    auto k2u = r.number_opt("k2_upper");
    auto l1l = r.number_opt("l1_lower");
    auto l1u = r.number_opt("l1_upper");
    int given = int(bool(k2l)) + int(bool(k2u)) + int(bool(l1l)) + int(bool(l1u));
    if (given != 0 && given != 4)
      throw ConfigError("[hj]: give all four concavity constants or none");
    if (given == 4) {
      ConcavityConstants cc{*k2l, *k2u, *l1l, *l1u};
      cc.validate();
      rc.hj.constants = cc;
    }
    r.reject_unknown();
  }

  if (pc.has("sweep")) {
    detail::SectionReader r(pc, "sweep");
    std::string param = r.text("param", "T");
    if (param != "T") throw ConfigError(r.where("param") + ": only T sweeps are supported");
    rc.sweep_values = detail::parse_number_list(r.text_required("values"), r.where("values"),
                                                r.line("values"));
    r.reject_unknown();
  }

  {
    detail::SectionReader r(pc, "output");
    rc.output.dir = r.text("dir", "");
    rc.output.trajectory = r.text("trajectory", "trajectory.csv");
    rc.output.snapshots = r.text("snapshots", "snapshots.csv");
    rc.output.hj_trajectory = r.text("hj_trajectory", "hj_trajectory.csv");
    rc.output.hj_bounds = r.text("hj_bounds", "hj_bounds.json");
    rc.output.sweep = r.text("sweep", "sweep.csv");
    rc.output.deterministic = r.boolean("deterministic", true);
    r.reject_unknown();
  }

  rc.validate();
  return rc;
}

inline RunConfig load_config(const std::string& text,
                             const std::vector<std::string>& overrides = {}) {
  ParsedConfig pc = parse_config_text(text);
  for (const std::string& o : overrides) apply_override(pc, o);
  return build_run_config(pc);
}

inline std::string serialize_config(const RunConfig& rc) {
  std::string out;
  auto kv = [&](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
  auto kvd = [&](const std::string& k, double v) { kv(k, format_double(v)); };

  out += "[grid]\n";
  kvd("x_min", rc.grid.x_min);
  kvd("x_max", rc.grid.x_max);
  kv("n_points", std::to_string(rc.grid.n_points));

  out += "\n[solver]\n";
  kvd("epsilon", rc.eps);
  kvd("dt", rc.dt);
  kvd("t_end", rc.t_end);
  kv("snapshot_stride", std::to_string(rc.snapshot_stride));
  kvd("density_floor", rc.density_floor);
  kvd("u_floor", rc.u_floor);
  if (rc.I_M_cap) kvd("i_m_cap", *rc.I_M_cap);

  for (std::size_t i = 0; i < rc.models.size(); ++i) {
    const GrowthModel& m = rc.models[i];
    out += "\n[model." + std::to_string(i + 1) + "]\n";
    if (m.form() == GrowthModel::Form::Quadratic) {
      kv("form", "quadratic");
      kvd("r", m.quad_r());
      kvd("g", m.quad_g());
      kvd("theta", m.quad_theta());
    } else {
      kv("form", "polynomial");
      std::string cs;
      for (std::size_t k = 0; k < m.a().coeffs().size(); ++k) {
        if (k) cs += ",";
        cs += format_double(m.a().coeffs()[k]);
      }
      kv("coeffs", cs);
    }
  }

  out += "\n[schedule]\n";
  {
    std::string segs;
    for (std::size_t i = 0; i < rc.schedule.segments().size(); ++i) {
      if (i) segs += ",";
      segs += format_double(rc.schedule.segments()[i].t_start) + ":" +
              std::to_string(rc.schedule.segments()[i].model + 1);
    }
    kv("segments", segs);
    if (rc.schedule.period()) kvd("period", *rc.schedule.period());
  }

  out += "\n[psi]\n";
  if (rc.psi.is_constant()) {
    kv("kind", "constant");
    kvd("value", rc.psi.constant_value());
  } else {
    kv("kind", "polynomial");
    std::string cs;
    for (std::size_t k = 0; k < rc.psi.poly().coeffs().size(); ++k) {
      if (k) cs += ",";
      cs += format_double(rc.psi.poly().coeffs()[k]);
    }
    kv("coeffs", cs);
  }

  const auto& comps = rc.ic.components();
  for (std::size_t i = 0; i < comps.size(); ++i) {
    out += comps.size() == 1 ? "\n[ic]\n" : "\n[ic." + std::to_string(i + 1) + "]\n";
    const auto& comp = comps[i];
    switch (comp.kind) {
      case InitialCondition::Kind::Box:
        kv("kind", "box");
        kvd("b", comp.b);
        kvd("c", comp.c);
        break;
      case InitialCondition::Kind::Gaussian:
        kv("kind", "gaussian");
        kvd("center", comp.center);
        break;
      case InitialCondition::Kind::GroundStateGaussian:
        kv("kind", "ground_state_gaussian");
        kvd("center", comp.center);
        kvd("g", comp.g);
        break;
    }
    kv("mass", comp.mass_is_epsilon ? std::string("eps") : format_double(comp.mass));
  }

  bool hj_any = rc.hj.x0 || rc.hj.M0 || rc.hj.t_end || rc.hj.constants || rc.hj.dt != 1e-3;
  if (hj_any) {
    out += "\n[hj]\n";
    if (rc.hj.x0) kvd("x0", *rc.hj.x0);
    if (rc.hj.M0) kvd("m0", *rc.hj.M0);
    if (rc.hj.t_end) kvd("t_end", *rc.hj.t_end);
    kvd("dt", rc.hj.dt);
    if (rc.hj.constants) {
      kvd("k2_lower", rc.hj.constants->K2_lower);
      kvd("k2_upper", rc.hj.constants->K2_upper);
      kvd("l1_lower", rc.hj.constants->L1_lower);
      kvd("l1_upper", rc.hj.constants->L1_upper);
    }
  }

  if (!rc.sweep_values.empty()) {
    out += "\n[sweep]\n";
    kv("param", "T");
    std::string vs;
    for (std::size_t i = 0; i < rc.sweep_values.size(); ++i) {
      if (i) vs += ",";
      vs += format_double(rc.sweep_values[i]);
    }
    kv("values", vs);
  }

  out += "\n[output]\n";
  if (!rc.output.dir.empty()) kv("dir", rc.output.dir);
  kv("trajectory", rc.output.trajectory);
  kv("snapshots", rc.output.snapshots);
  kv("hj_trajectory", rc.output.hj_trajectory);
  kv("hj_bounds", rc.output.hj_bounds);
  kv("sweep", rc.output.sweep);
  kv("deterministic", rc.output.deterministic ? "true" : "false");
  return out;
}

// Assembles and runs the PDE problem described by the config.
inline Trajectory simulate(const RunConfig& rc) {
  rc.validate();
  return run(rc.solver_config(), rc.models, rc.schedule, rc.psi, rc.ic);
}

}  // namespace diraclab
