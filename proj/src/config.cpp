#include "levitrap/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "config_json.hpp"

namespace levitrap {

using nlohmann::json;
using nlohmann::ordered_json;

ConfigError::ConfigError(const std::string& message, std::string field, int line)
    : std::runtime_error(message), field_(std::move(field)), line_(line) {}

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::TrapSweep: return "trap_sweep";
    case ExperimentKind::Sensitivity: return "sensitivity";
    case ExperimentKind::Casimir: return "casimir";
    case ExperimentKind::WireSweep: return "wire_sweep";
    case ExperimentKind::ReadoutDesign: return "readout_design";
  }
  return "?";
}

namespace {

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    out[i] = n == 1 ? lo : std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1));
  }
  if (n > 1) out.front() = lo, out.back() = hi;
  return out;
}

std::vector<double> linear_grid(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return out;
}

// Locates a JSON pointer in the source text by walking the quoted keys in
// order. Good enough for diagnostics; returns 0 when a key is not found.
int line_of(std::string_view text, const std::string& pointer) {
  std::size_t pos = 0;
  std::size_t start = 1;
  while (start <= pointer.size()) {
    std::size_t end = pointer.find('/', start);
    if (end == std::string::npos) end = pointer.size();
    const std::string key = pointer.substr(start, end - start);
    start = end + 1;
    if (key.empty() || std::isdigit(static_cast<unsigned char>(key[0]))) continue;
    const std::size_t hit = text.find("\"" + key + "\"", pos);
    if (hit == std::string_view::npos) return 0;
    pos = hit;
  }
  if (pointer.empty()) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + pos, '\n'));
}

class Section {
 public:
  Section(const json& j, std::string path, std::string_view text) : j_(j), path_(std::move(path)), text_(text) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  [[noreturn]] void fail(const std::string& field, const std::string& msg) const {
    throw ConfigError(msg, field.empty() ? "/" : field, line_of(text_, field));
  }

  std::string field(const std::string& key) const { return path_ + "/" + key; }

  const json* take(const std::string& key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  Section sub(const std::string& key) {
    static const json empty = json::object();
    const json* v = take(key);
    return Section(v ? *v : empty, field(key), text_);
  }

  void number(const std::string& key, double& out, double lo, double hi, bool open_lo = false) {
    const json* v = take(key);
    if (!v) return;
    if (!v->is_number()) fail(field(key), "expected a number");
    const double x = v->get<double>();
    const bool ok_lo = open_lo ? x > lo : x >= lo;
    if (!std::isfinite(x) || !ok_lo || x > hi) {
      fail(field(key), fmt::format("value {} outside {}{}, {}]", x, open_lo ? "(" : "[", lo, hi));
    }
    out = x;
  }

  void integer(const std::string& key, int& out, int lo, int hi) {
    const json* v = take(key);
    if (!v) return;
    if (!v->is_number_integer()) fail(field(key), "expected an integer");
    const auto x = v->get<long long>();
    if (x < lo || x > hi) fail(field(key), fmt::format("value {} outside [{}, {}]", x, lo, hi));
    out = static_cast<int>(x);
  }

  void boolean(const std::string& key, bool& out) {
    const json* v = take(key);
    if (!v) return;
    if (!v->is_boolean()) fail(field(key), "expected true or false");
    out = v->get<bool>();
  }

  void string(const std::string& key, std::string& out) {
    const json* v = take(key);
    if (!v) return;
    if (!v->is_string()) fail(field(key), "expected a string");
    out = v->get<std::string>();
  }

  template <class E>
  void choice(const std::string& key, E& out, std::initializer_list<std::pair<const char*, E>> options) {
    std::string s;
    string(key, s);
    if (s.empty() && !j_.contains(key)) return;
    std::string names;
    for (const auto& [name, value] : options) {
      if (s == name) {
        out = value;
        return;
      }
      names += names.empty() ? name : std::string(", ") + name;
    }
    fail(field(key), fmt::format("unknown value \"{}\" (expected one of: {})", s, names));
  }

  /// Optional non-negative rate where null means "derive it".
  void rate_or_null(const std::string& key, double& out) {
    const json* v = take(key);
    if (!v) return;
    if (v->is_null()) {
      out = -1.0;
      return;
    }
    if (!v->is_number() || !(v->get<double>() >= 0.0)) fail(field(key), "expected null or a number >= 0");
    out = v->get<double>();
  }

  /// Grid: explicit array, or {"min", "max", "points", "spacing"}.
  void grid(const std::string& key, std::vector<double>& out, double lo, double hi) {
    const json* v = take(key);
    if (!v) return;
    const std::string f = field(key);
    std::vector<double> values;
    if (v->is_array()) {
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_number()) fail(fmt::format("{}/{}", f, i), "expected a number");
        values.push_back((*v)[i].get<double>());
      }
    } else if (v->is_object()) {
      Section g(*v, f, text_);
      double a = 0, b = 0;
      int n = 0;
      std::string spacing = "log";
      if (!v->contains("min") || !v->contains("max") || !v->contains("points")) {
        fail(f, "grid needs min, max and points");
      }
      g.number("min", a, lo, hi);
      g.number("max", b, lo, hi);
      g.integer("points", n, 1, 100000);
      g.string("spacing", spacing);
      g.finish();
      if (b < a) fail(f + "/max", "max must be >= min");
      if (spacing == "log") {
        if (!(a > 0.0)) fail(f + "/min", "log spacing needs min > 0");
        values = log_grid(a, b, n);
      } else if (spacing == "linear") {
        values = linear_grid(a, b, n);
      } else {
        fail(f + "/spacing", "expected \"log\" or \"linear\"");
      }
    } else {
      fail(f, "expected an array or a grid object");
    }
    if (values.empty()) fail(f, "grid is empty");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i]) || values[i] < lo || values[i] > hi) {
        fail(fmt::format("{}/{}", f, i), fmt::format("value {} outside [{}, {}]", values[i], lo, hi));
      }
    }
    out = std::move(values);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) fail(field(key), fmt::format("unknown key \"{}\"", key));
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::string_view text_;
  std::set<std::string> used_;
};

constexpr double big = 1e300;

}  // namespace

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.trap_sweep.radii = log_grid(100e-9, 10e-3, 11);
  c.sensitivity.radii = log_grid(100e-9, 10e-3, 11);
  c.casimir.distances = linear_grid(11e-6, 60e-6, 50);
  c.wire_sweep.currents = linear_grid(0.0, 1e-6, 11);
  c.readout_design.radii = {0.1e-6, 1e-6, 10e-6, 100e-6, 1e-3, 10e-3};
  return c;
}

ExperimentConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end(), nullptr, true, false);
  } catch (const json::parse_error& e) {
    const std::size_t at = std::min<std::size_t>(e.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + at, '\n'));
    throw ConfigError(fmt::format("malformed JSON: {}", e.what()), "", line);
  }

  ExperimentConfig c = default_config();
  Section top(root, "", text);
  if (!root.contains("experiment")) top.fail("/experiment", "missing required key \"experiment\"");
  top.choice("experiment", c.kind,
             {{"trap_sweep", ExperimentKind::TrapSweep},
              {"sensitivity", ExperimentKind::Sensitivity},
              {"casimir", ExperimentKind::Casimir},
              {"wire_sweep", ExperimentKind::WireSweep},
              {"readout_design", ExperimentKind::ReadoutDesign}});
  top.string("output_dir", c.output_dir);
  if (c.output_dir.empty()) top.fail("/output_dir", "output directory must not be empty");
  top.integer("threads", c.threads, 0, 1024);

  {
    Section s = top.sub("magnet");
    MagnetSpec& m = c.trap.magnet;
    s.number("magnetization_a_per_m", m.magnetization_density, 0.0, big, true);
    s.number("mass_density_kg_per_m3", m.mass_density, 0.0, big, true);
    s.number("susceptibility", m.susceptibility, 0.0, big);
    s.number("conductivity_s_per_m", m.conductivity, 0.0, big);
    s.finish();
  }
  {
    Section s = top.sub("trap");
    s.number("gravity_m_per_s2", c.trap.gravity, 0.0, big, true);
    s.number("target_ratio", c.trap.target_ratio, 1.2, 50.0);
    s.number("fd_step", c.trap.fd_step, 1e-6, 0.05);
    s.choice("depth_method", c.trap.depth_method,
             {{"escape_path", DepthMethod::EscapePath}, {"axis_cuts", DepthMethod::AxisCuts}});
    s.finish();
  }
  {
    Section s = top.sub("sheet");
    ScGeometry& g = c.trap.sc;
    s.number("film_thickness_m", g.film_thickness, 0.0, big);
    s.number("pearl_length_m", g.pearl_length, 0.0, big);
    s.number("mesh_outer_cutoff", g.mesh_outer_cutoff, 10.0, 1e3);
    s.integer("mesh_node_count", g.mesh_node_count, 256, 200000);
    s.number("grading_exponent", g.grading_exponent, 1.0, 5.0);
    s.finish();
  }
  {
    Section s = top.sub("environment");
    Environment& e = c.noise.env;
    s.number("temperature_k", e.temperature, 0.0, big, true);
    s.number("pressure_pa", e.pressure, 0.0, big);
    s.number("molar_mass_kg_per_mol", e.molar_mass, 0.0, big, true);
    s.choice("thermal_speed", e.speed, {{"mean", ThermalSpeed::Mean}, {"rms", ThermalSpeed::Rms}});
    s.finish();
  }
  {
    Section s = top.sub("readout");
    SquidModel& q = c.noise.squid;
    s.number("squid_noise_phi0_per_rthz", q.base_noise, 0.0, big);
    s.number("squid_reference_side_m", q.reference_side, 0.0, big, true);
    s.number("squid_log_scale_m", q.log_scale, 0.0, big, true);
    s.finish();
    if (!(q.reference_side > q.log_scale)) {
      s.fail("/readout/squid_reference_side_m", "must exceed squid_log_scale_m");
    }
  }
  {
    Section s = top.sub("noise");
    NoiseOptions& n = c.noise;
    s.boolean("apply_hz_jacobian", n.apply_hz_jacobian);
    s.rate_or_null("gamma_alpha_per_s", n.gamma_alpha);
    s.rate_or_null("gamma_beta_per_s", n.gamma_beta);
    s.number("eval_fraction_small", n.fraction_small, 0.0, 1.0, true);
    s.number("eval_fraction_large", n.fraction_large, 0.0, 1.0, true);
    s.number("eval_fraction_switch_radius_m", n.fraction_switch_radius, 0.0, big, true);
    s.integer("hysteresis_order", n.hysteresis_order, 2, 128);
    s.finish();
  }

  const double r_lo = 10e-9, r_hi = 50e-3;
  const double table_lo = 0.1e-6 * (1 - 1e-9), table_hi = 1e-2 * (1 + 1e-9);
  {
    Section s = top.sub("trap_sweep");
    s.grid("radii_m", c.trap_sweep.radii, r_lo, r_hi);
    s.boolean("mesh_dump", c.trap_sweep.mesh_dump);
    s.finish();
  }
  {
    Section s = top.sub("sensitivity");
    s.grid("radii_m", c.sensitivity.radii, table_lo, table_hi);
    s.choice("axis", c.sensitivity.axis, {{"x", 0}, {"y", 1}, {"z", 2}});
    s.integer("spectrum_points", c.sensitivity.spectrum_points, 0, 100000);
    s.number("spectrum_min_ratio", c.sensitivity.spectrum_min_ratio, 0.0, big, true);
    s.number("spectrum_max_ratio", c.sensitivity.spectrum_max_ratio, 0.0, big, true);
    s.finish();
    if (!(c.sensitivity.spectrum_max_ratio > c.sensitivity.spectrum_min_ratio)) {
      s.fail("/sensitivity/spectrum_max_ratio", "must exceed spectrum_min_ratio");
    }
  }
  {
    Section s = top.sub("casimir");
    CasimirParams& p = c.casimir;
    s.number("radius_m", p.radius, r_lo, r_hi);
    s.number("resistivity_ohm_m", p.resistivity, 0.0, big, true);
    s.number("frequency_hz", p.frequency_hz, 0.0, big, true);
    s.number("threshold_n", p.threshold, 0.0, big, true);
    s.grid("distances_m", p.distances, 0.0, big);
    s.integer("quadrature_order", p.order, 8, 1024);
    s.finish();
    for (std::size_t i = 0; i < p.distances.size(); ++i) {
      if (p.distances[i] - p.radius < 1e-3 * p.radius) {
        s.fail(fmt::format("/casimir/distances_m/{}", i), "surface distance must exceed the radius");
      }
    }
  }
  {
    Section s = top.sub("wire_sweep");
    WireSweepParams& p = c.wire_sweep;
    s.number("radius_m", p.radius, r_lo, r_hi);
    s.number("wire_height_m", p.wire_height, 0.0, big, true);
    s.grid("currents_a", p.currents, -big, big);
    s.boolean("screened", p.screened);
    s.finish();
  }
  {
    Section s = top.sub("readout_design");
    s.grid("radii_m", c.readout_design.radii, table_lo, table_hi);
    s.boolean("include_sheet", c.readout_design.include_sheet);
    s.finish();
  }
  top.finish();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace detail {

ordered_json to_json(const ExperimentConfig& c) {
  auto rate = [](double g) { return g >= 0.0 ? ordered_json(g) : ordered_json(nullptr); };
  const MagnetSpec& m = c.trap.magnet;
  const ScGeometry& g = c.trap.sc;
  const NoiseOptions& n = c.noise;
  ordered_json j;
  j["experiment"] = to_string(c.kind);
  j["output_dir"] = c.output_dir;
  j["threads"] = c.threads;
  j["magnet"] = {{"magnetization_a_per_m", m.magnetization_density},
                 {"mass_density_kg_per_m3", m.mass_density},
                 {"susceptibility", m.susceptibility},
                 {"conductivity_s_per_m", m.conductivity}};
  j["trap"] = {{"gravity_m_per_s2", c.trap.gravity},
               {"target_ratio", c.trap.target_ratio},
               {"fd_step", c.trap.fd_step},
               {"depth_method", c.trap.depth_method == DepthMethod::EscapePath ? "escape_path" : "axis_cuts"}};
  j["sheet"] = {{"film_thickness_m", g.film_thickness},
                {"pearl_length_m", g.pearl_length},
                {"mesh_outer_cutoff", g.mesh_outer_cutoff},
                {"mesh_node_count", g.mesh_node_count},
                {"grading_exponent", g.grading_exponent}};
  j["environment"] = {{"temperature_k", n.env.temperature},
                      {"pressure_pa", n.env.pressure},
                      {"molar_mass_kg_per_mol", n.env.molar_mass},
                      {"thermal_speed", n.env.speed == ThermalSpeed::Mean ? "mean" : "rms"}};
  j["readout"] = {{"squid_noise_phi0_per_rthz", n.squid.base_noise},
                  {"squid_reference_side_m", n.squid.reference_side},
                  {"squid_log_scale_m", n.squid.log_scale}};
  j["noise"] = {{"apply_hz_jacobian", n.apply_hz_jacobian},
                {"gamma_alpha_per_s", rate(n.gamma_alpha)},
                {"gamma_beta_per_s", rate(n.gamma_beta)},
                {"eval_fraction_small", n.fraction_small},
                {"eval_fraction_large", n.fraction_large},
                {"eval_fraction_switch_radius_m", n.fraction_switch_radius},
                {"hysteresis_order", n.hysteresis_order}};
  j["trap_sweep"] = {{"radii_m", c.trap_sweep.radii}, {"mesh_dump", c.trap_sweep.mesh_dump}};
  j["sensitivity"] = {{"radii_m", c.sensitivity.radii},
                      {"axis", std::string(1, "xyz"[c.sensitivity.axis])},
                      {"spectrum_points", c.sensitivity.spectrum_points},
                      {"spectrum_min_ratio", c.sensitivity.spectrum_min_ratio},
                      {"spectrum_max_ratio", c.sensitivity.spectrum_max_ratio}};
  j["casimir"] = {{"radius_m", c.casimir.radius},
                  {"resistivity_ohm_m", c.casimir.resistivity},
                  {"frequency_hz", c.casimir.frequency_hz},
                  {"threshold_n", c.casimir.threshold},
                  {"distances_m", c.casimir.distances},
                  {"quadrature_order", c.casimir.order}};
  j["wire_sweep"] = {{"radius_m", c.wire_sweep.radius},
                     {"wire_height_m", c.wire_sweep.wire_height},
                     {"currents_a", c.wire_sweep.currents},
                     {"screened", c.wire_sweep.screened}};
  j["readout_design"] = {{"radii_m", c.readout_design.radii}, {"include_sheet", c.readout_design.include_sheet}};
  return j;
}

}  // namespace detail

std::string dump_config(const ExperimentConfig& cfg) { return detail::to_json(cfg).dump(2) + "\n"; }

std::string preset_config(std::string_view name) {
  if (name != "paper-sm5") throw ConfigError(fmt::format("unknown preset \"{}\" (available: paper-sm5)", name));
  // Nd2Fe14B at 1 K and 1e-10 mbar, z0/a = 1.8, tabulated readout.
  ExperimentConfig c = default_config();
  c.kind = ExperimentKind::Sensitivity;
  c.output_dir = "paper-sm5_out";
  return dump_config(c);
}

}  // namespace levitrap
