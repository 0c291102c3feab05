#include "levitrap/runner.hpp"

#include <cmath>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>

#include <fmt/format.h>

#include "config_json.hpp"
#include "levitrap/actuation.hpp"
#include "levitrap/constants.hpp"
#include "levitrap/error.hpp"
#include "levitrap/readout.hpp"
#include "levitrap/signals.hpp"
#include "parallel.hpp"

namespace levitrap {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

namespace {

constexpr double two_pi = 2.0 * constants::pi;

// Shortest round-trip representation; blank for missing values.
std::string num(double x) { return std::isfinite(x) ? fmt::format("{}", x) : std::string(); }

ordered_json jnum(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); }

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : width_(header.size()) { row(header); }

  void row(const std::vector<std::string>& fields) {
    if (fields.size() != width_) throw std::logic_error("csv row width mismatch");
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) text_ += ',';
      text_ += csv_field(fields[i]);
    }
    text_ += "\r\n";
  }

  void save(const fs::path& path, RunReport& report) const {
    std::ofstream out(path, std::ios::binary);
    out << text_;
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
    report.outputs.push_back(path);
  }

 private:
  std::size_t width_;
  std::string text_;
};

struct Context {
  const ExperimentConfig& cfg;
  std::ostream& log;
  fs::path dir;
  RunReport report;
  ordered_json results = ordered_json::object();
  std::mutex log_mutex;

  void note(const std::string& line) {
    std::lock_guard lock(log_mutex);
    log << line << '\n';
  }

  void warn(const std::string& what) { report.warnings.push_back(what); }
};

TrapConfig with_radius(const ExperimentConfig& cfg, double radius) {
  TrapConfig t = cfg.trap;
  t.magnet.radius = radius;
  return t;
}

// Equilibrium and curvatures without the escape-path search.
TrapCharacterization quick_trap(TrapConfig& t) {
  const Equilibrium eq = find_equilibrium(t);
  t.sc.hole_radius = eq.hole_radius;
  const TrapModel model(t);
  return model.characterize(model.equilibrium_height(eq.z0), false);
}

// Counts failures; returns the solver exit code when nothing succeeded.
void settle(Context& ctx, std::size_t failed, std::size_t total) {
  if (failed == 0) return;
  if (failed == total) {
    ctx.report.exit_code = exit_code::solver;
  } else {
    ctx.note(fmt::format("warning: {} of {} points failed", failed, total));
  }
}

void run_trap_sweep(Context& ctx) {
  const auto& p = ctx.cfg.trap_sweep;
  const std::size_t n = p.radii.size();
  struct Row {
    std::optional<TrapCharacterization> trap;
    double margin = NAN, screening = NAN, projection = NAN;
    std::string error;
  };
  std::vector<Row> rows(n);
  std::vector<std::vector<MeshNode>> meshes(n);

  detail::parallel_for(n, ctx.cfg.threads, [&](std::size_t i) {
    try {
      TrapConfig t = with_radius(ctx.cfg, p.radii[i]);
      const TrapCharacterization trap = characterize_trap(t);
      t.sc.hole_radius = trap.hole_radius;
      DipoleSource src;
      src.position = Vec3(0, 0, trap.z0);
      src.moment = t.magnet.moment();
      const SheetCurrentSolution sol = solve_sheet_current(t.sc, src);
      rows[i].screening = sol.screening_residual();
      rows[i].projection = sol.projection_residual();
      rows[i].margin = surface_field_margin(t, trap.z0);
      if (p.mesh_dump) meshes[i] = sol.mesh();
      rows[i].trap = trap;
      ctx.note(fmt::format("trap_sweep: R = {} m done", p.radii[i]));
    } catch (const std::exception& e) {
      rows[i].error = e.what();
    }
  });

  Csv csv({"radius_m", "hole_radius_m", "z0_m", "fx_hz", "fy_hz", "fz_hz", "fbeta_hz", "kappa_j_per_rad_m",
           "trap_depth_k", "surface_field_margin", "screening_residual", "projection_residual", "error"});
  std::vector<SweepRow> sweep;
  ordered_json points = ordered_json::array();
  std::size_t failed = 0;
  double worst_screening = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Row& r = rows[i];
    sweep.push_back({p.radii[i], r.trap, r.error});
    if (!r.trap) {
      ++failed;
      ctx.warn(fmt::format("radius {} m: {}", p.radii[i], r.error));
      csv.row({num(p.radii[i]), "", "", "", "", "", "", "", "", "", "", "", r.error});
      continue;
    }
    const auto& t = *r.trap;
    worst_screening = std::max(worst_screening, r.screening);
    csv.row({num(p.radii[i]), num(t.hole_radius), num(t.z0), num(t.omega_x / two_pi), num(t.omega_y / two_pi),
             num(t.omega_z / two_pi), num(t.omega_beta / two_pi), num(t.kappa), num(t.trap_depth_K),
             num(r.margin), num(r.screening), num(r.projection), ""});
    if (ctx.cfg.trap_sweep.mesh_dump) {
      Csv mesh({"r_m", "theta_rad", "g_a"});
      for (const auto& node : meshes[i]) mesh.row({num(node.r), num(node.theta), num(node.stream)});
      mesh.save(ctx.dir / fmt::format("mesh_{:03d}.csv", i), ctx.report);
    }
    points.push_back({{"radius_m", p.radii[i]},
                      {"z0_m", t.z0},
                      {"trap_depth_k", t.trap_depth_K},
                      {"screening_residual", jnum(r.screening)},
                      {"projection_residual", jnum(r.projection)}});
  }
  csv.save(ctx.dir / "trap_sweep.csv", ctx.report);

  const ScalingFit fit = scaling_exponents(sweep);
  ctx.results["points"] = points;
  ctx.results["max_screening_residual"] = worst_screening;
  ctx.results["scaling_exponents"] = {{"z0", jnum(fit.z0)},
                                      {"omega_x", jnum(fit.omega_x)},
                                      {"omega_y", jnum(fit.omega_y)},
                                      {"omega_z", jnum(fit.omega_z)},
                                      {"omega_beta", jnum(fit.omega_beta)},
                                      {"trap_depth", jnum(fit.trap_depth)}};
  settle(ctx, failed, n);
}

void run_sensitivity(Context& ctx) {
  const auto& p = ctx.cfg.sensitivity;
  const NoiseOptions& opt = ctx.cfg.noise;
  const int axis = p.axis;
  const std::size_t n = p.radii.size();
  struct Row {
    std::optional<TrapCharacterization> trap;
    ReadoutArray readout;
    SensitivityCurve point, spectrum;
    double inverse_residual = NAN;
    double mass = NAN;
    std::string error;
  };
  std::vector<Row> rows(n);

  detail::parallel_for(n, ctx.cfg.threads, [&](std::size_t i) {
    try {
      TrapConfig t = with_radius(ctx.cfg, p.radii[i]);
      const TrapCharacterization trap = quick_trap(t);
      const ReadoutArray readout = design_array(t.magnet.radius, trap.z0);
      const std::array<double, 3> wi = {trap.omega_x, trap.omega_y, trap.omega_z};
      const double w_eval = evaluation_fraction(opt, t.magnet.radius) * wi[axis];
      Row& r = rows[i];
      r.point = force_sensitivity(t.magnet, trap, readout, opt, {w_eval}, axis);
      if (p.spectrum_points > 0) {
        const double lo = std::log(p.spectrum_min_ratio * wi[axis]);
        const double hi = std::log(p.spectrum_max_ratio * wi[axis]);
        std::vector<double> ws(p.spectrum_points);
        for (int k = 0; k < p.spectrum_points; ++k) {
          ws[k] = std::exp(p.spectrum_points == 1 ? lo : lo + (hi - lo) * k / (p.spectrum_points - 1));
        }
        r.spectrum = force_sensitivity(t.magnet, trap, readout, opt, ws, axis);
      }
      const double g = r.point.gamma_gas + r.point.gamma_hyst;
      const ModeParams mp = ModeParams::from(t.magnet, trap, {g, g, g, r.point.gamma_gas, r.point.gamma_gas});
      r.inverse_residual = build_susceptibility(mp, w_eval).inverse_residual;
      r.mass = t.magnet.mass();
      r.readout = readout;
      r.trap = trap;
      ctx.note(fmt::format("sensitivity: R = {} m done", p.radii[i]));
    } catch (const std::exception& e) {
      rows[i].error = e.what();
    }
  });

  const double g0 = constants::standard_gravity;
  Csv csv({"radius_m", "axis", "f_trap_hz", "f_eval_hz", "eta_per_m", "loop_side_m", "loop_distance_m",
           "squid_noise_phi0_per_rthz", "sqrt_sf_squid_n", "sqrt_sf_gas_n", "sqrt_sf_hyst_n", "sqrt_sf_total_n",
           "sqrt_sa_total_g", "quality_factor", "gamma_gas_per_s", "gamma_hyst_per_s", "eddy_ratio", "error"});
  Csv spectrum({"radius_m", "f_hz", "sqrt_sf_squid_n", "sqrt_sf_gas_n", "sqrt_sf_hyst_n", "sqrt_sf_total_n",
                "sqrt_sa_total_g"});
  const std::string ax(1, "xyz"[axis]);
  ordered_json points = ordered_json::array();
  std::size_t failed = 0;
  double worst_residual = 0.0, worst_eddy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Row& r = rows[i];
    const double rad = p.radii[i];
    if (!r.trap) {
      ++failed;
      ctx.warn(fmt::format("radius {} m: {}", rad, r.error));
      std::vector<std::string> blank(18);
      blank[0] = num(rad);
      blank[1] = ax;
      blank[17] = r.error;
      csv.row(blank);
      continue;
    }
    const auto& c = r.point;
    const std::array<double, 3> wi = {r.trap->omega_x, r.trap->omega_y, r.trap->omega_z};
    const double sa = std::sqrt(c.s_accel[0]) / g0;
    csv.row({num(rad), ax, num(wi[axis] / two_pi), num(c.evaluation_omega / two_pi), num(r.readout.eta[axis]),
             num(r.readout.side), num(r.readout.distance), num(c.squid_noise), num(std::sqrt(c.s_squid[0])),
             num(std::sqrt(c.s_gas[0])), num(std::sqrt(c.s_hyst[0])), num(std::sqrt(c.s_total[0])), num(sa),
             num(c.quality), num(c.gamma_gas), num(c.gamma_hyst), num(c.eddy_ratio), ""});
    for (std::size_t k = 0; k < r.spectrum.omega.size(); ++k) {
      const auto& s = r.spectrum;
      spectrum.row({num(rad), num(s.omega[k] / two_pi), num(std::sqrt(s.s_squid[k])), num(std::sqrt(s.s_gas[k])),
                    num(std::sqrt(s.s_hyst[k])), num(std::sqrt(s.s_total[k])), num(std::sqrt(s.s_accel[k]) / g0)});
    }
    worst_residual = std::max(worst_residual, r.inverse_residual);
    worst_eddy = std::max(worst_eddy, c.eddy_ratio);
    points.push_back({{"radius_m", rad},
                      {"f_eval_hz", c.evaluation_omega / two_pi},
                      {"sqrt_sf_total_n", std::sqrt(c.s_total[0])},
                      {"sqrt_sa_total_g", sa},
                      {"quality_factor", c.quality},
                      {"susceptibility_inverse_residual", jnum(r.inverse_residual)},
                      {"eddy_ratio", c.eddy_ratio}});
  }
  csv.save(ctx.dir / "sensitivity.csv", ctx.report);
  if (p.spectrum_points > 0) spectrum.save(ctx.dir / "spectrum.csv", ctx.report);
  ctx.results["points"] = points;
  ctx.results["max_susceptibility_inverse_residual"] = worst_residual;
  ctx.results["max_eddy_ratio"] = worst_eddy;
  settle(ctx, failed, n);
}

void run_casimir(Context& ctx) {
  const auto& p = ctx.cfg.casimir;
  MagnetSpec magnet = ctx.cfg.trap.magnet;
  magnet.radius = p.radius;
  const double w = two_pi * p.frequency_hz;
  const std::size_t n = p.distances.size();
  std::vector<double> force(n, NAN);
  std::vector<std::string> errors(n);
  detail::parallel_for(n, ctx.cfg.threads, [&](std::size_t i) {
    try {
      force[i] = casimir_force(magnet, {p.resistivity, p.distances[i]}, w, p.order);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  Csv csv({"d_m", "F_x_N"});
  std::size_t failed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) {
      ++failed;
      ctx.warn(fmt::format("distance {} m: {}", p.distances[i], errors[i]));
    }
    csv.row({num(p.distances[i]), num(force[i])});
  }
  csv.save(ctx.dir / "casimir.csv", ctx.report);

  ordered_json dmax = nullptr;
  try {
    dmax = detectability_distance(magnet, p.resistivity, p.threshold, w, p.order);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoCrossing) throw;
    ctx.warn(e.what());
  }
  ctx.results["detectability_distance_m"] = dmax;
  ctx.results["threshold_n"] = p.threshold;
  settle(ctx, failed, n);
}

bool monotone(const std::vector<double>& v) {
  bool up = true, down = true;
  for (std::size_t i = 1; i < v.size(); ++i) {
    up = up && v[i] >= v[i - 1];
    down = down && v[i] <= v[i - 1];
  }
  return up || down;
}

void run_wire_sweep(Context& ctx) {
  const auto& p = ctx.cfg.wire_sweep;
  TrapConfig t = with_radius(ctx.cfg, p.radius);
  const Equilibrium eq = find_equilibrium(t);
  t.sc.hole_radius = eq.hole_radius;
  WireSource wire;
  wire.height = p.wire_height;
  const auto rows = wire_sweep(t, wire, p.currents, {p.screened, ctx.cfg.threads});

  Csv csv({"I_w_A", "z0_m", "fx_Hz", "fy_Hz", "fz_Hz", "fbeta_Hz", "error"});
  std::vector<double> z0, fx, fy, fz, fb;
  std::size_t failed = 0;
  for (const auto& r : rows) {
    if (!r.trap) {
      ++failed;
      ctx.warn(fmt::format("current {} A: {}", r.current, r.error));
      csv.row({num(r.current), "", "", "", "", "", r.error});
      continue;
    }
    const auto& c = *r.trap;
    z0.push_back(c.z0);
    fx.push_back(c.omega_x / two_pi);
    fy.push_back(c.omega_y / two_pi);
    fz.push_back(c.omega_z / two_pi);
    fb.push_back(c.omega_beta / two_pi);
    csv.row({num(r.current), num(c.z0), num(fx.back()), num(fy.back()), num(fz.back()), num(fb.back()), ""});
  }
  csv.save(ctx.dir / "wire_sweep.csv", ctx.report);
  ctx.results["hole_radius_m"] = eq.hole_radius;
  ctx.results["monotonic"] = {{"z0", monotone(z0)}, {"fx", monotone(fx)}, {"fy", monotone(fy)},
                              {"fz", monotone(fz)}, {"fbeta", monotone(fb)}};
  settle(ctx, failed, rows.size());
}

void run_readout_design(Context& ctx) {
  const auto& p = ctx.cfg.readout_design;
  const std::size_t n = p.radii.size();
  struct Row {
    ReadoutArray arr;
    Couplings c;
    double roundtrip = NAN;
    std::string error;
  };
  std::vector<Row> rows(n);
  detail::parallel_for(n, ctx.cfg.threads, [&](std::size_t i) {
    try {
      TrapConfig t = with_radius(ctx.cfg, p.radii[i]);
      std::optional<ScGeometry> sc;
      double z0 = 0.0;
      if (p.include_sheet) {
        const Equilibrium eq = find_equilibrium(t);
        t.sc.hole_radius = eq.hole_radius;
        z0 = eq.z0;
        sc = t.sc;
      }
      Row& r = rows[i];
      r.arr = design_array(p.radii[i], z0);
      r.c = coupling_factors(r.arr, t.magnet, Vec3(0, 0, z0), 1e-3 * r.arr.distance, sc ? &*sc : nullptr);
      const Vec3 probe = p.radii[i] * Vec3(1e-3, -2e-3, 3e-3);
      const FluxInversion inv = invert_fluxes(encode_fluxes(probe, r.c.eta), r.c.eta);
      r.roundtrip = (inv.position - probe).norm() / probe.norm();
    } catch (const std::exception& e) {
      rows[i].error = e.what();
    }
  });
  Csv csv({"radius_m", "loop_distance_m", "loop_side_m", "eta_table_per_m", "eta_x_per_m", "eta_y_per_m",
           "eta_z_per_m", "roundtrip_residual", "error"});
  std::size_t failed = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Row& r = rows[i];
    if (!r.error.empty()) {
      ++failed;
      ctx.warn(fmt::format("radius {} m: {}", p.radii[i], r.error));
      csv.row({num(p.radii[i]), "", "", "", "", "", "", "", r.error});
      continue;
    }
    worst = std::max(worst, r.roundtrip);
    csv.row({num(p.radii[i]), num(r.arr.distance), num(r.arr.side), num(r.arr.eta[0]), num(r.c.eta[0]),
             num(r.c.eta[1]), num(r.c.eta[2]), num(r.roundtrip), ""});
  }
  csv.save(ctx.dir / "readout_design.csv", ctx.report);
  ctx.results["max_roundtrip_residual"] = worst;
  settle(ctx, failed, n);
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  Context ctx{cfg, log, fs::path(cfg.output_dir), {}, ordered_json::object(), {}};
  fs::create_directories(ctx.dir);
  std::string failure;
  try {
    switch (cfg.kind) {
      case ExperimentKind::TrapSweep: run_trap_sweep(ctx); break;
      case ExperimentKind::Sensitivity: run_sensitivity(ctx); break;
      case ExperimentKind::Casimir: run_casimir(ctx); break;
      case ExperimentKind::WireSweep: run_wire_sweep(ctx); break;
      case ExperimentKind::ReadoutDesign: run_readout_design(ctx); break;
    }
  } catch (const std::exception& e) {
    failure = e.what();
    ctx.report.exit_code = exit_code::solver;
  }

  ordered_json summary;
  summary["experiment"] = to_string(cfg.kind);
  summary["status"] = ctx.report.exit_code != exit_code::ok ? "failed"
                      : ctx.report.warnings.empty()      ? "ok"
                                                         : "partial";
  if (!failure.empty()) summary["error"] = failure;
  summary["config"] = detail::to_json(cfg);
  summary["results"] = ctx.results;
  summary["warnings"] = ctx.report.warnings;
  ordered_json files = ordered_json::array();
  for (const auto& f : ctx.report.outputs) files.push_back(f.filename().string());
  summary["outputs"] = files;

  const fs::path path = ctx.dir / "summary.json";
  std::ofstream out(path, std::ios::binary);
  out << summary.dump(2) << "\n";
  ctx.report.outputs.push_back(path);
  if (!failure.empty()) ctx.report.warnings.push_back(failure);
  return ctx.report;
}

}  // namespace levitrap
