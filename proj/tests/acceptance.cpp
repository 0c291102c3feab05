// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <fmt/core.h>

#include "levitrap/config.hpp"
#include "levitrap/constants.hpp"
#include "levitrap/dynamics.hpp"
#include "levitrap/noise.hpp"
#include "levitrap/readout.hpp"
#include "levitrap/signals.hpp"
#include "levitrap/trap.hpp"

using namespace levitrap;
using constants::k_B;
using constants::pi;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int n, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::cout << fmt::format("criterion {}: {} {}", n, ok ? "PASS" : "FAIL", detail) << std::endl;
}

// Exceptions inside a criterion count as a failure of that criterion only.
void criterion(int n, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(n, false, std::string("(exception: ") + e.what() + ")");
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool within_factor(double value, double target, double factor) {
  return value > target / factor && value < target * factor;
}

TrapCharacterization quick_trap(TrapConfig& cfg) {
  cfg.sc.hole_radius = find_equilibrium(cfg).hole_radius;
  const TrapModel model(cfg);
  return model.characterize(model.equilibrium_height(cfg.target_ratio * cfg.sc.hole_radius), false);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::vector<double> table_radii = {0.1e-6, 1e-6, 10e-6, 100e-6, 1e-3, 10e-3};

}  // namespace

int main() {
  const ExperimentConfig preset = parse_config(preset_config("paper-sm5"));

  criterion(1, [] {
    double worst = 0, slowest = 0;
    std::string cells;
    for (int z = 5; z <= 10; ++z) {
      const auto t0 = std::chrono::steady_clock::now();
      const double v = normalized_axis_potential(z, Orientation{});
      slowest = std::max(slowest, seconds_since(t0));
      const double ref = 1.0 / (16.0 * z * z * z);
      const double rel = v / ref - 1.0;
      worst = std::max(worst, std::abs(rel));
      cells += fmt::format(" {}:{:+.3f}%", z, 100 * rel);
    }
    report(1, worst < 0.01 && slowest < 120,
           fmt::format("(max |rel err| = {:.3f}%, slowest point {:.2f} s; per z~:{})", 100 * worst, slowest, cells));
  });

  criterion(2, [] {
    const NormalizedPotential v;
    const double h = 1e-3;
    auto curvature = [&](double z) {
      auto at = [&](double zz) { return v(Vec3(0, 0, zz), Orientation{}); };
      return (at(z + h) - 2 * at(z) + at(z - h)) / (h * h);
    };
    double lo = 1.0, hi = 1.5;
    double flo = curvature(lo);
    if (flo * curvature(hi) > 0) throw std::runtime_error("no curvature sign change in [1.0, 1.5]");
    for (int k = 0; k < 50 && hi - lo > 1e-6; ++k) {
      const double mid = 0.5 * (lo + hi);
      const double fm = curvature(mid);
      if (fm * flo > 0) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    const double z0 = 0.5 * (lo + hi);
    report(2, std::abs(z0 - 1.168) <= 0.02, fmt::format("(curvature zero at z~ = {:.4f}, target 1.168 +- 0.02)", z0));
  });

  // Criteria 3-5 and the sweep parts of 10 share one radius sweep.
  TrapConfig tmpl = preset.trap;
  const std::vector<SweepRow> sweep = sweep_radius(table_radii, tmpl, preset.threads);

  criterion(3, [&] {
    if (!sweep[0].trap) throw std::runtime_error(sweep[0].error);
    const Eigen::Matrix4d& h = sweep[0].trap->normalized_hessian;
    const double dominant = h.diagonal().cwiseAbs().maxCoeff();
    double worst = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        if (!(i == 1 && j == 3)) worst = std::max(worst, std::abs(h(i, j)));
    const double yb = std::abs(h(1, 3));
    report(3, worst < 1e-3 * dominant && yb > 0,
           fmt::format("(max other cross / dominant = {:.2e}, |(y,beta)| / dominant = {:.3e})", worst / dominant,
                       yb / dominant));
  });

  criterion(4, [&] {
    for (const auto& r : sweep)
      if (!r.trap) throw std::runtime_error(r.error);
    const ScalingFit fit = scaling_exponents(sweep);
    const double w_worst = std::max({std::abs(fit.omega_x + 0.375), std::abs(fit.omega_y + 0.375),
                                     std::abs(fit.omega_z + 0.375)});
    const bool ok = std::abs(fit.z0 - 0.75) <= 0.05 && w_worst <= 0.05 && std::abs(fit.trap_depth - 3.75) <= 0.1;
    report(4, ok,
           fmt::format("(z0 {:.4f}, omega_x/y/z {:.4f}/{:.4f}/{:.4f}, depth {:.4f}; omega_beta {:.4f} reported only)",
                       fit.z0, fit.omega_x, fit.omega_y, fit.omega_z, fit.trap_depth, fit.omega_beta));
  });

  criterion(5, [&] {
    if (!sweep[0].trap) throw std::runtime_error(sweep[0].error);
    const TrapCharacterization& t = *sweep[0].trap;
    const double target = 2 * pi * 180;
    const bool freq = within_factor(t.omega_x, target, 2) && within_factor(t.omega_y, target, 2) &&
                      within_factor(t.omega_z, target, 2);
    const bool depth = std::abs(t.trap_depth_K - 14.0) <= 0.3 * 14.0;
    report(5, freq && depth,
           fmt::format("(f_x/f_y/f_z = {:.1f}/{:.1f}/{:.1f} Hz, depth {:.2f} K)", t.omega_x / (2 * pi),
                       t.omega_y / (2 * pi), t.omega_z / (2 * pi), t.trap_depth_K));
  });

  // Sensitivity endpoints with the preset's noise options, x axis.
  struct Endpoint {
    TrapConfig cfg;
    TrapCharacterization trap;
    SensitivityCurve c;
  };
  auto endpoint = [&](double radius) {
    Endpoint e;
    e.cfg = preset.trap;
    e.cfg.magnet.radius = radius;
    e.trap = quick_trap(e.cfg);
    const ReadoutArray readout = design_array(radius, e.trap.z0);
    const double w = evaluation_fraction(preset.noise, radius) * e.trap.omega_x;
    e.c = force_sensitivity(e.cfg.magnet, e.trap, readout, preset.noise, {w}, 0);
    return e;
  };
  std::optional<Endpoint> small, large;
  try {
    small = endpoint(100e-9);
    large = endpoint(10e-3);
  } catch (const std::exception& e) {
    std::cerr << "sensitivity endpoints failed: " << e.what() << "\n";
  }
  const double g0 = 9.80665;

  criterion(6, [&] {
    if (!small || !large) throw std::runtime_error("endpoints unavailable");
    const double sf = std::sqrt(small->c.s_total[0]);
    const double fs = small->c.evaluation_omega / (2 * pi);
    const double sa = std::sqrt(large->c.s_accel[0]) / g0;
    const double fl = large->c.evaluation_omega / (2 * pi);
    report(6, within_factor(sf, 5e-23, 3) && within_factor(sa, 7e-15, 3),
           fmt::format("(R = 100 nm: {:.3e} N/rtHz at {:.2f} Hz; R = 10 mm: {:.3e} g/rtHz at {:.3f} Hz)", sf, fs, sa,
                       fl));
  });

  criterion(7, [&] {
    if (!small || !large) throw std::runtime_error("endpoints unavailable");
    const auto& a = small->c;
    const auto& b = large->c;
    const bool ok = within_factor(a.quality, 1e9, 10) && a.gamma_gas > a.gamma_hyst &&
                    within_factor(b.quality, 1e5, 10) && b.gamma_hyst > b.gamma_gas;
    report(7, ok,
           fmt::format("(R = 100 nm: Q = {:.2e}, gas/hyst = {:.2e}; R = 10 mm: Q = {:.2e}, hyst/gas = {:.2e})",
                       a.quality, a.gamma_gas / a.gamma_hyst, b.quality, b.gamma_hyst / b.gamma_gas));
  });

  criterion(8, [&] {
    if (!small || !large) throw std::runtime_error("endpoints unavailable");
    const auto& a = small->c;
    const auto& b = large->c;
    const bool readout_leads = a.s_squid[0] > a.s_gas[0] + a.s_hyst[0];
    const bool hyst_leads = b.s_hyst[0] > b.s_squid[0] && b.s_hyst[0] > b.s_gas[0];
    report(8, readout_leads && hyst_leads,
           fmt::format("(R = 0.1 um: squid/(gas+hyst) = {:.2f}; R = 1e4 um: hyst/squid = {:.2f}, hyst/gas = {:.2e})",
                       a.s_squid[0] / (a.s_gas[0] + a.s_hyst[0]), b.s_hyst[0] / b.s_squid[0],
                       b.s_hyst[0] / b.s_gas[0]));
  });

  criterion(9, [&] {
    const CasimirParams& p = preset.casimir;
    MagnetSpec m = preset.trap.magnet;
    m.radius = p.radius;
    const double d = detectability_distance(m, p.resistivity, p.threshold, 2 * pi * p.frequency_hz, p.order);
    report(9, std::abs(d - 25e-6) <= 0.3 * 25e-6, fmt::format("(d_max = {:.2f} um)", d * 1e6));
  });

  criterion(10, [&] {
    std::vector<std::string> bad;
    std::string detail;

    // Equipartition with the preset damping at R = 100 nm, strengthened so
    // the quadrature resolves the Lorentzian.
    {
      ModeParams p = small ? ModeParams::from(small->cfg.magnet, small->trap, {1, 1, 1, 1, 1}) : ModeParams{};
      if (!small) throw std::runtime_error("endpoints unavailable");
      const double gamma = 0.05 * p.omega_x;
      p.gamma = {gamma, gamma, gamma, gamma, gamma};
      const double T = preset.noise.env.temperature;
      const double s_f = thermal_force_psd(gamma, p.mass, T);
      boost::math::quadrature::exp_sinh<double> integrator;
      const double var = 2.0 * integrator.integrate(
                                   [&](double w) { return std::norm(build_susceptibility(p, w).chi(0, 0)) * s_f; }, 1e-12);
      const double rel = var / (k_B * T / (p.mass * p.omega_x * p.omega_x)) - 1;
      if (std::abs(rel) > 0.05) bad.push_back("equipartition");
      detail += fmt::format("equipartition {:+.2e}", rel);

      double conj_err = 0, inv_res = 0;
      for (double f : {0.1, 0.7, 1.0, 1.3, 5.0}) {
        const double w = f * p.omega_y;
        const auto plus = build_susceptibility(p, w);
        const auto minus = build_susceptibility(p, -w);
        conj_err = std::max(conj_err, (minus.chi - plus.chi.conjugate()).cwiseAbs().maxCoeff() /
                                          plus.chi.cwiseAbs().maxCoeff());
        inv_res = std::max({inv_res, plus.inverse_residual, minus.inverse_residual});
      }
      if (conj_err > 1e-12) bad.push_back("conjugate symmetry");
      if (inv_res >= 1e-12) bad.push_back("inverse residual");
      detail += fmt::format(", conj {:.1e}, inverse {:.1e}", conj_err, inv_res);
    }

    {
      double worst = 0;
      const Axis3 eta = design_array(100e-9, 0).eta;
      for (const Vec3& r : {Vec3(1e-9, -2e-9, 3e-9), Vec3(4e-12, 7e-12, -1e-12), Vec3(0, 5e-10, 0)}) {
        const FluxInversion inv = invert_fluxes(encode_fluxes(r, eta), eta);
        worst = std::max(worst, (inv.position - r).norm() / r.norm());
      }
      if (worst >= 1e-12) bad.push_back("flux round trip");
      detail += fmt::format(", flux {:.1e}", worst);
    }

    {
      double screening = 0, projection = 0, eddy = 0;
      for (const auto& row : sweep) {
        if (!row.trap) throw std::runtime_error(row.error);
        TrapConfig cfg = preset.trap;
        cfg.magnet.radius = row.radius;
        cfg.sc.hole_radius = row.trap->hole_radius;
        DipoleSource src;
        src.position = Vec3(0, 0, row.trap->z0);
        src.moment = cfg.magnet.moment();
        const SheetCurrentSolution sol = solve_sheet_current(cfg.sc, src);
        screening = std::max(screening, sol.screening_residual());
        projection = std::max(projection, sol.projection_residual());
        const std::array<double, 3> wi = {row.trap->omega_x, row.trap->omega_y, row.trap->omega_z};
        for (int axis = 0; axis < 3; ++axis) {
          const double w = evaluation_fraction(preset.noise, row.radius) * wi[axis];
          eddy = std::max(eddy, eddy_loss_ratio(cfg.magnet, *row.trap, preset.noise.env, axis, w));
        }
      }
      if (screening >= 1e-3 || projection >= 1e-3) bad.push_back("screening residual");
      if (eddy >= 1e-2) bad.push_back("eddy ratio");
      detail += fmt::format(", screening {:.1e} (projection {:.1e}), eddy {:.1e}", screening, projection, eddy);
    }

    {
      const fs::path dir = fs::current_path() / "acceptance_cli";
      fs::remove_all(dir);
      fs::create_directories(dir);
      auto run = [&](const std::string& args) {
        const std::string cmd = "cd '" + dir.string() + "' && '" LEVITRAP_CLI "' " + args;
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
      };
      // Same command twice; the first result is moved aside in between.
      bool same = run("preset paper-sm5 > sm5.json") == 0 && run("run sm5.json -o out > /dev/null 2>&1") == 0;
      if (same) fs::rename(dir / "out", dir / "a");
      same = same && run("run sm5.json -o out > /dev/null 2>&1") == 0;
      std::size_t files = 0;
      if (same) {
        for (const auto& entry : fs::directory_iterator(dir / "a")) {
          ++files;
          const fs::path other = dir / "out" / entry.path().filename();
          if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) same = false;
        }
        same = same && files > 0;
      }
      if (!same) bad.push_back("CLI determinism");
      detail += fmt::format(", CLI {} files identical: {}", files, same ? "yes" : "no");
    }

    std::string failed;
    for (const auto& b : bad) failed += (failed.empty() ? "; failed: " : ", ") + b;
    report(10, bad.empty(), "(" + detail + failed + ")");
  });

  return failures == 0 ? 0 : 1;
}
