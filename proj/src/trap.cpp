#include "levitrap/trap.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <queue>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "levitrap/constants.hpp"
#include "levitrap/error.hpp"
#include "parallel.hpp"

namespace levitrap {

using constants::pi;

double MagnetSpec::volume() const { return 4.0 / 3.0 * pi * radius * radius * radius; }
double MagnetSpec::moment() const { return magnetization_density * volume(); }
double MagnetSpec::mass() const { return mass_density * volume(); }
double MagnetSpec::inertia() const { return 0.4 * mass() * radius * radius; }

void MagnetSpec::validate() const {
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "magnet radius must be > 0");
  if (!(magnetization_density > 0.0)) throw Error(ErrorCode::InvalidArgument, "magnetization density must be > 0");
  if (!(mass_density > 0.0)) throw Error(ErrorCode::InvalidArgument, "mass density must be > 0");
  if (!(susceptibility >= 0.0)) throw Error(ErrorCode::InvalidArgument, "susceptibility must be >= 0");
  if (!(conductivity >= 0.0)) throw Error(ErrorCode::InvalidArgument, "conductivity must be >= 0");
}

void TrapConfig::validate() const {
  magnet.validate();
  sc.validate();
  if (!(gravity >= 0.0)) throw Error(ErrorCode::InvalidArgument, "gravity must be >= 0");
  if (!(target_ratio > 1.168)) throw Error(ErrorCode::InvalidArgument, "z0/a must exceed 1.168");
  if (!(fd_step > 0.0 && fd_step < 0.1)) throw Error(ErrorCode::InvalidArgument, "fd step must lie in (0, 0.1)");
}

std::shared_ptr<const NormalizedPotential> unit_potential(int mesh_node_count) {
  static std::mutex lock;
  static std::map<int, std::shared_ptr<const NormalizedPotential>> cache;
  std::lock_guard guard(lock);
  auto& slot = cache[mesh_node_count];
  if (!slot) slot = std::make_shared<const NormalizedPotential>(mesh_node_count);
  return slot;
}

namespace {

Orientation tilted(double beta) {
  Orientation o;
  o.beta = beta;
  return o;
}

// Richardson-extrapolated central differences.
template <class F>
double d1(F&& f, double h) {
  const double big = (f(h) - f(-h)) / (2 * h);
  const double small = (f(h / 2) - f(-h / 2)) / h;
  return (4 * small - big) / 3;
}

template <class F>
double d2(F&& f, double f0, double h) {
  const double big = (f(h) - 2 * f0 + f(-h)) / (h * h);
  const double small = (f(h / 2) - 2 * f0 + f(-h / 2)) / (h * h / 4);
  return (4 * small - big) / 3;
}

template <class F>
double d11(F&& f, double h) {
  auto mixed = [&](double s) { return (f(s, s) - f(s, -s) - f(-s, s) + f(-s, -s)) / (4 * s * s); };
  return (4 * mixed(h / 2) - mixed(h)) / 3;
}

}  // namespace

TrapModel::TrapModel(const TrapConfig& cfg, ExtraEnergy extra)
    : cfg_(cfg), extra_(std::move(extra)), a_(cfg.sc.hole_radius) {
  cfg_.validate();
  const double mu = cfg_.magnet.moment();
  v0_ = constants::mu0 * mu * mu / (4.0 * pi * a_ * a_ * a_);
  gravity_tilde_ = cfg_.magnet.mass() * cfg_.gravity * a_ / v0_;
  unit_ = unit_potential(cfg_.sc.mesh_node_count);
}

double TrapModel::normalized(const Vec3& r_tilde, double beta) const {
  double w = (*unit_)(r_tilde, tilted(beta)) + gravity_tilde_ * r_tilde.z();
  if (extra_) w += extra_(r_tilde * a_, beta) / v0_;
  return w;
}

double TrapModel::potential(const Vec3& r, double beta) const { return v0_ * normalized(r / a_, beta); }

double TrapModel::equilibrium_height(double z_guess) const {
  const double h = cfg_.fd_step;
  auto slope = [&](double z) {
    return d1([&](double dz) { return normalized(Vec3(0, 0, z + dz), 0.0); }, h);
  };
  double lo = z_guess / a_;
  double hi = lo;
  double s = slope(lo);
  if (s < 0.0) {
    // Pushed upwards: step up until gravity wins.
    for (int i = 0; s < 0.0; ++i) {
      if (i > 200) throw Error(ErrorCode::NoTrap, "no upper bracket for the equilibrium");
      lo = hi;
      hi *= 1.1;
      s = slope(hi);
    }
  } else {
    for (int i = 0; s >= 0.0; ++i) {
      hi = lo;
      lo -= 0.05;
      if (lo < 1.0 || i > 400) throw Error(ErrorCode::NoTrap, "gravity exceeds the largest restoring force");
      s = slope(lo);
    }
  }
  boost::uintmax_t iters = 200;
  const auto [r0, r1] = boost::math::tools::toms748_solve(
      slope, lo, hi, [](double x, double y) { return std::abs(x - y) < 1e-11 * std::abs(x); }, iters);
  const double z = 0.5 * (r0 + r1);
  const double curv = d2([&](double dz) { return normalized(Vec3(0, 0, z + dz), 0.0); },
                         normalized(Vec3(0, 0, z), 0.0), h);
  if (!(curv > 0.0)) throw Error(ErrorCode::UnstableTrap, "vertical curvature is not positive");
  return z * a_;
}

TrapCharacterization TrapModel::characterize(double z0, bool with_depth) const {
  const double zt = z0 / a_;
  const double h = cfg_.fd_step;
  auto f = [&](const Eigen::Vector4d& q) { return normalized(Vec3(q[0], q[1], zt + q[2]), q[3]); };
  const double f0 = f(Eigen::Vector4d::Zero());

  Eigen::Matrix4d hess;
  for (int i = 0; i < 4; ++i) {
    hess(i, i) = d2(
        [&](double s) {
          Eigen::Vector4d q = Eigen::Vector4d::Zero();
          q[i] = s;
          return f(q);
        },
        f0, h);
    for (int j = 0; j < i; ++j) {
      hess(i, j) = hess(j, i) = d11(
          [&](double s, double t) {
            Eigen::Vector4d q = Eigen::Vector4d::Zero();
            q[i] = s;
            q[j] = t;
            return f(q);
          },
          h);
    }
  }
  for (int i = 0; i < 4; ++i) {
    if (!(hess(i, i) > 0.0)) throw Error(ErrorCode::UnstableTrap, "non-positive curvature at the trap centre");
  }

  const MagnetSpec& m = cfg_.magnet;
  TrapCharacterization t;
  t.radius = m.radius;
  t.hole_radius = a_;
  t.z0 = z0;
  t.V0 = v0_;
  t.normalized_hessian = hess;
  const double lin = v0_ / (m.mass() * a_ * a_);
  t.omega_x = std::sqrt(lin * hess(0, 0));
  t.omega_y = std::sqrt(lin * hess(1, 1));
  t.omega_z = std::sqrt(lin * hess(2, 2));
  t.omega_beta = std::sqrt(v0_ * hess(3, 3) / m.inertia());
  t.kappa = v0_ / a_ * hess(1, 3);

  if (!with_depth) return t;

  // Axis cuts at fixed height. Lateral cuts run far enough out that the hole
  // no longer matters; the downward cut stops well above the plane.
  auto barrier = [&](const Vec3& dir, double reach) {
    auto w = [&](double s) { return normalized(Vec3(0, 0, zt) + s * dir, 0.0) - f0; };
    const int n = 64;
    double best = 0.0;
    int at = 0;
    for (int k = 1; k <= n; ++k) {
      const double s = reach * std::pow(static_cast<double>(k) / n, 2);
      const double v = w(s);
      if (v > best) best = v, at = k;
    }
    if (at > 0 && at < n) {
      const double lo = reach * std::pow((at - 1.0) / n, 2);
      const double hi = reach * std::pow((at + 1.0) / n, 2);
      const auto r = boost::math::tools::brent_find_minima([&](double s) { return -w(s); }, lo, hi, 40);
      best = std::max(best, -r.second);
    }
    return best;
  };
  const double lateral = 30.0;
  const double floor_z = 0.3;
  t.barriers = {barrier(Vec3::UnitX(), lateral), barrier(-Vec3::UnitX(), lateral),
                barrier(Vec3::UnitY(), lateral), barrier(-Vec3::UnitY(), lateral),
                std::numeric_limits<double>::infinity(),  // gravity closes the top
                barrier(-Vec3::UnitZ(), zt - floor_z)};

  // Mountain pass: the highest point along the best grid path out of the
  // trap, found with a bottleneck Dijkstra over a half-plane grid. Beyond the
  // lateral edge of the grid the sheet is hole-free, where the lowest level
  // is the minimum over height of the image potential plus gravity.
  const double far_level = [&] {
    auto w = [&](double z) { return 1.0 / (16.0 * z * z * z) + gravity_tilde_ * z; };
    if (gravity_tilde_ <= 0.0) return 0.0;
    const double zm = std::pow(3.0 / (16.0 * gravity_tilde_), 0.25);
    return w(zm);
  }();
  auto pass = [&](const Vec3& dir) {
    const double dz = (zt - floor_z) / 15.0;
    const int kc = 15;
    const int nz = kc + static_cast<int>(std::ceil(1.7 / dz)) + 1;
    const double ds = 0.2;
    const int ns = 41;
    std::vector<double> w(static_cast<std::size_t>(ns) * nz);
    for (int i = 0; i < ns; ++i) {
      for (int k = 0; k < nz; ++k) {
        w[i * nz + k] = normalized(i * ds * dir + Vec3(0, 0, floor_z + k * dz), 0.0);
      }
    }
    std::vector<double> level(w.size(), std::numeric_limits<double>::infinity());
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
    level[kc] = w[kc];
    open.push({w[kc], kc});
    double out = std::numeric_limits<double>::infinity();
    double down = std::numeric_limits<double>::infinity();
    while (!open.empty()) {
      const auto [v, id] = open.top();
      open.pop();
      if (v > level[id]) continue;
      const int i = id / nz;
      const int k = id % nz;
      if (i == ns - 1) out = std::min(out, v);
      if (k == 0) down = std::min(down, v);
      for (int di = -1; di <= 1; ++di) {
        for (int dk = -1; dk <= 1; ++dk) {
          const int ii = i + di;
          const int kk = k + dk;
          if ((di == 0 && dk == 0) || ii < 0 || ii >= ns || kk < 0 || kk >= nz) continue;
          const int j = ii * nz + kk;
          const double nv = std::max(v, w[j]);
          if (nv < level[j]) {
            level[j] = nv;
            open.push({nv, j});
          }
        }
      }
    }
    return std::pair{std::max(out, far_level) - f0, down - f0};
  };
  const auto [via_x, down_x] = pass(Vec3::UnitX());
  const auto [via_y, down_y] = pass(Vec3::UnitY());
  t.escape_barriers = {via_x, via_y, std::min(down_x, down_y)};

  double depth = std::numeric_limits<double>::infinity();
  if (cfg_.depth_method == DepthMethod::AxisCuts) {
    for (double b : t.barriers) depth = std::min(depth, b);
  } else {
    for (double b : t.escape_barriers) depth = std::min(depth, b);
  }
  t.trap_depth_K = depth * v0_ / constants::k_B;
  return t;
}

double total_potential(const TrapConfig& cfg, const Vec3& r, double beta) {
  if (!(r.z() > 0.0)) throw Error(ErrorCode::InvalidArgument, "magnet must be above the sheet");
  return TrapModel(cfg).potential(r, beta);
}

Equilibrium find_equilibrium(const TrapConfig& cfg) {
  cfg.validate();
  if (!(cfg.gravity > 0.0)) throw Error(ErrorCode::NoTrap, "no force balance without gravity");
  const MagnetSpec& m = cfg.magnet;
  const double ratio = cfg.target_ratio;

  // Force balance at z0 = ratio * a fixes a directly; the iteration below
  // confirms it against the full equilibrium search.
  const auto unit = unit_potential(cfg.sc.mesh_node_count);
  const double slope = d1([&](double dz) { return (*unit)(Vec3(0, 0, ratio + dz), Orientation{}); }, cfg.fd_step);
  if (!(slope < 0.0)) throw Error(ErrorCode::NoTrap, "no repulsion at the target height");
  const double mu = m.moment();
  double a = std::pow(constants::mu0 * mu * mu * -slope / (4.0 * pi * m.mass() * cfg.gravity), 0.25);

  TrapConfig work = cfg;
  for (int it = 1; it <= 50; ++it) {
    work.sc.hole_radius = a;
    const double z0 = TrapModel(work).equilibrium_height(ratio * a);
    const double next = z0 / ratio;
    if (std::abs(next - a) <= 1e-4 * a) return {next, ratio * next, it};
    a = next;
  }
  throw Error(ErrorCode::NonConvergence, "hole-radius iteration did not converge");
}

TrapCharacterization characterize_trap(const TrapConfig& cfg) {
  const Equilibrium eq = find_equilibrium(cfg);
  TrapConfig work = cfg;
  work.sc.hole_radius = eq.hole_radius;
  // Re-centre on the equilibrium of this exact hole radius.
  const TrapModel model(work);
  return model.characterize(model.equilibrium_height(eq.z0));
}

std::vector<SweepRow> sweep_radius(const std::vector<double>& radii, const TrapConfig& tmpl, int threads) {
  std::vector<SweepRow> rows(radii.size());
  detail::parallel_for(radii.size(), threads, [&](std::size_t i) {
    rows[i].radius = radii[i];
    try {
      if (!(radii[i] >= 10e-9 && radii[i] <= 50e-3)) {
        throw Error(ErrorCode::OutOfRange, "radius outside [10 nm, 50 mm]");
      }
      TrapConfig cfg = tmpl;
      cfg.magnet.radius = radii[i];
      rows[i].trap = characterize_trap(cfg);
    } catch (const std::exception& e) {
      rows[i].error = e.what();
    }
  });
  return rows;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  return den != 0.0 ? (n * sxy - sx * sy) / den : std::numeric_limits<double>::quiet_NaN();
}

ScalingFit scaling_exponents(const std::vector<SweepRow>& rows) {
  std::vector<double> r, z0, wx, wy, wz, wb, depth;
  for (const auto& row : rows) {
    if (!row.trap) continue;
    const auto& t = *row.trap;
    r.push_back(row.radius);
    z0.push_back(t.z0);
    wx.push_back(t.omega_x);
    wy.push_back(t.omega_y);
    wz.push_back(t.omega_z);
    wb.push_back(t.omega_beta);
    depth.push_back(t.trap_depth_K);
  }
  return {loglog_slope(r, z0), loglog_slope(r, wx), loglog_slope(r, wy),
          loglog_slope(r, wz), loglog_slope(r, wb), loglog_slope(r, depth)};
}

double surface_field_margin(const TrapConfig& cfg, double z0) {
  cfg.validate();
  DipoleSource src;
  src.position = Vec3(0, 0, z0);
  src.moment = cfg.magnet.moment();
  const SheetCurrentSolution sol = ScreeningSolver(cfg.sc).solve(src);
  double worst = 0.0;
  for (const MeshNode& node : sol.mesh()) {
    const Vec3 p(node.r * std::cos(node.theta), node.r * std::sin(node.theta), 0.0);
    worst = std::max(worst, sol.total_field(p).norm());
  }
  return worst / constants::nb_lower_critical_field;
}

}  // namespace levitrap
