#include "levitrap/actuation.hpp"

#include <memory>

#include "levitrap/error.hpp"
#include "parallel.hpp"

namespace levitrap {

std::vector<WireSweepRow> wire_sweep(const TrapConfig& cfg, const WireSource& wire,
                                     const std::vector<double>& currents, const WireSweepOptions& opt) {
  cfg.validate();
  WireSource unit = wire;
  unit.current = 1.0;
  unit.validate();

  const TrapModel bare(cfg);
  const double a = bare.hole_radius();
  const double z_ref = bare.equilibrium_height(cfg.target_ratio * a);
  if (!(wire.height > z_ref + cfg.magnet.radius)) {
    throw Error(ErrorCode::InvalidArgument, "wire must sit above the magnet");
  }

  // The field is linear in the current: one solve for 1 A, scaled per point.
  std::shared_ptr<const SheetCurrentSolution> sol;
  if (opt.screened) sol = std::make_shared<const SheetCurrentSolution>(solve_sheet_current(cfg.sc, unit));
  auto unit_field = [sol, unit](const Vec3& r) -> Vec3 {
    return sol ? sol->total_field(r) : wire_field(unit, r);
  };

  const double mu = cfg.magnet.moment();
  std::vector<WireSweepRow> rows(currents.size());
  detail::parallel_for(currents.size(), opt.threads, [&](std::size_t i) {
    const double current = currents[i];
    rows[i].current = current;
    try {
      TrapModel::ExtraEnergy extra;
      if (current != 0.0) {
        extra = [=](const Vec3& r, double beta) {
          const Vec3 m = mu * Orientation{Orientation{}.alpha, beta}.unit_vector();
          return -current * m.dot(unit_field(r));
        };
      }
      const TrapModel model(cfg, extra);
      try {
        rows[i].trap = model.characterize(model.equilibrium_height(z_ref), false);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoTrap && e.code() != ErrorCode::UnstableTrap) throw;
        throw Error(ErrorCode::TrapLost, e.what());
      }
    } catch (const std::exception& e) {
      rows[i].error = e.what();
    }
  });
  return rows;
}

}  // namespace levitrap
