#pragma once

#include <optional>
#include <string>
#include <vector>

#include "levitrap/trap.hpp"

namespace levitrap {

struct WireSweepRow {
  double current = 0.0;  // A
  std::optional<TrapCharacterization> trap;  // depth search skipped
  std::string error;
};

struct WireSweepOptions {
  /// Include the sheet response to the wire field (otherwise free-space wire).
  bool screened = true;
  int threads = 0;
};

/// Re-equilibrates and re-characterises the trap for each wire current.
/// cfg.sc.hole_radius must already hold the physical hole radius; the
/// wire's `current` field is ignored.
std::vector<WireSweepRow> wire_sweep(const TrapConfig& cfg, const WireSource& wire,
                                     const std::vector<double>& currents,
                                     const WireSweepOptions& opt = {});

}  // namespace levitrap
