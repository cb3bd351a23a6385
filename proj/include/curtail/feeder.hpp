#pragma once

#include <cstdint>

#include "curtail/grid.hpp"

namespace curtail {

/// Parameters of the synthetic low-voltage feeder. Values are per-unit on
/// 1 MVA / 0.4 kV unless noted.
struct FeederOptions {
  int buses = 15;
  double controllable_share = 0.07;  // fraction of buses that are controllable (and observable)
  double transformer_r = 0.02;
  double transformer_x = 0.08;
  double transformer_rating = 0.40;
  double segment_r = 0.07;  // per trunk segment
  double segment_x = 0.03;
  double trunk_rating = 0.14;
  double lateral_rating = 0.12;
  double lateral_share = 0.3;      // fraction of load buses hung off laterals
  double plant_rating = 0.28;      // p_max of each controllable PV plant
  double plant_q_share = 0.4;      // reactive capability as a share of plant_rating
  double length_jitter = 0.3;      // +/- relative variation of segment impedances
};

/// Radial feeder: slack (MV side) -> transformer-equivalent line -> trunk with
/// laterals. Controllable buses are placed at the electrically farthest trunk
/// positions; cost is curtailment-penalizing (decreasing in P).
[[nodiscard]] Grid make_feeder(const FeederOptions& opts, std::uint64_t seed);

}  // namespace curtail
