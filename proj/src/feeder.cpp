#include "curtail/feeder.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace curtail {

Grid make_feeder(const FeederOptions& opts, std::uint64_t seed) {
  if (opts.buses < 3) throw std::invalid_argument("feeder needs at least 3 buses");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(1.0 - opts.length_jitter, 1.0 + opts.length_jitter);

  Grid g;
  g.base_mva = 1.0;
  g.base_kv = 0.4;
  const int n = opts.buses;
  for (int i = 0; i < n; ++i) {
    Bus b;
    b.id = i;
    b.kind = i == 0 ? BusKind::slack : BusKind::pq;
    g.buses.push_back(b);
  }
  g.lines.push_back({0, 1, opts.transformer_r, opts.transformer_x, 0.0, opts.transformer_rating});

  const int downstream = n - 2;  // buses after the LV busbar
  const int n_lateral = std::clamp(static_cast<int>(std::lround(opts.lateral_share * downstream)), 0,
                                   std::max(0, downstream - 1));
  const int n_trunk = downstream - n_lateral;

  std::vector<int> trunk = {1};
  for (int t = 0; t < n_trunk; ++t) {
    const int bus = 2 + t;
    const double f = jitter(rng);
    g.lines.push_back({trunk.back(), bus, opts.segment_r * f, opts.segment_x * f, 0.0, opts.trunk_rating});
    trunk.push_back(bus);
  }
  std::uniform_int_distribution<std::size_t> attach(1, trunk.size() - 1);
  for (int l = 0; l < n_lateral; ++l) {
    const int bus = 2 + n_trunk + l;
    const int parent = trunk[attach(rng)];
    const double f = jitter(rng);
    g.lines.push_back({parent, bus, opts.segment_r * f, opts.segment_x * f, 0.0, opts.lateral_rating});
  }

  const int n_ctrl = std::max(1, static_cast<int>(std::lround(opts.controllable_share * n)));
  const double q_cap = opts.plant_q_share * opts.plant_rating;
  for (int c = 0; c < n_ctrl && c < static_cast<int>(trunk.size()) - 1; ++c) {
    Bus& b = g.buses[trunk[trunk.size() - 1 - c]];
    b.controllable = true;
    b.observable = true;
    b.p_min = 0.0;
    b.p_max = opts.plant_rating;
    b.q_min = -q_cap;
    b.q_max = q_cap;
    b.cost_coeffs = {0.0, -1.0, 0.05};
  }
  return g;
}

}  // namespace curtail
