#include "curtail/admittance.hpp"

#include <vector>

namespace curtail {

AdmittanceMatrix build_admittance(const Grid& grid) {
  const int n = grid.size();
  std::vector<Eigen::Triplet<Complex>> entries;
  entries.reserve(4 * grid.lines.size());
  for (const auto& ln : grid.lines) {
    const Complex y = 1.0 / Complex(ln.r, ln.x);
    const Complex half_shunt(0.0, ln.b_shunt / 2.0);
    entries.emplace_back(ln.from_bus, ln.from_bus, y + half_shunt);
    entries.emplace_back(ln.to_bus, ln.to_bus, y + half_shunt);
    entries.emplace_back(ln.from_bus, ln.to_bus, -y);
    entries.emplace_back(ln.to_bus, ln.from_bus, -y);
  }
  AdmittanceMatrix y(n, n);
  y.setFromTriplets(entries.begin(), entries.end());
  y.makeCompressed();
  return y;
}

}  // namespace curtail
