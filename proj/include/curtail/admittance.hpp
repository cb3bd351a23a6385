#pragma once

#include <complex>

#include <Eigen/SparseCore>

#include "curtail/grid.hpp"

namespace curtail {

using Complex = std::complex<double>;

/// Nodal admittance matrix in compressed column form. Symmetric for the
/// pi-model without phase shifters, so column j doubles as row j.
using AdmittanceMatrix = Eigen::SparseMatrix<Complex>;

/// Standard pi-model assembly: Y_ij = -y_series for every line (i,j),
/// Y_ii = sum of incident series admittances + j*b_shunt/2 per incident line.
[[nodiscard]] AdmittanceMatrix build_admittance(const Grid& grid);

}  // namespace curtail
