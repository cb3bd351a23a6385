#include "curtail/power_flow.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/SparseLU>

namespace curtail {

namespace {

constexpr int kDenseLimit = 64;  // unknowns; above this the sparse LU is used

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

double Mismatch::max_abs() const {
  double m = 0.0;
  for (double v : p) m = std::max(m, std::abs(v));
  for (double v : q) m = std::max(m, std::abs(v));
  return m;
}

PowerFlowModel::PowerFlowModel(const Grid& grid)
    : grid_(grid), ybus_(build_admittance(grid)), slack_(grid.slack_bus()) {
  const int n = grid_.size();
  if (slack_ < 0) throw std::invalid_argument("power flow needs a slack bus");
  unknown_of_.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    if (i == slack_) continue;
    unknown_of_[i] = static_cast<int>(pq_.size());
    pq_.push_back(i);
  }
  // Y is symmetric, so column j of the CSC storage is row j.
  row_start_.assign(n + 1, 0);
  for (int j = 0; j < n; ++j) {
    row_start_[j] = static_cast<int>(entries_.size());
    for (AdmittanceMatrix::InnerIterator it(ybus_, j); it; ++it)
      entries_.push_back({static_cast<int>(it.row()), it.value().real(), it.value().imag()});
  }
  row_start_[n] = static_cast<int>(entries_.size());
}

void PowerFlowModel::bus_injections(std::span<const double> vm, std::span<const double> va,
                                    std::span<double> p_out, std::span<double> q_out) const {
  const int n = grid_.size();
  for (int i = 0; i < n; ++i) {
    double p = 0.0;
    double q = 0.0;
    for (int e = row_start_[i]; e < row_start_[i + 1]; ++e) {
      const Entry& y = entries_[e];
      const double th = va[i] - va[y.col];
      const double c = std::cos(th);
      const double s = std::sin(th);
      p += vm[y.col] * (y.g * c + y.b * s);
      q += vm[y.col] * (y.g * s - y.b * c);
    }
    p_out[i] = vm[i] * p;
    q_out[i] = vm[i] * q;
  }
}

void PowerFlowModel::flows(std::span<const double> vm, std::span<const double> va, PowerFlowSolution& sol) const {
  BranchFlows bf = branch_flows(grid_, vm, va);
  sol.s_from = std::move(bf.s_from);
  sol.s_to = std::move(bf.s_to);
  sol.loading = std::move(bf.loading);
}

PowerFlowSolution PowerFlowModel::solve(const InjectionSet& inj, const PowerFlowOptions& opts) const {
  if (!(opts.tolerance > 0.0)) throw std::invalid_argument("power flow tolerance must be positive");
  const int n = grid_.size();
  if (static_cast<int>(inj.p.size()) != n || static_cast<int>(inj.q.size()) != n)
    throw std::invalid_argument("injection vectors must have one entry per bus");

  PowerFlowSolution sol;
  sol.v_mag.assign(n, 1.0);
  sol.v_ang.assign(n, 0.0);
  if (!opts.flat_start && opts.initial && static_cast<int>(opts.initial->v_mag.size()) == n &&
      static_cast<int>(opts.initial->v_ang.size()) == n) {
    sol.v_mag = opts.initial->v_mag;
    sol.v_ang = opts.initial->v_ang;
    sol.v_mag[slack_] = 1.0;
    sol.v_ang[slack_] = 0.0;
  }

  const int m = static_cast<int>(pq_.size());
  const int dim = 2 * m;
  const bool dense = opts.solver == LinearSolver::dense ||
                     (opts.solver == LinearSolver::automatic && dim <= kDenseLimit);

  std::vector<double> pc(n), qc(n);
  Eigen::VectorXd f(dim), dx(dim);
  Eigen::MatrixXd jd;
  Eigen::SparseMatrix<double> js;
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> sparse_lu;
  bool pattern_analyzed = false;

  auto evaluate = [&] {
    bus_injections(sol.v_mag, sol.v_ang, pc, qc);
    double worst = 0.0;
    for (int k = 0; k < m; ++k) {
      const int i = pq_[k];
      f[k] = pc[i] - inj.p[i];
      f[m + k] = qc[i] - inj.q[i];
      worst = std::max({worst, std::abs(f[k]), std::abs(f[m + k])});
    }
    if (!all_finite(f)) worst = std::numeric_limits<double>::infinity();
    return worst;
  };

  double worst = evaluate();
  sol.iterations = 0;
  while (worst > opts.tolerance && std::isfinite(worst) && sol.iterations < opts.max_iterations) {
    // Jacobian in [theta | V] ordering.
    auto put = [&](int r, int c, double v) {
      if (dense)
        jd(r, c) += v;
      else
        trip.emplace_back(r, c, v);
    };
    if (dense)
      jd.setZero(dim, dim);
    else
      trip.clear();

    for (int k = 0; k < m; ++k) {
      const int i = pq_[k];
      const double vi = sol.v_mag[i];
      double gii = 0.0;
      double bii = 0.0;
      for (int e = row_start_[i]; e < row_start_[i + 1]; ++e) {
        const Entry& y = entries_[e];
        const int j = y.col;
        if (j == i) {
          gii = y.g;
          bii = y.b;
          continue;
        }
        const int kj = unknown_of_[j];
        if (kj < 0) continue;
        const double th = sol.v_ang[i] - sol.v_ang[j];
        const double c = std::cos(th);
        const double s = std::sin(th);
        const double vj = sol.v_mag[j];
        const double gs_bc = y.g * s - y.b * c;
        const double gc_bs = y.g * c + y.b * s;
        put(k, kj, vi * vj * gs_bc);
        put(k, m + kj, vi * gc_bs);
        put(m + k, kj, -vi * vj * gc_bs);
        put(m + k, m + kj, vi * gs_bc);
      }
      put(k, k, -qc[i] - bii * vi * vi);
      put(k, m + k, pc[i] / vi + gii * vi);
      put(m + k, k, pc[i] - gii * vi * vi);
      put(m + k, m + k, qc[i] / vi - bii * vi);
    }

    if (dense) {
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(jd);
      const Eigen::VectorXd piv = lu.matrixLU().diagonal().cwiseAbs();
      if (dim > 0 && !(piv.minCoeff() > 1e-14 * std::max(1.0, piv.maxCoeff()))) {
        sol.singular_jacobian = true;
        break;
      }
      dx = lu.solve(-f);
    } else {
      js.resize(dim, dim);
      js.setFromTriplets(trip.begin(), trip.end());
      js.makeCompressed();
      if (!pattern_analyzed) {
        sparse_lu.analyzePattern(js);
        pattern_analyzed = true;
      }
      sparse_lu.factorize(js);
      if (sparse_lu.info() != Eigen::Success) {
        sol.singular_jacobian = true;
        break;
      }
      dx = sparse_lu.solve(-f);
    }
    if (!all_finite(dx)) {
      sol.singular_jacobian = true;
      break;
    }
    for (int k = 0; k < m; ++k) {
      const int i = pq_[k];
      sol.v_ang[i] += dx[k];
      sol.v_mag[i] += dx[m + k];
    }
    ++sol.iterations;
    worst = evaluate();
  }

  sol.max_mismatch = worst;
  sol.converged = std::isfinite(worst) && worst <= opts.tolerance && !sol.singular_jacobian;
  flows(sol.v_mag, sol.v_ang, sol);
  return sol;
}

PowerFlowSolution solve_power_flow(const Grid& grid, const InjectionSet& inj, const PowerFlowOptions& opts) {
  return PowerFlowModel(grid).solve(inj, opts);
}

Mismatch mismatch(const Grid& grid, const InjectionSet& inj, std::span<const double> v_mag,
                  std::span<const double> v_ang) {
  const int n = grid.size();
  if (static_cast<int>(v_mag.size()) != n || static_cast<int>(v_ang.size()) != n ||
      static_cast<int>(inj.p.size()) != n || static_cast<int>(inj.q.size()) != n)
    throw std::invalid_argument("mismatch: dimension mismatch");
  const PowerFlowModel model(grid);
  Mismatch r;
  r.p.assign(n, 0.0);
  r.q.assign(n, 0.0);
  model.bus_injections(v_mag, v_ang, r.p, r.q);
  const int slack = grid.slack_bus();
  for (int i = 0; i < n; ++i) {
    if (i == slack) {
      r.p[i] = 0.0;
      r.q[i] = 0.0;
      continue;
    }
    r.p[i] -= inj.p[i];
    r.q[i] -= inj.q[i];
  }
  return r;
}

BranchFlows branch_flows(const Grid& grid, std::span<const double> v_mag, std::span<const double> v_ang) {
  BranchFlows out;
  const std::size_t nl = grid.lines.size();
  out.s_from.resize(nl);
  out.s_to.resize(nl);
  out.loading.resize(nl);
  for (std::size_t l = 0; l < nl; ++l) {
    const Line& ln = grid.lines[l];
    const Complex y = 1.0 / Complex(ln.r, ln.x);
    const Complex ysh(0.0, ln.b_shunt / 2.0);
    const Complex vf = std::polar(v_mag[ln.from_bus], v_ang[ln.from_bus]);
    const Complex vt = std::polar(v_mag[ln.to_bus], v_ang[ln.to_bus]);
    const Complex i_f = (vf - vt) * y + ysh * vf;
    const Complex i_t = (vt - vf) * y + ysh * vt;
    out.s_from[l] = vf * std::conj(i_f);
    out.s_to[l] = vt * std::conj(i_t);
    out.loading[l] = std::max(std::abs(out.s_from[l]), std::abs(out.s_to[l])) / ln.s_max;
  }
  return out;
}

InjectionSet zero_injections(const Grid& grid) {
  return {std::vector<double>(grid.size(), 0.0), std::vector<double>(grid.size(), 0.0)};
}

}  // namespace curtail
