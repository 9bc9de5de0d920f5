#include "mhdg/global_system.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

#include <Eigen/SparseLU>

#include "mhdg/error.hpp"

namespace mhdg {

Constraints build_constraints(const DofLayout& layout, const Eigen::VectorXd& boundary_values,
                              MultiplierBc mode) {
  Constraints c;
  const int n = layout.num_facet_dofs();
  c.eliminated.assign(n, 0);
  c.values = Eigen::VectorXd::Zero(n);
  for (FacetField f : {FacetField::kVelocity, FacetField::kMagnetic}) {
    for (int d : layout.boundary_dofs(f)) {
      c.eliminated[d] = 1;
      c.values(d) = boundary_values(d);
    }
  }
  if (mode == MultiplierBc::kStrongZero) {
    for (int d : layout.boundary_dofs(FacetField::kMultiplier)) c.eliminated[d] = 1;
  }
  const auto& pb = layout.boundary_dofs(FacetField::kPressure);
  if (pb.empty()) fail(ErrorCode::kInternal, "mesh has no boundary pressure trace dofs");
  c.pinned = pb.front();
  c.eliminated[c.pinned] = 1;
  if (mode == MultiplierBc::kNormalConstraint) {
    const auto& rb = layout.boundary_dofs(FacetField::kMultiplier);
    if (rb.empty()) fail(ErrorCode::kInternal, "mesh has no boundary multiplier trace dofs");
    c.pinned_multiplier = rb.front();
    c.eliminated[c.pinned_multiplier] = 1;
  }
  return c;
}

namespace {

void index_free(const Constraints& bc, std::vector<int>& free_to_global,
                std::vector<int>& global_to_free) {
  global_to_free.assign(bc.eliminated.size(), -1);
  free_to_global.clear();
  for (std::size_t i = 0; i < bc.eliminated.size(); ++i) {
    if (!bc.eliminated[i]) {
      global_to_free[i] = static_cast<int>(free_to_global.size());
      free_to_global.push_back(static_cast<int>(i));
    }
  }
}

}  // namespace

SparseSystem assemble_global(const Mesh& m, const DofLayout& layout,
                             const std::vector<CondensedBlock>& blocks, const Constraints& bc) {
  if (static_cast<int>(blocks.size()) != m.num_cells()) {
    fail(ErrorCode::kInvalidArgument, "one condensed block per cell is required");
  }
  if (static_cast<int>(bc.eliminated.size()) != layout.num_facet_dofs()) {
    fail(ErrorCode::kInvalidArgument, "constraints do not match the dof layout");
  }
  SparseSystem sys;
  index_free(bc, sys.free_to_global, sys.global_to_free);
  sys.fixed = bc.values;
  const int n = sys.size();
  sys.rhs = Eigen::VectorXd::Zero(n);

  // Pattern first: count entries so the triplet buffer is sized once.
  std::size_t nnz = 0;
  for (const auto& cb : blocks) nnz += cb.trace.dofs.size() * cb.trace.dofs.size();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(nnz);
  for (const auto& cb : blocks) {
    const auto& dofs = cb.trace.dofs;
    const int nd = static_cast<int>(dofs.size());
    if (cb.schur.rows() != nd) fail(ErrorCode::kInternal, "condensed block size mismatch");
    for (int i = 0; i < nd; ++i) {
      const int fi = sys.global_to_free[dofs[i]];
      if (fi < 0) continue;
      sys.rhs(fi) += cb.rhs(i);
      for (int j = 0; j < nd; ++j) {
        const int fj = sys.global_to_free[dofs[j]];
        if (fj >= 0) {
          trip.emplace_back(fi, fj, cb.schur(i, j));
        } else {
          sys.rhs(fi) -= cb.schur(i, j) * bc.values(dofs[j]);
        }
      }
    }
  }
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  sys.matrix.makeCompressed();
  return sys;
}

namespace {

Eigen::VectorXd sparse_lu_solve(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b,
                                double* relative_residual) {
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success) {
    fail(ErrorCode::kSingular,
         "global system is singular (" + lu.lastErrorMessage() +
             "); likely causes: stabilization parameters too small or a missing pressure gauge");
  }
  Eigen::VectorXd x = lu.solve(b);
  const double bn = b.norm();
  double rel = 0.0;
  // A couple of refinement sweeps tighten the residual on poorly scaled systems.
  for (int it = 0; it < 3; ++it) {
    const Eigen::VectorXd r = b - a * x;
    rel = bn > 0.0 ? r.norm() / bn : r.norm();
    if (rel <= 1e-13) break;
    x += lu.solve(r);
  }
  const Eigen::VectorXd r = b - a * x;
  rel = bn > 0.0 ? r.norm() / bn : r.norm();
  if (relative_residual) *relative_residual = rel;
  if (!std::isfinite(rel) || rel > 1e-10) {
    fail(ErrorCode::kSingular, "direct solve residual " + std::to_string(rel) +
                                   " exceeds 1e-10; the system is numerically singular");
  }
  return x;
}

}  // namespace

Eigen::VectorXd solve_condensed(const SparseSystem& sys, double* relative_residual) {
  Eigen::VectorXd full = sys.fixed;
  if (sys.size() == 0) return full;
  const Eigen::VectorXd x = sparse_lu_solve(sys.matrix, sys.rhs, relative_residual);
  for (int i = 0; i < sys.size(); ++i) full(sys.free_to_global[i]) = x(i);
  return full;
}

double low_field_mean(const FieldState& state, const Mesh& m, const DofLayout& layout,
                      const ReferenceElement& refel, LocalField field) {
  const int off = layout.local_offset(field);
  const int nl = layout.n_low();
  const auto& rule = refel.volume_rule();
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(rule.w.data(), rule.size());
  // Integral of each low-order basis function over the reference cell.
  const Eigen::VectorXd basis_int = refel.low_values().transpose() * w;
  double integral = 0.0;
  double area = 0.0;
  for (int c = 0; c < m.num_cells(); ++c) {
    const double det = 2.0 * m.cell_area(c);
    integral += det * basis_int.dot(state.cell(c).segment(off, nl));
    area += m.cell_area(c);
  }
  return integral / area;
}

double pressure_mean(const FieldState& state, const Mesh& m, const DofLayout& layout,
                     const ReferenceElement& refel) {
  return low_field_mean(state, m, layout, refel, LocalField::kP);
}

namespace {

void shift_to_zero_mean(FieldState& state, const Mesh& m, const DofLayout& layout,
                        const ReferenceElement& refel, LocalField local, FacetField facet) {
  const double mean = low_field_mean(state, m, layout, refel, local);
  const int off = layout.local_offset(local);
  const int nl = layout.n_low();
  for (int c = 0; c < m.num_cells(); ++c) state.cell(c).segment(off, nl).array() -= mean;
  state.facet.segment(layout.field_offset(facet), layout.field_size(facet)).array() -= mean;
}

}  // namespace

void post_normalize_pressure(FieldState& state, const Mesh& m, const DofLayout& layout,
                             const ReferenceElement& refel) {
  shift_to_zero_mean(state, m, layout, refel, LocalField::kP, FacetField::kPressure);
}

void post_normalize_multiplier(FieldState& state, const Mesh& m, const DofLayout& layout,
                               const ReferenceElement& refel) {
  shift_to_zero_mean(state, m, layout, refel, LocalField::kR, FacetField::kMultiplier);
}

FieldState solve_monolithic(const Mesh& m, const DofLayout& layout,
                            const std::vector<LocalMatrices>& locals, const Constraints& bc) {
  std::vector<int> free_to_global, global_to_free;
  index_free(bc, free_to_global, global_to_free);
  const int NL = layout.local_size();
  const int nloc = NL * m.num_cells();
  const int n = nloc + static_cast<int>(free_to_global.size());
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (const auto& lm : locals) {
    const int base = lm.cell * NL;
    const auto& dofs = lm.trace.dofs;
    const int nd = static_cast<int>(dofs.size());
    for (int i = 0; i < NL; ++i) {
      rhs(base + i) += lm.f_l(i);
      for (int j = 0; j < NL; ++j) {
        if (lm.a_ll(i, j) != 0.0) trip.emplace_back(base + i, base + j, lm.a_ll(i, j));
      }
      for (int j = 0; j < nd; ++j) {
        const int fj = global_to_free[dofs[j]];
        if (fj >= 0) {
          trip.emplace_back(base + i, nloc + fj, lm.a_lg(i, j));
        } else {
          rhs(base + i) -= lm.a_lg(i, j) * bc.values(dofs[j]);
        }
      }
    }
    for (int i = 0; i < nd; ++i) {
      const int fi = global_to_free[dofs[i]];
      if (fi < 0) continue;
      for (int j = 0; j < NL; ++j) {
        if (lm.a_gl(i, j) != 0.0) trip.emplace_back(nloc + fi, base + j, lm.a_gl(i, j));
      }
      for (int j = 0; j < nd; ++j) {
        const int fj = global_to_free[dofs[j]];
        if (fj >= 0) {
          trip.emplace_back(nloc + fi, nloc + fj, lm.a_gg(i, j));
        } else {
          rhs(nloc + fi) -= lm.a_gg(i, j) * bc.values(dofs[j]);
        }
      }
    }
  }
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();
  const Eigen::VectorXd x = sparse_lu_solve(a, rhs, nullptr);
  FieldState s;
  s.local_size = NL;
  s.local = x.head(nloc);
  s.facet = bc.values;
  for (std::size_t i = 0; i < free_to_global.size(); ++i) s.facet(free_to_global[i]) = x(nloc + i);
  return s;
}

PointFields evaluate_cell(const FieldState& state, const DofLayout& layout,
                          const ReferenceElement& refel, const AffineMap& map, int cell, int q) {
  const int n = layout.n_cell();
  const int nl = layout.n_low();
  const auto x = state.cell(cell);
  const Eigen::VectorXd phi = refel.cell_values().row(q).transpose();
  const Eigen::VectorXd chi = refel.low_values().row(q).transpose();
  Eigen::MatrixX2d gref(n, 2);
  gref.col(0) = refel.cell_dxi().row(q).transpose();
  gref.col(1) = refel.cell_deta().row(q).transpose();
  const Eigen::MatrixX2d gphi = gref * map.inverse;
  const int oL = layout.local_offset(LocalField::kL);
  const int oU = layout.local_offset(LocalField::kU);
  const int oB = layout.local_offset(LocalField::kB);
  PointFields pf;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) pf.L(i, j) = phi.dot(x.segment(oL + (2 * i + j) * n, n));
    pf.u(i) = phi.dot(x.segment(oU + i * n, n));
    pf.b(i) = phi.dot(x.segment(oB + i * n, n));
    pf.grad_u.row(i) = x.segment(oU + i * n, n).transpose() * gphi;
    pf.grad_b.row(i) = x.segment(oB + i * n, n).transpose() * gphi;
  }
  pf.p = chi.dot(x.segment(layout.local_offset(LocalField::kP), nl));
  pf.J = phi.dot(x.segment(layout.local_offset(LocalField::kJ), n));
  pf.r = chi.dot(x.segment(layout.local_offset(LocalField::kR), nl));
  return pf;
}

void evaluate_trace(const FieldState& state, const Mesh& m, const DofLayout& layout,
                    const ReferenceElement& refel, int cell, int lf, int q, Vec2& u, Vec2& b) {
  const int n = layout.n_cell();
  const int orient = m.cell_facets(cell)[lf].sign > 0 ? 0 : 1;
  const Eigen::VectorXd ph = refel.trace(lf, orient).row(q).transpose();
  const auto x = state.cell(cell);
  const int oU = layout.local_offset(LocalField::kU);
  const int oB = layout.local_offset(LocalField::kB);
  for (int i = 0; i < 2; ++i) {
    u(i) = ph.dot(x.segment(oU + i * n, n));
    b(i) = ph.dot(x.segment(oB + i * n, n));
  }
}

void evaluate_hat(const FieldState& state, const DofLayout& layout, const ReferenceElement& refel,
                  int facet, int q, Vec2& uhat, Vec2& bhat) {
  uhat.setZero();
  bhat.setZero();
  for (int j = 0; j <= layout.k(); ++j) {
    const double psi = refel.facet_values()(q, j);
    for (int c = 0; c < 2; ++c) {
      uhat(c) += psi * state.facet(layout.dof(FacetField::kVelocity, facet, j, c));
      bhat(c) += psi * state.facet(layout.dof(FacetField::kMagnetic, facet, j, c));
    }
  }
}

void write_matrix_coo(const Eigen::SparseMatrix<double>& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot write matrix dump " + path);
  out << std::setprecision(17);
  for (int col = 0; col < a.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, col); it; ++it) {
      out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
}

}  // namespace mhdg
