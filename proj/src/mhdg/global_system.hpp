#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "mhdg/basis.hpp"
#include "mhdg/local_solver.hpp"
#include "mhdg/mesh.hpp"
#include "mhdg/spaces.hpp"

namespace mhdg {

/// Treatment of the magnetic multiplier trace on the boundary.
enum class MultiplierBc {
  kStrongZero,        ///< rhat = 0 eliminated
  kNormalConstraint,  ///< rhat free, rows <(b - bhat).n, gamma> = 0
};

/// Facet dofs removed from the global system and their prescribed values.
struct Constraints {
  std::vector<char> eliminated;
  Eigen::VectorXd values;
  int pinned = -1;  ///< pressure trace dof fixed to zero
  /// Multiplier trace dof fixed to zero when boundary rhat is left free; -1 otherwise.
  int pinned_multiplier = -1;
};

/// Boundary velocity/magnetic traces from `boundary_values`, boundary rhat per `mode`, and one
/// pinned pressure trace dof (the lowest-numbered boundary one). With a free boundary rhat the
/// multiplier is defined up to a constant as well, and its lowest boundary dof is pinned.
Constraints build_constraints(const DofLayout& layout, const Eigen::VectorXd& boundary_values,
                              MultiplierBc mode);

struct SparseSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
  std::vector<int> free_to_global;
  std::vector<int> global_to_free;  ///< -1 for eliminated dofs
  Eigen::VectorXd fixed;            ///< global vector holding the eliminated values
  int size() const { return static_cast<int>(free_to_global.size()); }
};

SparseSystem assemble_global(const Mesh& m, const DofLayout& layout,
                             const std::vector<CondensedBlock>& blocks, const Constraints& bc);

/// Sparse LU with COLAMD ordering; returns the full facet vector including eliminated values.
/// Throws kSingular on a zero pivot or when the relative residual exceeds 1e-10.
Eigen::VectorXd solve_condensed(const SparseSystem& sys, double* relative_residual = nullptr);

/// Coefficients of all element fields and facet fields.
struct FieldState {
  int local_size = 0;
  Eigen::VectorXd local;  ///< cell-major, each cell holding (L, u, p, J, b, r)
  Eigen::VectorXd facet;

  Eigen::VectorXd::SegmentReturnType cell(int c) { return local.segment(c * local_size, local_size); }
  Eigen::VectorXd::ConstSegmentReturnType cell(int c) const {
    return local.segment(c * local_size, local_size);
  }
};

/// Shifts p_h and phat_h by a constant so that (p_h, 1) = 0.
void post_normalize_pressure(FieldState& state, const Mesh& m, const DofLayout& layout,
                             const ReferenceElement& refel);
/// Same for r_h and rhat_h.
void post_normalize_multiplier(FieldState& state, const Mesh& m, const DofLayout& layout,
                               const ReferenceElement& refel);
double pressure_mean(const FieldState& state, const Mesh& m, const DofLayout& layout,
                     const ReferenceElement& refel);
/// Mean of a P_{k-1} field (p or r).
double low_field_mean(const FieldState& state, const Mesh& m, const DofLayout& layout,
                      const ReferenceElement& refel, LocalField field);

/// Assembles the un-condensed system (local equations plus facet rows) and solves it directly.
/// Meant as a testing oracle on small meshes.
FieldState solve_monolithic(const Mesh& m, const DofLayout& layout,
                            const std::vector<LocalMatrices>& locals, const Constraints& bc);

/// Field values at one volume quadrature point of a cell.
struct PointFields {
  Mat2 L = Mat2::Zero();
  Vec2 u = Vec2::Zero();
  double p = 0.0;
  double J = 0.0;
  Vec2 b = Vec2::Zero();
  double r = 0.0;
  Mat2 grad_u = Mat2::Zero();
  Mat2 grad_b = Mat2::Zero();
};

PointFields evaluate_cell(const FieldState& state, const DofLayout& layout,
                          const ReferenceElement& refel, const AffineMap& map, int cell, int q);

/// Element traces of u_h and b_h at facet quadrature point q of local facet lf.
void evaluate_trace(const FieldState& state, const Mesh& m, const DofLayout& layout,
                    const ReferenceElement& refel, int cell, int lf, int q, Vec2& u, Vec2& b);

/// Facet unknowns uhat, bhat at facet quadrature point q of global facet e.
void evaluate_hat(const FieldState& state, const DofLayout& layout, const ReferenceElement& refel,
                  int facet, int q, Vec2& uhat, Vec2& bhat);

/// Coordinate-format text dump, one "row col value" per line, 0-based.
void write_matrix_coo(const Eigen::SparseMatrix<double>& a, const std::string& path);

}  // namespace mhdg
