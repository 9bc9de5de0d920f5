#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "mhdg/basis.hpp"
#include "mhdg/mesh.hpp"
#include "mhdg/spaces.hpp"

namespace mhdg {

struct PhysParams {
  double re = 1.0;
  double rm = 1.0;
  double kappa = 1.0;
  double alpha1 = 125.0;
  double beta1 = 1.0;
  double beta2 = 1.0;

  double hartmann() const;
  /// Throws kParameter unless Re, Rm, kappa, beta1, beta2 are positive.
  void validate() const;
};

/// Advecting velocity w and magnetic field d as seen by one volume quadrature point.
struct VolumeSample {
  Vec2 w = Vec2::Zero();
  Vec2 d = Vec2::Zero();
  Mat2 grad_d = Mat2::Zero();  ///< grad_d(i, j) = d d_i / d x_j
};

struct FacetSample {
  double m = 0.0;  ///< w . n
  Vec2 d = Vec2::Zero();
};

/// Source of the prescribed fields w, d in the linearised operator. Facet evaluations must be
/// single-valued across interior facets.
class ConvectiveFields {
 public:
  virtual ~ConvectiveFields() = default;
  /// Volume quadrature point q of `cell`, physical location x.
  virtual VolumeSample volume(int cell, int q, const Vec2& x) const = 0;
  /// Facet quadrature point q of local facet lf of `cell`; n is the cell's outward normal.
  virtual FacetSample facet(int cell, int lf, int q, const Vec2& x, const Vec2& n) const = 0;
};

class ZeroConvection final : public ConvectiveFields {
 public:
  VolumeSample volume(int, int, const Vec2&) const override { return {}; }
  FacetSample facet(int, int, int, const Vec2&, const Vec2&) const override { return {}; }
};

/// Closed-form w, d (and grad d).
class AnalyticConvection final : public ConvectiveFields {
 public:
  using Field = std::function<Vec2(const Vec2&)>;
  using Gradient = std::function<Mat2(const Vec2&)>;

  AnalyticConvection(Field w, Field d, Gradient grad_d)
      : w_(std::move(w)), d_(std::move(d)), grad_d_(std::move(grad_d)) {}

  VolumeSample volume(int cell, int q, const Vec2& x) const override;
  FacetSample facet(int cell, int lf, int q, const Vec2& x, const Vec2& n) const override;

 private:
  Field w_, d_;
  Gradient grad_d_;
};

struct Forcing {
  VectorField g;  ///< momentum source; empty means zero
  VectorField f;  ///< induction source; empty means zero
};

/// Element traces of (L, u, p, J, b, r) at a facet point. J is the scalar 2D current.
struct TraceValues {
  Mat2 L = Mat2::Zero();
  Vec2 u = Vec2::Zero();
  double p = 0.0;
  double J = 0.0;
  Vec2 b = Vec2::Zero();
  double r = 0.0;
};

struct HatValues {
  Vec2 u = Vec2::Zero();
  double p = 0.0;
  Vec2 b = Vec2::Zero();
  double r = 0.0;
};

/// Normal components of the six numerical fluxes. Planar vectors are embedded in 3D with a zero
/// third component; scalar cross products are the out-of-plane components.
struct FluxValues {
  Mat2 f1 = Mat2::Zero();  ///< -uhat (x) n
  Vec2 f2 = Vec2::Zero();
  double f3 = 0.0;
  double f4 = 0.0;  ///< -n x bhat
  Vec2 f5 = Vec2::Zero();
  double f6 = 0.0;
  /// Individual contributions to f2 and f5, for inspection.
  Vec2 f2_stabilization = Vec2::Zero();  ///< alpha1 (u - uhat)
  Vec2 f2_coupling = Vec2::Zero();       ///< kappa/2 d x (n x (b + bhat))
  Vec2 f5_stabilization = Vec2::Zero();  ///< (beta1 T + beta2 N)(b - bhat)
  Vec2 f5_coupling = Vec2::Zero();       ///< -kappa/2 n x ((u + uhat) x d)
};

FluxValues eval_numerical_flux(const TraceValues& local, const HatValues& hat, const Vec2& n,
                               double m, const Vec2& d, const PhysParams& params);

/// Unique global facet dofs touched by one cell, plus the map from local trace slots.
///
/// Slots run over local facet lf, then field (uhat x2, phat, bhat x2, rhat), component, node.
struct ElementTrace {
  std::vector<int> dofs;
  std::vector<int> slot_to_index;
};

int trace_slots_per_facet(int k);
int trace_slot(int k, int lf, FacetField field, int comp, int node);
ElementTrace element_trace(const DofLayout& layout, const Mesh& mesh, int cell);

/// Element equations over local unknowns (L, u, p, J, b, r) and the element's facet dofs.
/// Rows of a_gl/a_gg are this element's contributions to the facet (conservation/boundary) rows.
struct LocalMatrices {
  int cell = -1;
  Eigen::MatrixXd a_ll;
  Eigen::MatrixXd a_lg;
  Eigen::MatrixXd a_gl;
  Eigen::MatrixXd a_gg;
  Eigen::VectorXd f_l;
  ElementTrace trace;
};

LocalMatrices assemble_local(const Mesh& mesh, int cell, const PhysParams& params,
                             const ConvectiveFields& conv, const Forcing& forcing,
                             const ReferenceElement& refel, const DofLayout& layout);

/// Local system with the auxiliary fields L and J expressed through the others:
/// aux = aux_rhs - aux_from_primary * primary - aux_from_trace * trace.
struct ReducedLocalMatrices {
  int cell = -1;
  std::vector<int> primary;    ///< local positions of (u, p, b, r)
  std::vector<int> auxiliary;  ///< local positions of (L, J)
  Eigen::MatrixXd a_pp, a_pg, a_gp, a_gg;
  Eigen::VectorXd f_p, f_g;
  Eigen::MatrixXd aux_from_primary, aux_from_trace;
  Eigen::VectorXd aux_rhs;
  ElementTrace trace;
};

ReducedLocalMatrices eliminate_auxiliary(const LocalMatrices& lm, const DofLayout& layout);

/// Schur complement of one element onto its facet dofs, with what reconstruction needs.
struct CondensedBlock {
  int cell = -1;
  Eigen::MatrixXd schur;
  Eigen::VectorXd rhs;
  ElementTrace trace;

  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  Eigen::MatrixXd a_pp;
  std::vector<int> primary, auxiliary;
  Eigen::MatrixXd a_pg;
  Eigen::VectorXd f_p;
  Eigen::MatrixXd aux_from_primary, aux_from_trace;
  Eigen::VectorXd aux_rhs;
  int local_size = 0;
};

/// Condenses after eliminating L and J.
CondensedBlock condense(const LocalMatrices& lm, const DofLayout& layout);
/// Condenses the full local block without the auxiliary elimination.
CondensedBlock condense_full(const LocalMatrices& lm);

/// Local coefficients from the element's facet values (ordered as cb.trace.dofs).
Eigen::VectorXd reconstruct_local(const CondensedBlock& cb, const Eigen::VectorXd& trace_values);

/// Gathers the element's facet values out of a global facet vector.
Eigen::VectorXd gather_trace(const ElementTrace& trace, const Eigen::VectorXd& facet);

}  // namespace mhdg
