#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "mhdg/basis.hpp"
#include "mhdg/global_system.hpp"
#include "mhdg/local_solver.hpp"
#include "mhdg/mesh.hpp"
#include "mhdg/spaces.hpp"

namespace mhdg {

/// Data of one boundary value problem: parameters, sources and Dirichlet data for u and b.
struct Problem {
  PhysParams params;
  Forcing forcing;
  VectorField u_d;  ///< empty means zero
  VectorField b_d;
};

struct SolveOptions {
  MultiplierBc rhat_bc = MultiplierBc::kStrongZero;
  int threads = 1;
  bool keep_matrix = false;
  /// Violating alpha1 > sup|w|/2 is an error when set, a warning otherwise.
  bool strict_stabilization = true;
  /// Solve the uncondensed system instead (small meshes only; used as an oracle).
  bool monolithic = false;
};

struct Timings {
  double assembly = 0.0;
  double solve = 0.0;
  double reconstruct = 0.0;

  Timings& operator+=(const Timings& o) {
    assembly += o.assembly;
    solve += o.solve;
    reconstruct += o.reconstruct;
    return *this;
  }
};

struct LinearSolution {
  FieldState state;
  Timings timings;
  int system_size = 0;
  double residual = 0.0;
  double sup_w = 0.0;
  std::vector<std::string> warnings;
  Eigen::SparseMatrix<double> matrix;  ///< condensed matrix when keep_matrix is set
  Eigen::VectorXd rhs;
};

/// Largest |w| over all volume quadrature points.
double sampled_sup(const Mesh& m, const ReferenceElement& refel, const ConvectiveFields& conv);

/// Solves the linearised problem with prescribed w, d.
LinearSolution solve_linear(const Mesh& m, const DofLayout& layout, const ReferenceElement& refel,
                            const Problem& prob, const ConvectiveFields& conv,
                            const SolveOptions& opts = {});

/// w = u_h and d = b_h of a previous state inside cells; on facets m = u_h.n from the element
/// trace (single-valued for divergence-conforming u_h) and d = bhat_h.
class DiscreteConvection final : public ConvectiveFields {
 public:
  DiscreteConvection(const FieldState& state, const Mesh& m, const DofLayout& layout,
                     const ReferenceElement& refel);

  VolumeSample volume(int cell, int q, const Vec2& x) const override;
  FacetSample facet(int cell, int lf, int q, const Vec2& x, const Vec2& n) const override;

 private:
  const FieldState& state_;
  const Mesh& mesh_;
  const DofLayout& layout_;
  const ReferenceElement& refel_;
  std::vector<AffineMap> maps_;
};

struct PicardConfig {
  double epsilon = 1e-10;
  int max_iter = 100;
  double damping = 1.0;
};

struct PicardHistory {
  std::vector<double> change_u;
  std::vector<double> change_b;
  bool converged = false;
  int iterations = 0;
};

struct NonlinearSolution {
  FieldState state;
  PicardHistory history;
  Timings timings;  ///< summed over iterations
  int system_size = 0;
  std::vector<std::string> warnings;
  Eigen::SparseMatrix<double> matrix;  ///< last condensed matrix when keep_matrix is set
};

/// Called after every iterate with the iteration number (1-based) and the new state.
using IterateObserver = std::function<void(int, const FieldState&)>;

/// Plain Picard iteration from zero fields. Does not throw on stagnation; check
/// history.converged.
NonlinearSolution solve_nonlinear(const Mesh& m, const DofLayout& layout,
                                  const ReferenceElement& refel, const Problem& prob,
                                  const PicardConfig& cfg, const SolveOptions& opts = {},
                                  const IterateObserver& observer = {});

/// L2 norm of u_h (field = kU) or b_h (kB) over the mesh.
double vector_l2(const FieldState& state, const Mesh& m, const DofLayout& layout,
                 const ReferenceElement& refel, LocalField field);

}  // namespace mhdg
