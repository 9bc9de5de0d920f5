#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mhdg/global_system.hpp"
#include "mhdg/jet.hpp"
#include "mhdg/local_solver.hpp"
#include "mhdg/mesh.hpp"
#include "mhdg/picard.hpp"
#include "mhdg/spaces.hpp"

namespace mhdg {

enum class CaseKind { kSmooth2d, kSingular2d, kHartmann, kNonlinearSmooth2d };

const char* case_name(CaseKind kind);
/// Throws kInvalidArgument for unknown names.
CaseKind parse_case(const std::string& name);

/// Exact fields at one point, with derivatives. p has zero mean over the domain.
struct ExactPoint {
  JetVec u, b;
  Jet p, r;
};

/// A manufactured solution with its prescribed fields and meshes.
struct ManufacturedCase {
  CaseKind kind = CaseKind::kSmooth2d;
  PhysParams params;
  double p0 = 1.0;
  bool nonlinear = false;
  std::function<ExactPoint(const Vec2&)> exact;
  /// Prescribed w, d for linear cases; unused for nonlinear ones (w = u, d = b there).
  std::function<JetVec(const Vec2&)> w, d;
  std::function<Mesh(int)> mesh;

  Vec2 u(const Vec2& x) const { return exact(x).u.value(); }
  Vec2 b(const Vec2& x) const { return exact(x).b.value(); }
  double p(const Vec2& x) const { return exact(x).p.v; }
  double r(const Vec2& x) const { return exact(x).r.v; }
  /// Re L = grad u.
  Mat2 L(const Vec2& x) const { return exact(x).u.grad() / params.re; }
  /// Rm/kappa J = curl b.
  double J(const Vec2& x) const { return params.kappa / params.rm * exact(x).b.curl(); }

  /// Momentum and induction sources making the exact fields solve the (linearised) system.
  Vec2 g(const Vec2& x) const;
  Vec2 f(const Vec2& x) const;

  Problem problem() const;
  /// Analytic w, d for linear cases.
  std::unique_ptr<ConvectiveFields> convection() const;
};

/// Vortex solution on the unit square, w = u and d = b; p = p0 (sin(pi x) sin(pi y) - 4/pi^2).
ManufacturedCase case_smooth2d(const PhysParams& params, double p0);
/// Corner singularity on the L-shape, w = 0, d = (-1, 1).
ManufacturedCase case_singular2d(const PhysParams& params);
/// Hartmann channel flow on (0, 0.025) x (-1, 1), g = (1, 0), f = 0.
ManufacturedCase case_hartmann(const PhysParams& params);
ManufacturedCase make_case(CaseKind kind, const PhysParams& params, double p0);

/// Mean of the singular-case pressure formula over the L-shape (before shifting).
double singular_pressure_mean();
/// Mean of sinh(Ha y)/sinh(Ha) - y squared over (-1, 1).
double hartmann_profile_square_mean(double ha);

struct ErrorReport {
  double err_L = 0.0;  ///< Re ||L - L_h||
  double err_u = 0.0;
  double err_p = 0.0;
  double err_J = 0.0;  ///< Rm/kappa ||J - J_h||
  double err_b = 0.0;
  double err_r = 0.0;
  double div_u = 0.0;  ///< max |div u_h| at quadrature points
  double div_b = 0.0;
  double max_u = 0.0;  ///< max |u_h| at quadrature points
  double max_b = 0.0;
};

ErrorReport error_norms(const FieldState& state, const ManufacturedCase& mc, const Mesh& m,
                        const DofLayout& layout, const ReferenceElement& refel);

/// Divergence and normal-continuity diagnostics of a discrete state.
struct InvariantReport {
  double div_u = 0.0, div_b = 0.0;
  double max_u = 0.0, max_b = 0.0;
  double jump_u = 0.0, jump_b = 0.0;  ///< max |[[v_h . n]]| on interior facets
  double boundary_u = 0.0;            ///< max |(u_h - uhat_h) . n| on the boundary
  double boundary_b = 0.0;            ///< max |(b_h - bhat_h) . n| on the boundary
  double pressure_mean = 0.0;
};

InvariantReport check_invariants(const FieldState& state, const Mesh& m, const DofLayout& layout,
                                 const ReferenceElement& refel);

struct RunSettings {
  int k = 1;
  Variant variant = Variant::kEhdg;
  SolveOptions solve;
  PicardConfig picard;
};

struct LevelResult {
  int level = 0;
  double h = 0.0;
  int cells = 0;
  int dofs = 0;
  int system_size = 0;
  ErrorReport errors;
  InvariantReport invariants;
  Timings timings;
  int picard_iterations = 0;
  bool converged = true;
  PicardHistory history;
  std::vector<std::string> warnings;
  Eigen::SparseMatrix<double> matrix;
};

LevelResult run_level(const ManufacturedCase& mc, int level, const RunSettings& settings);
LevelResult run_on_mesh(const ManufacturedCase& mc, const Mesh& mesh, int level,
                        const RunSettings& settings);

/// Observed order between two levels using the actual mesh sizes; nullopt when undefined.
std::optional<double> observed_rate(double e_coarse, double e_fine, double h_coarse, double h_fine);

enum class ErrorField { kL, kU, kP, kJ, kB, kR };
inline constexpr int kNumErrorFields = 6;
double error_of(const ErrorReport& e, ErrorField f);
const char* error_field_name(ErrorField f);

/// Rates of all six fields between the last two levels.
std::array<std::optional<double>, kNumErrorFields> last_rates(const std::vector<LevelResult>& rows);

}  // namespace mhdg
