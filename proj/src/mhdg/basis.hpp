#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "mhdg/mesh.hpp"

namespace mhdg {

enum class QuadDomain { kTriangle, kInterval };

/// Points on the reference triangle {(0,0),(1,0),(0,1)} or the interval (0,1).
/// Interval rules leave `y` at zero.
struct QuadratureRule {
  QuadDomain domain = QuadDomain::kTriangle;
  int exactness_order = 0;
  std::vector<double> x, y, w;

  int size() const { return static_cast<int>(w.size()); }
};

inline constexpr int kMaxQuadratureOrder = 15;

/// Gauss-Jacobi nodes and weights on (-1,1) for the weight (1-x)^alpha (1+x)^beta.
void gauss_jacobi(int n, double alpha, double beta, std::vector<double>& nodes,
                  std::vector<double>& weights);

/// Rule exact for polynomials up to `order`. Triangle rules are conical products of
/// Gauss-Jacobi and Gauss-Legendre rules; interval rules are Gauss-Legendre.
QuadratureRule quadrature_rule(QuadDomain domain, int order);

/// Nodal Lagrange basis of P_n on the reference triangle, equispaced nodes (centroid for n=0).
class LagrangeTriangle {
 public:
  explicit LagrangeTriangle(int degree);

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<Vec2>& nodes() const { return nodes_; }

  Eigen::VectorXd eval(const Vec2& xi) const;
  /// Row i holds the reference gradient of basis function i.
  Eigen::MatrixX2d grad(const Vec2& xi) const;

 private:
  Eigen::VectorXd monomials(const Vec2& xi) const;

  int degree_;
  std::vector<Vec2> nodes_;
  std::vector<std::array<int, 2>> exponents_;
  Eigen::MatrixXd coeffs_;  // basis_i = sum_j coeffs_(j, i) * monomial_j
};

/// Nodal Lagrange basis of P_n on (0,1) with nodes j/n, so node 0 sits at t=0 and node n at t=1.
class LagrangeInterval {
 public:
  explicit LagrangeInterval(int degree);

  int degree() const { return degree_; }
  int size() const { return degree_ + 1; }
  const std::vector<double>& nodes() const { return nodes_; }
  Eigen::VectorXd eval(double t) const;

 private:
  int degree_;
  std::vector<double> nodes_;
};

/// Reference point on local facet `lf` at parameter t along its counterclockwise traversal.
Vec2 reference_facet_point(int lf, double t);

/// Tabulated reference element for degree k: P_k cell basis, P_{k-1} basis for the pressure-like
/// fields, P_k facet basis, and both evaluated at the 2k+3 volume and facet quadrature points.
class ReferenceElement {
 public:
  explicit ReferenceElement(int k);

  static constexpr int kMinDegree = 1;
  static constexpr int kMaxDegree = 6;

  int k() const { return k_; }
  const LagrangeTriangle& cell_basis() const { return cell_; }
  const LagrangeTriangle& low_basis() const { return low_; }
  const LagrangeInterval& facet_basis() const { return facet_; }
  const QuadratureRule& volume_rule() const { return vol_rule_; }
  const QuadratureRule& facet_rule() const { return facet_rule_; }

  int n_cell() const { return cell_.size(); }
  int n_low() const { return low_.size(); }
  int n_facet() const { return facet_.size(); }

  /// [quad point x basis] tables at volume quadrature points.
  const Eigen::MatrixXd& cell_values() const { return cell_vals_; }
  const Eigen::MatrixXd& cell_dxi() const { return cell_dxi_; }
  const Eigen::MatrixXd& cell_deta() const { return cell_deta_; }
  const Eigen::MatrixXd& low_values() const { return low_vals_; }
  const Eigen::MatrixXd& low_dxi() const { return low_dxi_; }
  const Eigen::MatrixXd& low_deta() const { return low_deta_; }

  /// Facet basis at facet quadrature points [quad x basis], parameterised along the global facet.
  const Eigen::MatrixXd& facet_values() const { return facet_vals_; }
  /// Cell basis traces on local facet lf; orientation 0 when the local traversal agrees with the
  /// global facet direction, 1 otherwise.
  const Eigen::MatrixXd& trace(int lf, int orientation) const { return trace_[lf][orientation]; }
  const Eigen::MatrixXd& low_trace(int lf, int orientation) const {
    return low_trace_[lf][orientation];
  }
  /// Reference coordinates of the facet quadrature points, per local facet and orientation.
  const std::vector<Vec2>& trace_points(int lf, int orientation) const {
    return trace_pts_[lf][orientation];
  }

 private:
  int k_;
  LagrangeTriangle cell_;
  LagrangeTriangle low_;
  LagrangeInterval facet_;
  QuadratureRule vol_rule_;
  QuadratureRule facet_rule_;
  Eigen::MatrixXd cell_vals_, cell_dxi_, cell_deta_;
  Eigen::MatrixXd low_vals_, low_dxi_, low_deta_;
  Eigen::MatrixXd facet_vals_;
  std::array<std::array<Eigen::MatrixXd, 2>, 3> trace_;
  std::array<std::array<Eigen::MatrixXd, 2>, 3> low_trace_;
  std::array<std::array<std::vector<Vec2>, 2>, 3> trace_pts_;
};

}  // namespace mhdg
