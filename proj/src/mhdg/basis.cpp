#include "mhdg/basis.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "mhdg/error.hpp"

namespace mhdg {

void gauss_jacobi(int n, double alpha, double beta, std::vector<double>& nodes,
                  std::vector<double>& weights) {
  // Golub-Welsch on the symmetric Jacobi matrix of the monic Jacobi recurrence.
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
  const double ab = alpha + beta;
  for (int i = 0; i < n; ++i) {
    if (i == 0) {
      T(0, 0) = (beta - alpha) / (ab + 2.0);
    } else {
      const double d = 2.0 * i + ab;
      T(i, i) = (beta * beta - alpha * alpha) / (d * (d + 2.0));
    }
    if (i + 1 < n) {
      const double j = i + 1.0;
      const double d = 2.0 * j + ab;
      const double num = 4.0 * j * (j + alpha) * (j + beta) * (j + ab);
      const double den = d * d * (d + 1.0) * (d - 1.0);
      T(i, i + 1) = T(i + 1, i) = std::sqrt(num / den);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  const double mu0 = std::pow(2.0, ab + 1.0) * std::tgamma(alpha + 1.0) *
                     std::tgamma(beta + 1.0) / std::tgamma(ab + 2.0);
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    weights[i] = mu0 * v0 * v0;
  }
}

QuadratureRule quadrature_rule(QuadDomain domain, int order) {
  if (order < 1 || order > kMaxQuadratureOrder) {
    fail(ErrorCode::kUnsupported, "quadrature order " + std::to_string(order) +
                                      " outside the tabulated range 1.." +
                                      std::to_string(kMaxQuadratureOrder));
  }
  const int n = (order + 2) / 2;
  QuadratureRule rule;
  rule.domain = domain;
  rule.exactness_order = order;
  std::vector<double> gx, gw;
  gauss_jacobi(n, 0.0, 0.0, gx, gw);
  if (domain == QuadDomain::kInterval) {
    for (int i = 0; i < n; ++i) {
      rule.x.push_back(0.5 * (gx[i] + 1.0));
      rule.y.push_back(0.0);
      rule.w.push_back(0.5 * gw[i]);
    }
    return rule;
  }
  // int_T f = int_0^1 (1-s) int_0^1 f(t(1-s), s) dt ds.
  std::vector<double> jx, jw;
  gauss_jacobi(n, 1.0, 0.0, jx, jw);
  for (int j = 0; j < n; ++j) {
    const double s = 0.5 * (jx[j] + 1.0);
    const double ws = 0.25 * jw[j];
    for (int i = 0; i < n; ++i) {
      const double t = 0.5 * (gx[i] + 1.0);
      rule.x.push_back(t * (1.0 - s));
      rule.y.push_back(s);
      rule.w.push_back(ws * 0.5 * gw[i]);
    }
  }
  return rule;
}

LagrangeTriangle::LagrangeTriangle(int degree) : degree_(degree) {
  if (degree < 0) fail(ErrorCode::kUnsupported, "negative polynomial degree");
  if (degree == 0) {
    nodes_.emplace_back(1.0 / 3.0, 1.0 / 3.0);
  } else {
    for (int j = 0; j <= degree; ++j) {
      for (int i = 0; i + j <= degree; ++i) {
        nodes_.emplace_back(static_cast<double>(i) / degree, static_cast<double>(j) / degree);
      }
    }
  }
  for (int total = 0; total <= degree; ++total) {
    for (int j = 0; j <= total; ++j) exponents_.push_back({total - j, j});
  }
  const int n = size();
  Eigen::MatrixXd V(n, n);
  for (int i = 0; i < n; ++i) V.row(i) = monomials(nodes_[i]).transpose();
  coeffs_ = V.fullPivLu().inverse();
}

Eigen::VectorXd LagrangeTriangle::monomials(const Vec2& xi) const {
  Eigen::VectorXd m(exponents_.size());
  for (std::size_t j = 0; j < exponents_.size(); ++j) {
    m(j) = std::pow(xi.x(), exponents_[j][0]) * std::pow(xi.y(), exponents_[j][1]);
  }
  return m;
}

Eigen::VectorXd LagrangeTriangle::eval(const Vec2& xi) const {
  return coeffs_.transpose() * monomials(xi);
}

Eigen::MatrixX2d LagrangeTriangle::grad(const Vec2& xi) const {
  Eigen::MatrixX2d dm(exponents_.size(), 2);
  for (std::size_t j = 0; j < exponents_.size(); ++j) {
    const auto [a, b] = exponents_[j];
    dm(j, 0) = a == 0 ? 0.0 : a * std::pow(xi.x(), a - 1) * std::pow(xi.y(), b);
    dm(j, 1) = b == 0 ? 0.0 : b * std::pow(xi.x(), a) * std::pow(xi.y(), b - 1);
  }
  return coeffs_.transpose() * dm;
}

LagrangeInterval::LagrangeInterval(int degree) : degree_(degree) {
  if (degree < 0) fail(ErrorCode::kUnsupported, "negative polynomial degree");
  if (degree == 0) {
    nodes_.push_back(0.5);
  } else {
    for (int j = 0; j <= degree; ++j) nodes_.push_back(static_cast<double>(j) / degree);
  }
}

Eigen::VectorXd LagrangeInterval::eval(double t) const {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(size());
  for (int i = 0; i < size(); ++i) {
    for (int j = 0; j < size(); ++j) {
      if (j != i) v(i) *= (t - nodes_[j]) / (nodes_[i] - nodes_[j]);
    }
  }
  return v;
}

Vec2 reference_facet_point(int lf, double t) {
  static const std::array<Vec2, 3> kVerts{Vec2(0.0, 0.0), Vec2(1.0, 0.0), Vec2(0.0, 1.0)};
  const Vec2& a = kVerts[kLocalFacetVertices[lf][0]];
  const Vec2& b = kVerts[kLocalFacetVertices[lf][1]];
  return (1.0 - t) * a + t * b;
}

namespace {

int checked_degree(int k) {
  if (k < ReferenceElement::kMinDegree || k > ReferenceElement::kMaxDegree) {
    fail(ErrorCode::kUnsupported, "polynomial degree " + std::to_string(k) +
                                      " outside supported range 1..6");
  }
  return k;
}

}  // namespace

ReferenceElement::ReferenceElement(int k)
    : k_(checked_degree(k)),
      cell_(k),
      low_(k - 1),
      facet_(k),
      vol_rule_(quadrature_rule(QuadDomain::kTriangle, 2 * k + 3)),
      facet_rule_(quadrature_rule(QuadDomain::kInterval, 2 * k + 3)) {
  const int nq = vol_rule_.size();
  cell_vals_.resize(nq, n_cell());
  cell_dxi_.resize(nq, n_cell());
  cell_deta_.resize(nq, n_cell());
  low_vals_.resize(nq, n_low());
  low_dxi_.resize(nq, n_low());
  low_deta_.resize(nq, n_low());
  for (int q = 0; q < nq; ++q) {
    const Vec2 xi(vol_rule_.x[q], vol_rule_.y[q]);
    cell_vals_.row(q) = cell_.eval(xi).transpose();
    const Eigen::MatrixX2d g = cell_.grad(xi);
    cell_dxi_.row(q) = g.col(0).transpose();
    cell_deta_.row(q) = g.col(1).transpose();
    low_vals_.row(q) = low_.eval(xi).transpose();
    const Eigen::MatrixX2d gl = low_.grad(xi);
    low_dxi_.row(q) = gl.col(0).transpose();
    low_deta_.row(q) = gl.col(1).transpose();
  }
  const int nf = facet_rule_.size();
  facet_vals_.resize(nf, n_facet());
  for (int q = 0; q < nf; ++q) facet_vals_.row(q) = facet_.eval(facet_rule_.x[q]).transpose();
  for (int lf = 0; lf < 3; ++lf) {
    for (int o = 0; o < 2; ++o) {
      auto& tab = trace_[lf][o];
      auto& low = low_trace_[lf][o];
      auto& pts = trace_pts_[lf][o];
      tab.resize(nf, n_cell());
      low.resize(nf, n_low());
      pts.resize(nf);
      for (int q = 0; q < nf; ++q) {
        const double s = facet_rule_.x[q];
        pts[q] = reference_facet_point(lf, o == 0 ? s : 1.0 - s);
        tab.row(q) = cell_.eval(pts[q]).transpose();
        low.row(q) = low_.eval(pts[q]).transpose();
      }
    }
  }
}

}  // namespace mhdg
