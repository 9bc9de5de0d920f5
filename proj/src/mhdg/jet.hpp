#pragma once

#include <cmath>

#include <Eigen/Dense>

namespace mhdg {

/// Second-order forward-mode number in two variables: value, gradient and Hessian.
struct Jet {
  double v = 0.0;
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  Eigen::Matrix2d h = Eigen::Matrix2d::Zero();

  Jet() = default;
  Jet(double c) : v(c) {}  // NOLINT: constants promote implicitly
  Jet(double value, const Eigen::Vector2d& grad, const Eigen::Matrix2d& hess)
      : v(value), g(grad), h(hess) {}

  static Jet x(double x0) { return Jet(x0, Eigen::Vector2d(1.0, 0.0), Eigen::Matrix2d::Zero()); }
  static Jet y(double y0) { return Jet(y0, Eigen::Vector2d(0.0, 1.0), Eigen::Matrix2d::Zero()); }

  double dx() const { return g(0); }
  double dy() const { return g(1); }
  double laplacian() const { return h.trace(); }
};

// phi(a) given phi, phi', phi'' at a.v
inline Jet chain(const Jet& a, double f0, double f1, double f2) {
  return Jet(f0, f1 * a.g, f1 * a.h + f2 * a.g * a.g.transpose());
}

inline Jet operator+(const Jet& a, const Jet& b) { return Jet(a.v + b.v, a.g + b.g, a.h + b.h); }
inline Jet operator-(const Jet& a, const Jet& b) { return Jet(a.v - b.v, a.g - b.g, a.h - b.h); }
inline Jet operator-(const Jet& a) { return Jet(-a.v, -a.g, -a.h); }
inline Jet operator*(const Jet& a, const Jet& b) {
  return Jet(a.v * b.v, a.v * b.g + b.v * a.g,
             a.v * b.h + b.v * a.h + a.g * b.g.transpose() + b.g * a.g.transpose());
}
inline Jet inv(const Jet& a) {
  const double r = 1.0 / a.v;
  return chain(a, r, -r * r, 2.0 * r * r * r);
}
inline Jet operator/(const Jet& a, const Jet& b) { return a * inv(b); }
inline Jet operator+(const Jet& a, double c) { return a + Jet(c); }
inline Jet operator+(double c, const Jet& a) { return Jet(c) + a; }
inline Jet operator-(const Jet& a, double c) { return a - Jet(c); }
inline Jet operator-(double c, const Jet& a) { return Jet(c) - a; }
inline Jet operator*(const Jet& a, double c) { return Jet(a.v * c, a.g * c, a.h * c); }
inline Jet operator*(double c, const Jet& a) { return a * c; }
inline Jet operator/(const Jet& a, double c) { return a * (1.0 / c); }
inline Jet operator/(double c, const Jet& a) { return c * inv(a); }

inline Jet sin(const Jet& a) { return chain(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v)); }
inline Jet cos(const Jet& a) { return chain(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v)); }
inline Jet exp(const Jet& a) {
  const double e = std::exp(a.v);
  return chain(a, e, e, e);
}
inline Jet sinh(const Jet& a) { return chain(a, std::sinh(a.v), std::cosh(a.v), std::sinh(a.v)); }
inline Jet cosh(const Jet& a) { return chain(a, std::cosh(a.v), std::sinh(a.v), std::cosh(a.v)); }
inline Jet pow(const Jet& a, double p) {
  return chain(a, std::pow(a.v, p), p * std::pow(a.v, p - 1.0),
               p * (p - 1.0) * std::pow(a.v, p - 2.0));
}
inline Jet sqrt(const Jet& a) { return pow(a, 0.5); }

/// Polar radius and angle of (x, y) as jets, the angle taken in [0, 2pi).
inline void polar_jets(double x, double y, Jet& rho, Jet& phi) {
  const double r2 = x * x + y * y;
  const double r = std::sqrt(r2);
  rho = Jet(r, Eigen::Vector2d(x / r, y / r),
            (Eigen::Matrix2d() << y * y, -x * y, -x * y, x * x).finished() / (r2 * r));
  double a = std::atan2(y, x);
  if (a < 0.0) a += 2.0 * M_PI;
  const double r4 = r2 * r2;
  phi = Jet(a, Eigen::Vector2d(-y / r2, x / r2),
            (Eigen::Matrix2d() << 2.0 * x * y, y * y - x * x, y * y - x * x, -2.0 * x * y).finished() /
                r4);
}

/// Planar vector field with second derivatives of each component.
struct JetVec {
  Jet c[2];

  Eigen::Vector2d value() const { return {c[0].v, c[1].v}; }
  /// grad(i, j) = d c_i / d x_j
  Eigen::Matrix2d grad() const {
    Eigen::Matrix2d m;
    m.row(0) = c[0].g.transpose();
    m.row(1) = c[1].g.transpose();
    return m;
  }
  double div() const { return c[0].dx() + c[1].dy(); }
  /// Scalar curl c1_x - c0_y.
  double curl() const { return c[1].dx() - c[0].dy(); }
  /// Gradient of the scalar curl.
  Eigen::Vector2d grad_curl() const {
    return {c[1].h(0, 0) - c[0].h(1, 0), c[1].h(0, 1) - c[0].h(1, 1)};
  }
  Eigen::Vector2d laplacian() const { return {c[0].laplacian(), c[1].laplacian()}; }
};

}  // namespace mhdg
