#include "property_checks.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <set>

#include "mhdg/basis.hpp"
#include "mhdg/local_solver.hpp"
#include "mhdg/mesh.hpp"
#include "mhdg/spaces.hpp"
#include "mhdg/verify.hpp"

namespace mhdg::checks {

namespace {

Check make(std::string name, double worst, double tol) {
  Check c;
  c.name = std::move(name);
  c.worst = worst;
  c.tolerance = tol;
  c.ok = std::isfinite(worst) && worst <= tol;
  return c;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Fourth-order central differences.
double d1(const std::function<double(double)>& f, double x, double h) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

double d2(const std::function<double(double)>& f, double x, double h) {
  return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h);
}

using Scalar = std::function<double(const Vec2&)>;

Vec2 fd_grad(const Scalar& f, const Vec2& x, double h) {
  return {d1([&](double t) { return f(Vec2(t, x.y())); }, x.x(), h),
          d1([&](double t) { return f(Vec2(x.x(), t)); }, x.y(), h)};
}

double fd_laplacian(const Scalar& f, const Vec2& x, double h) {
  return d2([&](double t) { return f(Vec2(t, x.y())); }, x.x(), h) +
         d2([&](double t) { return f(Vec2(x.x(), t)); }, x.y(), h);
}

struct Sampler {
  std::function<Vec2(std::mt19937&)> draw;
  double step;
};

Sampler sampler_for(CaseKind kind) {
  switch (kind) {
    case CaseKind::kSingular2d:
      return {[](std::mt19937& gen) {
                std::uniform_real_distribution<double> u(-0.95, 0.95);
                for (;;) {
                  const Vec2 p(u(gen), u(gen));
                  if (p.x() > -0.05 && p.y() < 0.05) continue;  // removed quadrant plus margin
                  if (p.norm() < 0.25) continue;                // keep away from the corner
                  return p;
                }
              },
              1e-3};
    case CaseKind::kHartmann:
      return {[](std::mt19937& gen) {
                std::uniform_real_distribution<double> ux(0.002, 0.023), uy(-0.98, 0.98);
                return Vec2(ux(gen), uy(gen));
              },
              2e-5};
    default:
      return {[](std::mt19937& gen) {
                std::uniform_real_distribution<double> u(0.02, 0.98);
                return Vec2(u(gen), u(gen));
              },
              1e-3};
  }
}

PhysParams params_for(CaseKind kind) {
  PhysParams p;
  if (kind == CaseKind::kHartmann) {
    p.re = p.rm = 7.07;
    p.kappa = 200.0;
  }
  if (kind == CaseKind::kSmooth2d) {
    p.re = 2.0;
    p.rm = 3.0;
    p.kappa = 0.5;
  }
  return p;
}

}  // namespace

std::vector<Check> quadrature_exactness() {
  std::vector<Check> out;
  double worst_tri = 0.0, worst_int = 0.0;
  for (int order = 1; order <= kMaxQuadratureOrder; ++order) {
    const QuadratureRule tri = quadrature_rule(QuadDomain::kTriangle, order);
    for (int a = 0; a <= order; ++a) {
      for (int b = 0; a + b <= order; ++b) {
        double s = 0.0;
        for (int q = 0; q < tri.size(); ++q) s += tri.w[q] * std::pow(tri.x[q], a) * std::pow(tri.y[q], b);
        const double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
        worst_tri = std::max(worst_tri, std::abs(s - exact) / exact);
      }
    }
    const QuadratureRule line = quadrature_rule(QuadDomain::kInterval, order);
    for (int a = 0; a <= order; ++a) {
      double s = 0.0;
      for (int q = 0; q < line.size(); ++q) s += line.w[q] * std::pow(line.x[q], a);
      worst_int = std::max(worst_int, std::abs(s - 1.0 / (a + 1)) * (a + 1));
    }
  }
  out.push_back(make("triangle monomials up to order 15", worst_tri, 1e-12));
  out.push_back(make("interval monomials up to order 15", worst_int, 1e-12));
  return out;
}

std::vector<Check> basis_properties() {
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double nodal = 0.0, unity = 0.0, grad_sum = 0.0, grad_fd = 0.0, interval = 0.0;
  for (int n = 0; n <= ReferenceElement::kMaxDegree; ++n) {
    const LagrangeTriangle tri(n);
    for (int j = 0; j < tri.size(); ++j) {
      const Eigen::VectorXd v = tri.eval(tri.nodes()[j]);
      for (int i = 0; i < tri.size(); ++i) nodal = std::max(nodal, std::abs(v(i) - (i == j ? 1.0 : 0.0)));
    }
    for (int s = 0; s < 20; ++s) {
      double a = u(gen), b = u(gen);
      if (a + b > 1.0) {
        a = 1.0 - a;
        b = 1.0 - b;
      }
      const Vec2 xi(a, b);
      unity = std::max(unity, std::abs(tri.eval(xi).sum() - 1.0));
      const Eigen::MatrixX2d g = tri.grad(xi);
      grad_sum = std::max(grad_sum, g.colwise().sum().cwiseAbs().maxCoeff());
      const double h = 1e-5;
      for (int i = 0; i < tri.size(); ++i) {
        const double gx = (tri.eval(xi + Vec2(h, 0))(i) - tri.eval(xi - Vec2(h, 0))(i)) / (2 * h);
        const double gy = (tri.eval(xi + Vec2(0, h))(i) - tri.eval(xi - Vec2(0, h))(i)) / (2 * h);
        grad_fd = std::max(grad_fd, std::max(std::abs(gx - g(i, 0)), std::abs(gy - g(i, 1))));
      }
    }
    const LagrangeInterval line(std::max(n, 1));
    for (int j = 0; j < line.size(); ++j) {
      const Eigen::VectorXd v = line.eval(line.nodes()[j]);
      for (int i = 0; i < line.size(); ++i) interval = std::max(interval, std::abs(v(i) - (i == j ? 1.0 : 0.0)));
    }
    interval = std::max(interval, std::abs(line.eval(u(gen)).sum() - 1.0));
  }
  return {make("triangle basis is nodal", nodal, 1e-10),
          make("triangle basis sums to one", unity, 1e-10),
          make("triangle basis gradients sum to zero", grad_sum, 1e-8),
          make("triangle basis gradients match finite differences", grad_fd, 1e-5),
          make("interval basis nodal and partition of unity", interval, 1e-10)};
}

std::vector<Check> flux_consistency() {
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PhysParams prm;
  prm.alpha1 = 3.0;
  prm.beta1 = 2.0;
  prm.beta2 = 5.0;
  prm.kappa = 1.7;
  double stab = 0.0, antisym = 0.0, physical = 0.0;
  for (int s = 0; s < 50; ++s) {
    TraceValues loc;
    loc.L << u(gen), u(gen), u(gen), u(gen);
    loc.u = Vec2(u(gen), u(gen));
    loc.p = u(gen);
    loc.J = u(gen);
    loc.b = Vec2(u(gen), u(gen));
    loc.r = u(gen);
    HatValues hat;
    hat.u = loc.u;
    hat.p = loc.p;
    hat.b = loc.b;
    hat.r = loc.r;
    const double ang = 3.14159265358979 * u(gen);
    const Vec2 n(std::cos(ang), std::sin(ang));
    const Vec2 w(u(gen), u(gen));
    const Vec2 d(u(gen), u(gen));
    const FluxValues f = eval_numerical_flux(loc, hat, n, w.dot(n), d, prm);
    const FluxValues g = eval_numerical_flux(loc, hat, -n, -w.dot(n), d, prm);
    stab = std::max({stab, f.f2_stabilization.norm(), f.f5_stabilization.norm()});
    antisym = std::max({antisym, (f.f1 + g.f1).norm(), (f.f2 + g.f2).norm(), std::abs(f.f3 + g.f3),
                        std::abs(f.f4 + g.f4), (f.f5 + g.f5).norm(), std::abs(f.f6 + g.f6)});
    // Physical fluxes: (-L + u w^T + p I) n + kappa d x (n x b) and n x J + r n - kappa n x (u x d).
    const double nxb = n.x() * loc.b.y() - n.y() * loc.b.x();
    const double uxd = loc.u.x() * d.y() - loc.u.y() * d.x();
    const Vec2 mom = -loc.L * n + loc.u * w.dot(n) + loc.p * n + prm.kappa * Vec2(d.y() * nxb, -d.x() * nxb);
    const Vec2 ind = Vec2(n.y() * loc.J, -n.x() * loc.J) + loc.r * n - prm.kappa * Vec2(n.y() * uxd, -n.x() * uxd);
    physical = std::max({physical, (f.f2 - mom).norm(), (f.f5 - ind).norm(),
                         std::abs(f.f3 - loc.u.dot(n)), std::abs(f.f6 - loc.b.dot(n))});
  }
  return {make("stabilization vanishes for matching traces", stab, 1e-14),
          make("fluxes change sign with the normal", antisym, 1e-13),
          make("fluxes reduce to the physical fluxes", physical, 1e-13)};
}

std::vector<Check> forcing_residuals() {
  std::vector<Check> out;
  for (CaseKind kind : {CaseKind::kSmooth2d, CaseKind::kSingular2d, CaseKind::kHartmann,
                        CaseKind::kNonlinearSmooth2d}) {
    const ManufacturedCase mc = make_case(kind, params_for(kind), 3.0);
    const PhysParams& prm = mc.params;
    const Sampler smp = sampler_for(kind);
    std::mt19937 gen(2024 + static_cast<int>(kind));
    double worst = 0.0, worst_deriv = 0.0, worst_div = 0.0;
    auto comp = [&](auto field, int i) {
      return Scalar([&mc, field, i](const Vec2& x) { return field(mc.exact(x))(i); });
    };
    const auto uval = [](const ExactPoint& e) { return e.u.value(); };
    const auto bval = [](const ExactPoint& e) { return e.b.value(); };
    const Scalar p = [&](const Vec2& x) { return mc.exact(x).p.v; };
    const Scalar r = [&](const Vec2& x) { return mc.exact(x).r.v; };
    const auto w_at = [&](const Vec2& x) { return mc.nonlinear ? mc.exact(x).u.value() : mc.w(x).value(); };
    const auto d_at = [&](const Vec2& x) { return mc.nonlinear ? mc.exact(x).b.value() : mc.d(x).value(); };
    for (int s = 0; s < 50; ++s) {
      const Vec2 x = smp.draw(gen);
      const double h = smp.step;
      const Scalar u0 = comp(uval, 0), u1 = comp(uval, 1), b0 = comp(bval, 0), b1 = comp(bval, 1);
      const Scalar curl_b = [&](const Vec2& y) {
        return fd_grad(b1, y, h).x() - fd_grad(b0, y, h).y();
      };
      const Vec2 gu0 = fd_grad(u0, x, h), gu1 = fd_grad(u1, x, h);
      Mat2 grad_u;
      grad_u.row(0) = gu0.transpose();
      grad_u.row(1) = gu1.transpose();
      const Vec2 lap_u(fd_laplacian(u0, x, h), fd_laplacian(u1, x, h));
      const Vec2 w = w_at(x);
      const Vec2 d = d_at(x);
      const double c = fd_grad(b1, x, h).x() - fd_grad(b0, x, h).y();
      const Vec2 g = -lap_u / prm.re + fd_grad(p, x, h) + grad_u * w + prm.kappa * Vec2(d.y() * c, -d.x() * c);
      // Induction: curl((kappa/Rm) curl b) + grad r - kappa curl(u x d), scalar curls in 2D.
      const Vec2 gc = fd_grad(curl_b, x, h);
      const Scalar s_fn = [&](const Vec2& y) {
        const Vec2 uy = mc.exact(y).u.value();
        const Vec2 dy = d_at(y);
        return uy.x() * dy.y() - uy.y() * dy.x();
      };
      const Vec2 gs = fd_grad(s_fn, x, h);
      const Vec2 f = prm.kappa / prm.rm * Vec2(gc.y(), -gc.x()) + fd_grad(r, x, h) - prm.kappa * Vec2(gs.y(), -gs.x());
      worst = std::max({worst, (g - mc.g(x)).cwiseAbs().maxCoeff(), (f - mc.f(x)).cwiseAbs().maxCoeff()});
      worst_div = std::max({worst_div, std::abs(gu0.x() + gu1.y()),
                            std::abs(fd_grad(b0, x, h).x() + fd_grad(b1, x, h).y())});
      const ExactPoint e = mc.exact(x);
      worst_deriv = std::max({worst_deriv, (e.u.grad() - grad_u).cwiseAbs().maxCoeff(),
                              (e.p.g - fd_grad(p, x, h)).cwiseAbs().maxCoeff(),
                              std::abs(e.b.curl() - c)});
    }
    const std::string name = case_name(kind);
    out.push_back(make(name + " forcing matches finite-difference PDE residual", worst, 1e-6));
    out.push_back(make(name + " analytic derivatives match finite differences", worst_deriv, 1e-6));
    out.push_back(make(name + " exact u and b are divergence free", worst_div, 1e-6));
  }
  // The Hartmann sources are constant.
  const ManufacturedCase hm = make_case(CaseKind::kHartmann, params_for(CaseKind::kHartmann), 1.0);
  double dev = 0.0;
  for (double y : {-0.999, -0.5, -0.01, 0.0, 0.3, 0.97}) {
    const Vec2 x(0.0125, y);
    dev = std::max({dev, (hm.g(x) - Vec2(1.0, 0.0)).norm(), hm.f(x).norm()});
  }
  out.push_back(make("hartmann sources are g = (1, 0), f = 0", dev, 1e-8));
  return out;
}

std::vector<Check> ehdg_vertex_continuity() {
  double bad = 0.0;
  for (const Mesh& m : {gen_structured_square(4), gen_lshape(1), gen_strip(1)}) {
    for (int k = 1; k <= 4; ++k) {
      const DofLayout e(m, k, Variant::kEhdg);
      const DofLayout h(m, k, Variant::kHdg);
      for (FacetField f : {FacetField::kVelocity, FacetField::kMagnetic}) {
        std::vector<std::set<int>> at_vertex(m.num_vertices());
        std::vector<std::set<int>> at_vertex_hdg(m.num_vertices());
        for (int fc = 0; fc < m.num_facets(); ++fc) {
          const auto& v = m.facets()[fc];
          at_vertex[v[0]].insert(e.node(f, fc, 0));
          at_vertex[v[1]].insert(e.node(f, fc, k));
          at_vertex_hdg[v[0]].insert(h.node(f, fc, 0));
          at_vertex_hdg[v[1]].insert(h.node(f, fc, k));
        }
        std::vector<int> incident(m.num_vertices(), 0);
        for (const auto& v : m.facets()) {
          ++incident[v[0]];
          ++incident[v[1]];
        }
        for (int v = 0; v < m.num_vertices(); ++v) {
          if (at_vertex[v].size() != 1) bad += 1.0;
          if (static_cast<int>(at_vertex_hdg[v].size()) != incident[v]) bad += 1.0;
        }
        if (e.field_nodes(f) != m.num_vertices() + (k - 1) * m.num_facets()) bad += 1.0;
      }
      for (FacetField f : {FacetField::kPressure, FacetField::kMultiplier}) {
        if (e.continuous(f) || e.field_nodes(f) != (k + 1) * m.num_facets()) bad += 1.0;
      }
    }
  }
  return {make("E-HDG velocity and magnetic traces single-valued at vertices", bad, 0.0)};
}

std::vector<Check> boundary_projection_idempotence() {
  double worst = 0.0, poly = 0.0;
  const Mesh m = gen_lshape(2);
  for (Variant var : {Variant::kHdg, Variant::kEhdg}) {
    for (int k = 1; k <= 3; ++k) {
      const DofLayout layout(m, k, var);
      const ReferenceElement refel(k);
      const VectorField ud = [](const Vec2& x) { return Vec2(std::sin(3 * x.x()) * x.y(), std::exp(x.x() - x.y())); };
      const VectorField bd = [](const Vec2& x) { return Vec2(std::cos(2 * x.y()), x.x() * x.x() * x.y()); };
      const Eigen::VectorXd once = boundary_dof_values(layout, m, refel, ud, bd);
      // Rebuild the boundary traces from the projected coefficients.
      auto trace_of = [&](FacetField f) {
        return VectorField([&, f](const Vec2& x) {
          for (int e = 0; e < m.num_facets(); ++e) {
            if (!m.is_boundary(e)) continue;
            const Vec2 a = m.vertices()[m.facets()[e][0]];
            const Vec2 b = m.vertices()[m.facets()[e][1]];
            const double len2 = (b - a).squaredNorm();
            const double s = (x - a).dot(b - a) / len2;
            if (s < -1e-12 || s > 1 + 1e-12 || (a + s * (b - a) - x).norm() > 1e-12) continue;
            const Eigen::VectorXd psi = refel.facet_basis().eval(s);
            Vec2 v = Vec2::Zero();
            for (int j = 0; j <= k; ++j) {
              v.x() += once(layout.dof(f, e, j, 0)) * psi(j);
              v.y() += once(layout.dof(f, e, j, 1)) * psi(j);
            }
            return v;
          }
          return Vec2(1e300, 1e300);
        });
      };
      const Eigen::VectorXd twice = boundary_dof_values(layout, m, refel, trace_of(FacetField::kVelocity),
                                                        trace_of(FacetField::kMagnetic));
      worst = std::max(worst, (twice - once).cwiseAbs().maxCoeff());
      // Degree-k polynomial data are reproduced exactly.
      const VectorField pk = [k](const Vec2& x) {
        return Vec2(std::pow(x.x() + 0.3 * x.y(), k), 1.0 - std::pow(x.y(), k));
      };
      const Eigen::VectorXd pv = boundary_dof_values(layout, m, refel, pk, pk);
      for (int e = 0; e < m.num_facets(); ++e) {
        if (!m.is_boundary(e)) continue;
        for (int j = 0; j <= k; ++j) {
          const Vec2 x = facet_point(m, e, refel.facet_basis().nodes()[j]);
          const Vec2 ex = pk(x);
          for (int c = 0; c < 2; ++c) {
            poly = std::max(poly, std::abs(pv(layout.dof(FacetField::kVelocity, e, j, c)) - ex(c)));
            poly = std::max(poly, std::abs(pv(layout.dof(FacetField::kMagnetic, e, j, c)) - ex(c)));
          }
        }
      }
    }
  }
  return {make("boundary projection is idempotent", worst, 1e-12),
          make("boundary projection reproduces degree-k data", poly, 1e-12)};
}

std::vector<Check> all_properties() {
  std::vector<Check> all;
  for (auto fn : {quadrature_exactness, basis_properties, flux_consistency, forcing_residuals,
                  ehdg_vertex_continuity, boundary_projection_idempotence}) {
    auto part = fn();
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

}  // namespace mhdg::checks
