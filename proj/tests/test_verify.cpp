#include <doctest.h>

#include <cmath>

#include "mhdg/error.hpp"
#include "mhdg/verify.hpp"
#include "property_checks.hpp"

using namespace mhdg;

namespace {

constexpr double kPi = 3.14159265358979323846;

double domain_mean(const ManufacturedCase& mc, const Mesh& m, const std::function<double(const Vec2&)>& f) {
  const ReferenceElement refel(6);
  const auto& rule = refel.volume_rule();
  double s = 0.0, area = 0.0;
  for (int c = 0; c < m.num_cells(); ++c) {
    const AffineMap map = affine_map(m, c);
    for (int q = 0; q < rule.size(); ++q) {
      const double w = rule.w[q] * map.det;
      s += w * f(map.to_physical(Vec2(rule.x[q], rule.y[q])));
      area += w;
    }
  }
  (void)mc;
  return s / area;
}

}  // namespace

TEST_SUITE("verify") {
  TEST_CASE("case names round trip") {
    for (CaseKind k : {CaseKind::kSmooth2d, CaseKind::kSingular2d, CaseKind::kHartmann,
                       CaseKind::kNonlinearSmooth2d}) {
      CHECK(parse_case(case_name(k)) == k);
    }
    CHECK_THROWS_AS(parse_case("smooth3d"), Error);
  }

  TEST_CASE("forcing residuals") {
    for (const auto& c : checks::forcing_residuals()) {
      INFO(c.name << " worst " << c.worst);
      CHECK(c.ok);
    }
  }

  TEST_CASE("exact pressures have zero mean") {
    const ManufacturedCase s = make_case(CaseKind::kSmooth2d, PhysParams{}, 10.0);
    CHECK(std::abs(domain_mean(s, gen_structured_square(8), [&](const Vec2& x) { return s.p(x); })) < 1e-10);
    PhysParams hp;
    hp.re = hp.rm = 7.07;
    hp.kappa = 200.0;
    const ManufacturedCase h = make_case(CaseKind::kHartmann, hp, 1.0);
    CHECK(std::abs(domain_mean(h, gen_strip(3), [&](const Vec2& x) { return h.p(x); })) < 1e-8);
    const ManufacturedCase g = make_case(CaseKind::kSingular2d, PhysParams{}, 1.0);
    // The corner singularity limits quadrature accuracy; refinement shows convergence to zero.
    CHECK(std::abs(domain_mean(g, gen_lshape(32), [&](const Vec2& x) { return g.p(x); })) < 1e-3);
  }

  TEST_CASE("singular case boundary behaviour") {
    const ManufacturedCase mc = make_case(CaseKind::kSingular2d, PhysParams{}, 1.0);
    for (double t : {0.1, 0.4, 0.9}) {
      // phi = 0 leg is the positive x axis, phi = 3 pi / 2 the negative y axis.
      CHECK(mc.u(Vec2(t, 0.0)).norm() < 1e-10);
      CHECK(mc.u(Vec2(0.0, -t)).norm() < 1e-10);
    }
    CHECK(std::abs(mc.exact(Vec2(0.5, 0.5)).b.curl()) < 1e-12);
    CHECK(std::abs(mc.exact(Vec2(-0.3, -0.6)).u.div()) < 1e-12);
  }

  TEST_CASE("hartmann closed form") {
    PhysParams hp;
    hp.re = hp.rm = 7.07;
    hp.kappa = 200.0;
    const ManufacturedCase mc = make_case(CaseKind::kHartmann, hp, 1.0);
    CHECK(mc.u(Vec2(0.01, 1.0)).norm() < 1e-12);
    CHECK(mc.u(Vec2(0.01, -1.0)).norm() < 1e-12);
    CHECK(std::abs(mc.b(Vec2(0.01, 0.0)).x()) < 1e-15);
    CHECK(mc.b(Vec2(0.02, 0.7)).y() == 1.0);
    const double ha = hp.hartmann();
    CHECK(mc.u(Vec2(0.0, 0.0)).x() == doctest::Approx(hp.re / (ha * std::tanh(ha)) * (1.0 - 1.0 / std::cosh(ha))));
  }

  TEST_CASE("smooth pressure formula") {
    const ManufacturedCase mc = make_case(CaseKind::kSmooth2d, PhysParams{}, 25.0);
    CHECK(mc.p(Vec2(0.5, 0.5)) == doctest::Approx(25.0 * (1.0 - 4.0 / (kPi * kPi))));
    CHECK(mc.u(Vec2(0.0, 0.3)).norm() == 0.0);
  }

  TEST_CASE("observed rates") {
    CHECK(*observed_rate(1e-2, 2.5e-3, 0.2, 0.1) == doctest::Approx(2.0));
    CHECK_FALSE(observed_rate(0.0, 1e-3, 0.2, 0.1).has_value());
    CHECK_FALSE(observed_rate(1e-2, 1e-3, 0.1, 0.1).has_value());
  }

  TEST_CASE("smooth case reference errors") {
    const ManufacturedCase mc = make_case(CaseKind::kSmooth2d, PhysParams{}, 1.0);
    RunSettings rs;
    rs.k = 2;
    const LevelResult r = run_level(mc, 2, rs);
    CHECK(r.cells == 32);
    CHECK(r.errors.err_u == doctest::Approx(1.27e-3).epsilon(0.01));
    CHECK(r.errors.div_u <= 1e-13);
    CHECK(r.errors.div_b <= 1e-13);
  }

  TEST_CASE("pressure robustness on a fixed mesh") {
    RunSettings rs;
    rs.k = 2;
    double eu0 = 0.0, eb0 = 0.0, ep_prev = 0.0;
    for (double p0 : {1.0, 10.0, 100.0}) {
      const LevelResult r = run_level(make_case(CaseKind::kSmooth2d, PhysParams{}, p0), 2, rs);
      if (p0 == 1.0) {
        eu0 = r.errors.err_u;
        eb0 = r.errors.err_b;
      }
      CHECK(std::abs(r.errors.err_u - eu0) <= 1e-4 * eu0);
      CHECK(std::abs(r.errors.err_b - eb0) <= 1e-4 * eb0);
      CHECK(r.errors.err_p > ep_prev);
      ep_prev = r.errors.err_p;
    }
  }

  TEST_CASE("error norms vanish for the exact boundary data of a linear field") {
    // u = (y, x) is divergence free and degree one, so k = 1 reproduces it exactly when
    // the pressure and magnetic fields vanish and w = d = 0.
    ManufacturedCase mc = make_case(CaseKind::kSmooth2d, PhysParams{}, 1.0);
    mc.exact = [](const Vec2& x) {
      ExactPoint e;
      e.u.c[0] = Jet::y(x.y());
      e.u.c[1] = Jet::x(x.x());
      return e;
    };
    mc.w = [](const Vec2&) { return JetVec{}; };
    mc.d = [](const Vec2&) { return JetVec{}; };
    RunSettings rs;
    rs.k = 1;
    const LevelResult r = run_on_mesh(mc, gen_structured_square(2), 0, rs);
    CHECK(r.errors.err_u < 1e-12);
    CHECK(r.errors.err_L < 1e-12);
    CHECK(r.errors.err_p < 1e-12);
    CHECK(r.errors.err_b < 1e-12);
  }
}
