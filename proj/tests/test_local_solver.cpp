#include <doctest.h>

#include <cmath>
#include <set>

#include "mhdg/error.hpp"
#include "mhdg/local_solver.hpp"
#include "mhdg/verify.hpp"
#include "property_checks.hpp"

using namespace mhdg;

TEST_SUITE("local_solver") {
  TEST_CASE("parameter validation") {
    PhysParams p;
    CHECK_NOTHROW(p.validate());
    p.re = 0.0;
    CHECK_THROWS_AS(p.validate(), Error);
    p = PhysParams{};
    p.beta2 = -1.0;
    CHECK_THROWS_AS(p.validate(), Error);
    p = PhysParams{};
    p.re = p.rm = 7.07;
    p.kappa = 200.0;
    CHECK(p.hartmann() == doctest::Approx(99.985).epsilon(1e-4));
  }

  TEST_CASE("flux consistency") {
    for (const auto& c : checks::flux_consistency()) {
      INFO(c.name << " worst " << c.worst);
      CHECK(c.ok);
    }
  }

  TEST_CASE("stabilization acts on the trace mismatch only") {
    PhysParams prm;
    prm.alpha1 = 4.0;
    prm.beta1 = 2.0;
    prm.beta2 = 3.0;
    TraceValues loc;
    loc.u = Vec2(1.0, 2.0);
    loc.b = Vec2(1.0, 1.0);
    HatValues hat;
    const Vec2 n(1.0, 0.0);
    const FluxValues f = eval_numerical_flux(loc, hat, n, 0.0, Vec2::Zero(), prm);
    CHECK((f.f2_stabilization - Vec2(4.0, 8.0)).norm() < 1e-15);
    // Normal part weighted by beta2, tangential by beta1.
    CHECK((f.f5_stabilization - Vec2(3.0, 2.0)).norm() < 1e-15);
  }

  TEST_CASE("element trace slots cover every facet dof once") {
    const Mesh m = gen_structured_square(2);
    for (Variant v : {Variant::kHdg, Variant::kEhdg}) {
      const DofLayout layout(m, 2, v);
      for (int c = 0; c < m.num_cells(); ++c) {
        const ElementTrace t = element_trace(layout, m, c);
        std::set<int> uniq(t.dofs.begin(), t.dofs.end());
        CHECK(uniq.size() == t.dofs.size());
        for (int s : t.slot_to_index) CHECK((s >= 0 && s < static_cast<int>(t.dofs.size())));
        // Continuous traces share the vertex nodes between the element's facets.
        const int per_cell = 3 * trace_slots_per_facet(2);
        if (v == Variant::kHdg) CHECK(static_cast<int>(t.dofs.size()) == per_cell);
        if (v == Variant::kEhdg) CHECK(static_cast<int>(t.dofs.size()) == per_cell - 2 * 3 * 2);
      }
    }
  }

  TEST_CASE("condensation reproduces the full local solve") {
    const ManufacturedCase mc = make_case(CaseKind::kSmooth2d, PhysParams{}, 1.0);
    const Mesh m = gen_structured_square(2);
    for (int k : {1, 2}) {
      const DofLayout layout(m, k, Variant::kEhdg);
      const ReferenceElement refel(k);
      const Problem prob = mc.problem();
      const auto conv = mc.convection();
      for (int c = 0; c < m.num_cells(); ++c) {
        const LocalMatrices lm = assemble_local(m, c, prob.params, *conv, prob.forcing, refel, layout);
        CHECK(lm.a_ll.rows() == layout.local_size());
        const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(lm.a_lg.cols(), -1.0, 2.0);
        const Eigen::VectorXd direct = lm.a_ll.partialPivLu().solve(lm.f_l - lm.a_lg * t);
        const CondensedBlock reduced = condense(lm, layout);
        const CondensedBlock full = condense_full(lm);
        const Eigen::VectorXd x1 = reconstruct_local(reduced, t);
        const Eigen::VectorXd x2 = reconstruct_local(full, t);
        CHECK((x1 - direct).norm() <= 1e-10 * direct.norm());
        CHECK((x2 - direct).norm() <= 1e-10 * direct.norm());
        CHECK((reduced.schur - full.schur).norm() <= 1e-9 * full.schur.norm());
        CHECK((reduced.rhs - full.rhs).norm() <= 1e-9 * (1.0 + full.rhs.norm()));
      }
    }
  }

  TEST_CASE("single reference element block is nonsingular") {
    const Mesh m({Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)}, {{{0, 1, 2}}});
    const DofLayout layout(m, 1, Variant::kEhdg);
    const ReferenceElement refel(1);
    const ZeroConvection conv;
    const LocalMatrices lm = assemble_local(m, 0, PhysParams{}, conv, Forcing{}, refel, layout);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(lm.a_ll);
    const double smin = svd.singularValues().minCoeff();
    CHECK(smin > 0.0);
    CHECK(std::isfinite(svd.singularValues().maxCoeff() / smin));
  }
}
