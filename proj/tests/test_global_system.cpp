#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "mhdg/error.hpp"
#include "mhdg/global_system.hpp"
#include "mhdg/picard.hpp"
#include "mhdg/verify.hpp"

using namespace mhdg;

namespace {

double rel_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / std::max(1e-300, b.norm());
}

}  // namespace

TEST_SUITE("global_system") {
  TEST_CASE("constraints pin one pressure trace dof") {
    const Mesh m = gen_structured_square(2);
    const DofLayout layout(m, 1, Variant::kEhdg);
    const Eigen::VectorXd bv = Eigen::VectorXd::Zero(layout.num_facet_dofs());
    const Constraints strong = build_constraints(layout, bv, MultiplierBc::kStrongZero);
    CHECK(strong.pinned >= layout.field_offset(FacetField::kPressure));
    CHECK(strong.pinned < layout.field_offset(FacetField::kMagnetic));
    CHECK(strong.eliminated[strong.pinned]);
    CHECK(strong.pinned_multiplier == -1);
    for (int d : layout.boundary_dofs(FacetField::kMultiplier)) CHECK(strong.eliminated[d]);
    const Constraints nc = build_constraints(layout, bv, MultiplierBc::kNormalConstraint);
    CHECK(nc.pinned_multiplier >= 0);
    int free_boundary_r = 0;
    for (int d : layout.boundary_dofs(FacetField::kMultiplier)) free_boundary_r += nc.eliminated[d] ? 0 : 1;
    CHECK(free_boundary_r == static_cast<int>(layout.boundary_dofs(FacetField::kMultiplier).size()) - 1);
  }

  TEST_CASE("condensed and monolithic solutions agree") {
    const ManufacturedCase mc = make_case(CaseKind::kSmooth2d, PhysParams{}, 1.0);
    for (int n : {1, 2, 4}) {
      const Mesh m = gen_structured_square(n);
      for (int k : {1, 2}) {
        for (Variant v : {Variant::kHdg, Variant::kEhdg}) {
          const DofLayout layout(m, k, v);
          const ReferenceElement refel(k);
          const auto conv = mc.convection();
          SolveOptions opts;
          const LinearSolution a = solve_linear(m, layout, refel, mc.problem(), *conv, opts);
          opts.monolithic = true;
          const LinearSolution b = solve_linear(m, layout, refel, mc.problem(), *conv, opts);
          CHECK(rel_diff(a.state.local, b.state.local) < 1e-9);
          CHECK(rel_diff(a.state.facet, b.state.facet) < 1e-9);
        }
      }
    }
  }

  TEST_CASE("pressure and multiplier post-normalization") {
    const ManufacturedCase mc = make_case(CaseKind::kSmooth2d, PhysParams{}, 5.0);
    const Mesh m = gen_structured_square(2);
    const DofLayout layout(m, 2, Variant::kEhdg);
    const ReferenceElement refel(2);
    const auto conv = mc.convection();
    SolveOptions opts;
    opts.rhat_bc = MultiplierBc::kNormalConstraint;
    LinearSolution s = solve_linear(m, layout, refel, mc.problem(), *conv, opts);
    CHECK(std::abs(pressure_mean(s.state, m, layout, refel)) < 1e-12);
    CHECK(std::abs(low_field_mean(s.state, m, layout, refel, LocalField::kR)) < 1e-12);
    // Shifting does not touch the velocity.
    const InvariantReport before = check_invariants(s.state, m, layout, refel);
    const int po = layout.local_offset(LocalField::kP);
    for (int c = 0; c < m.num_cells(); ++c) {
      for (int i = 0; i < layout.n_low(); ++i) s.state.cell(c)(po + i) += 3.0;
    }
    CHECK(pressure_mean(s.state, m, layout, refel) == doctest::Approx(3.0));
    post_normalize_pressure(s.state, m, layout, refel);
    CHECK(std::abs(pressure_mean(s.state, m, layout, refel)) < 1e-12);
    const InvariantReport after = check_invariants(s.state, m, layout, refel);
    CHECK(after.div_u == before.div_u);
  }

  TEST_CASE("matrix dump") {
    Eigen::SparseMatrix<double> a(2, 2);
    a.insert(0, 0) = 1.5;
    a.insert(1, 0) = -2.0;
    a.makeCompressed();
    const std::string path = "test_matrix_dump.coo";
    write_matrix_coo(a, path);
    std::ifstream in(path);
    int r, c;
    double v;
    REQUIRE(static_cast<bool>(in >> r >> c >> v));
    CHECK(r == 0);
    CHECK(v == 1.5);
    REQUIRE(static_cast<bool>(in >> r >> c >> v));
    CHECK(r == 1);
    CHECK(v == -2.0);
    std::remove(path.c_str());
    CHECK_THROWS_AS(write_matrix_coo(a, "/nonexistent-dir/x.coo"), Error);
  }

  TEST_CASE("singular system is reported") {
    SparseSystem sys;
    sys.matrix.resize(2, 2);
    sys.matrix.insert(0, 0) = 1.0;
    sys.matrix.insert(1, 0) = 1.0;
    sys.matrix.makeCompressed();
    sys.rhs = Eigen::VectorXd::Ones(2);
    sys.free_to_global = {0, 1};
    sys.global_to_free = {0, 1};
    sys.fixed = Eigen::VectorXd::Zero(2);
    try {
      solve_condensed(sys);
      FAIL("expected a singular-system error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kSingular);
    }
  }
}
