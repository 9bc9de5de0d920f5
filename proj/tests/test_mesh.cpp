#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mhdg/error.hpp"
#include "mhdg/mesh.hpp"

using namespace mhdg;

TEST_SUITE("mesh") {
  TEST_CASE("structured square counts and orientation") {
    for (int n : {1, 2, 4, 16}) {
      const Mesh m = gen_structured_square(n);
      CHECK(m.num_cells() == 2 * n * n);
      CHECK(m.num_vertices() == (n + 1) * (n + 1));
      CHECK(m.num_facets() == 3 * n * n + 2 * n);
      CHECK(m.num_boundary_facets() == 4 * n);
      CHECK(m.total_area() == doctest::Approx(1.0));
      for (int c = 0; c < m.num_cells(); ++c) CHECK(m.cell_area(c) > 0.0);
      CHECK(m.max_cell_diameter() == doctest::Approx(std::sqrt(2.0) / n));
    }
  }

  TEST_CASE("element counts of the level sequences") {
    CHECK(gen_structured_square(16).num_cells() == 512);
    CHECK(gen_lshape(1).num_cells() == 6);
    CHECK(gen_lshape(4).num_cells() == 96);
    CHECK(gen_lshape(2).total_area() == doctest::Approx(3.0));
    const Mesh s = gen_strip(2);
    CHECK(s.num_cells() == 2 * 2 * 160);
    CHECK(s.total_area() == doctest::Approx(0.05));
  }

  TEST_CASE("outward normals point away from the centroid") {
    const Mesh m = gen_lshape(2);
    for (int c = 0; c < m.num_cells(); ++c) {
      const auto& v = m.cells()[c];
      const Vec2 cen = (m.vertices()[v[0]] + m.vertices()[v[1]] + m.vertices()[v[2]]) / 3.0;
      for (int lf = 0; lf < 3; ++lf) {
        const auto [a, b] = kLocalFacetVertices[lf];
        const Vec2 mid = 0.5 * (m.vertices()[v[a]] + m.vertices()[v[b]]);
        const Vec2 n = m.outward_normal(c, lf);
        CHECK(n.norm() == doctest::Approx(1.0));
        CHECK(n.dot(mid - cen) > 0.0);
      }
    }
  }

  TEST_CASE("interior facets have two neighbours with opposite normals") {
    const Mesh m = gen_structured_square(3);
    for (int e = 0; e < m.num_facets(); ++e) {
      const auto nb = m.facet_cells(e);
      if (m.is_boundary(e)) {
        CHECK(nb[1] == -1);
        continue;
      }
      CHECK(nb[0] < nb[1]);
      Vec2 n0, n1;
      for (int lf = 0; lf < 3; ++lf) {
        if (m.cell_facets(nb[0])[lf].facet == e) n0 = m.outward_normal(nb[0], lf);
        if (m.cell_facets(nb[1])[lf].facet == e) n1 = m.outward_normal(nb[1], lf);
      }
      CHECK((n0 + n1).norm() < 1e-14);
      CHECK((n0 - m.facet_normal(e)).norm() < 1e-14);
    }
  }

  TEST_CASE("diagonal convention") {
    const Mesh a = gen_structured_square(1, Box{}, Diagonal::kMain);
    const Mesh b = gen_structured_square(1, Box{}, Diagonal::kAnti);
    auto has_edge = [](const Mesh& m, Vec2 p, Vec2 q) {
      for (const auto& f : m.facets()) {
        const Vec2 x = m.vertices()[f[0]], y = m.vertices()[f[1]];
        if (((x - p).norm() < 1e-14 && (y - q).norm() < 1e-14) ||
            ((x - q).norm() < 1e-14 && (y - p).norm() < 1e-14)) {
          return true;
        }
      }
      return false;
    };
    CHECK(has_edge(a, Vec2(0, 0), Vec2(1, 1)));
    CHECK(has_edge(b, Vec2(0, 1), Vec2(1, 0)));
  }

  TEST_CASE("uniform refinement quarters every cell") {
    const Mesh m = gen_lshape(1);
    const Mesh r = uniform_refine(m);
    CHECK(r.num_cells() == 4 * m.num_cells());
    CHECK(r.total_area() == doctest::Approx(m.total_area()));
    CHECK(r.max_cell_diameter() == doctest::Approx(0.5 * m.max_cell_diameter()));
    CHECK(r.min_angle() == doctest::Approx(m.min_angle()));
  }

  TEST_CASE("text format round trip") {
    const Mesh m = gen_lshape(1);
    std::stringstream ss;
    write_mesh(m, ss);
    const Mesh back = read_mesh(ss);
    CHECK(back.num_cells() == m.num_cells());
    CHECK(back.num_vertices() == m.num_vertices());
    for (int v = 0; v < m.num_vertices(); ++v) CHECK((back.vertices()[v] - m.vertices()[v]).norm() == 0.0);
  }

  TEST_CASE("malformed meshes are rejected") {
    std::stringstream bad_header("dim 3\nvertices 0\ncells 0\n");
    CHECK_THROWS_AS(read_mesh(bad_header), Error);
    std::stringstream truncated("dim 2\nvertices 3\n0 0\n1 0\n");
    CHECK_THROWS_AS(read_mesh(truncated), Error);
    std::stringstream bad_index("dim 2\nvertices 3\n0 0\n1 0\n0 1\ncells 1\n0 1 7\n");
    CHECK_THROWS_AS(read_mesh(bad_index), Error);
    // Degenerate (collinear) triangle.
    CHECK_THROWS_AS(Mesh({Vec2(0, 0), Vec2(1, 0), Vec2(2, 0)}, {{{0, 1, 2}}}), Error);
  }

  TEST_CASE("clockwise cells are reoriented") {
    const Mesh m({Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)}, {{{0, 2, 1}}});
    CHECK(m.cell_area(0) == doctest::Approx(0.5));
  }

  TEST_CASE("affine map") {
    const Mesh m = gen_structured_square(2);
    for (int c = 0; c < m.num_cells(); ++c) {
      const AffineMap map = affine_map(m, c);
      const auto& v = m.cells()[c];
      CHECK((map.to_physical(Vec2(0, 0)) - m.vertices()[v[0]]).norm() < 1e-15);
      CHECK((map.to_physical(Vec2(1, 0)) - m.vertices()[v[1]]).norm() < 1e-15);
      CHECK((map.to_physical(Vec2(0, 1)) - m.vertices()[v[2]]).norm() < 1e-15);
      CHECK(map.det == doctest::Approx(2.0 * m.cell_area(c)));
      CHECK((map.to_reference(map.to_physical(Vec2(0.2, 0.3))) - Vec2(0.2, 0.3)).norm() < 1e-14);
    }
  }
}
