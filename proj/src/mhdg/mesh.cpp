#include "mhdg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <utility>

#include "mhdg/error.hpp"

namespace mhdg {

namespace {

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

}  // namespace

Mesh::Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> cells)
    : vertices_(std::move(vertices)), cells_(std::move(cells)) {
  const int nv = num_vertices();
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    auto& cell = cells_[c];
    for (int v : cell) {
      if (v < 0 || v >= nv) {
        fail(ErrorCode::kInvalidArgument, "cell " + std::to_string(c) + " references vertex " +
                                              std::to_string(v) + " out of range");
      }
    }
    double a = signed_area(vertices_[cell[0]], vertices_[cell[1]], vertices_[cell[2]]);
    if (a < 0.0) {
      std::swap(cell[1], cell[2]);
      a = -a;
    }
    if (!(a > 0.0)) fail(ErrorCode::kGeometry, "degenerate cell " + std::to_string(c));
  }
  build_skeleton();
}

void Mesh::build_skeleton() {
  std::map<std::pair<int, int>, int> lookup;
  cell_facets_.assign(cells_.size(), {});
  for (int c = 0; c < num_cells(); ++c) {
    for (int lf = 0; lf < 3; ++lf) {
      const int a = cells_[c][kLocalFacetVertices[lf][0]];
      const int b = cells_[c][kLocalFacetVertices[lf][1]];
      const auto key = std::minmax(a, b);
      auto [it, inserted] = lookup.try_emplace({key.first, key.second}, num_facets());
      if (inserted) {
        facets_.push_back({key.first, key.second});
        facet_cells_.push_back({c, -1});
      } else {
        auto& fc = facet_cells_[it->second];
        if (fc[1] != -1) {
          fail(ErrorCode::kGeometry, "facet shared by more than two cells");
        }
        fc[1] = c;
      }
      cell_facets_[c][lf] = FacetRef{it->second, a == key.first ? 1 : -1};
    }
  }
  boundary_.assign(facets_.size(), 0);
  boundary_vertex_.assign(vertices_.size(), 0);
  for (int f = 0; f < num_facets(); ++f) {
    if (facet_cells_[f][1] < 0) {
      boundary_[f] = 1;
      boundary_vertex_[facets_[f][0]] = 1;
      boundary_vertex_[facets_[f][1]] = 1;
    }
  }
}

int Mesh::num_boundary_facets() const {
  return static_cast<int>(std::count(boundary_.begin(), boundary_.end(), 1));
}

double Mesh::cell_area(int cell) const {
  const auto& c = cells_[cell];
  return signed_area(vertices_[c[0]], vertices_[c[1]], vertices_[c[2]]);
}

double Mesh::facet_length(int facet) const {
  return (vertices_[facets_[facet][1]] - vertices_[facets_[facet][0]]).norm();
}

Vec2 Mesh::outward_normal(int cell, int lf) const {
  const Vec2& a = vertices_[cells_[cell][kLocalFacetVertices[lf][0]]];
  const Vec2& b = vertices_[cells_[cell][kLocalFacetVertices[lf][1]]];
  const Vec2 t = b - a;
  return Vec2(t.y(), -t.x()) / t.norm();
}

Vec2 Mesh::facet_normal(int facet) const {
  const int c = facet_cells_[facet][0];
  for (int lf = 0; lf < 3; ++lf) {
    if (cell_facets_[c][lf].facet == facet) return outward_normal(c, lf);
  }
  fail(ErrorCode::kInternal, "facet/cell adjacency is inconsistent");
}

double Mesh::cell_diameter(int cell) const {
  const auto& c = cells_[cell];
  double d = 0.0;
  for (int i = 0; i < 3; ++i) {
    d = std::max(d, (vertices_[c[i]] - vertices_[c[(i + 1) % 3]]).norm());
  }
  return d;
}

double Mesh::max_cell_diameter() const {
  double h = 0.0;
  for (int c = 0; c < num_cells(); ++c) h = std::max(h, cell_diameter(c));
  return h;
}

double Mesh::min_angle() const {
  double best = std::numbers::pi;
  for (const auto& c : cells_) {
    for (int i = 0; i < 3; ++i) {
      const Vec2 e1 = vertices_[c[(i + 1) % 3]] - vertices_[c[i]];
      const Vec2 e2 = vertices_[c[(i + 2) % 3]] - vertices_[c[i]];
      const double cosang = e1.dot(e2) / (e1.norm() * e2.norm());
      best = std::min(best, std::acos(std::clamp(cosang, -1.0, 1.0)));
    }
  }
  return best;
}

double Mesh::total_area() const {
  double a = 0.0;
  for (int c = 0; c < num_cells(); ++c) a += cell_area(c);
  return a;
}

Mesh gen_structured_rect(int nx, int ny, const Box& box, Diagonal diagonal) {
  if (nx < 1 || ny < 1) fail(ErrorCode::kInvalidArgument, "subdivision count must be >= 1");
  if (!(box.hi.x() > box.lo.x()) || !(box.hi.y() > box.lo.y())) {
    fail(ErrorCode::kInvalidArgument, "bounding box is degenerate");
  }
  std::vector<Vec2> verts;
  verts.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      verts.emplace_back(box.lo.x() + (box.hi.x() - box.lo.x()) * i / nx,
                         box.lo.y() + (box.hi.y() - box.lo.y()) * j / ny);
    }
  }
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<std::array<int, 3>> cells;
  cells.reserve(2 * static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int ll = id(i, j), lr = id(i + 1, j), ur = id(i + 1, j + 1), ul = id(i, j + 1);
      if (diagonal == Diagonal::kMain) {
        cells.push_back({ll, lr, ur});
        cells.push_back({ll, ur, ul});
      } else {
        cells.push_back({ll, lr, ul});
        cells.push_back({lr, ur, ul});
      }
    }
  }
  return Mesh(std::move(verts), std::move(cells));
}

Mesh gen_structured_square(int n, const Box& box, Diagonal diagonal) {
  return gen_structured_rect(n, n, box, diagonal);
}

Mesh gen_lshape(int n) {
  if (n < 1) fail(ErrorCode::kInvalidArgument, "subdivision count must be >= 1");
  const int m = 2 * n;
  auto id = [m](int i, int j) { return j * (m + 1) + i; };
  std::vector<int> renumber(static_cast<std::size_t>(m + 1) * (m + 1), -1);
  std::vector<Vec2> verts;
  std::vector<std::array<int, 3>> cells;
  auto use = [&](int i, int j) {
    int& slot = renumber[id(i, j)];
    if (slot < 0) {
      slot = static_cast<int>(verts.size());
      verts.emplace_back(-1.0 + 2.0 * i / m, -1.0 + 2.0 * j / m);
    }
    return slot;
  };
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      // The removed quadrant [0,1) x (-1,0].
      if (i >= n && j < n) continue;
      const int ll = use(i, j), lr = use(i + 1, j), ur = use(i + 1, j + 1), ul = use(i, j + 1);
      cells.push_back({ll, lr, ur});
      cells.push_back({ll, ur, ul});
    }
  }
  return Mesh(std::move(verts), std::move(cells));
}

Mesh gen_strip(int l) {
  if (l < 1) fail(ErrorCode::kInvalidArgument, "refinement level must be >= 1");
  return gen_structured_rect(l, 80 * l, Box{Vec2(0.0, -1.0), Vec2(0.025, 1.0)}, Diagonal::kMain);
}

Mesh uniform_refine(const Mesh& m) {
  std::vector<Vec2> verts = m.vertices();
  const int nv = m.num_vertices();
  for (const auto& f : m.facets()) verts.push_back(0.5 * (verts[f[0]] + verts[f[1]]));
  std::vector<std::array<int, 3>> cells;
  cells.reserve(4 * static_cast<std::size_t>(m.num_cells()));
  for (int c = 0; c < m.num_cells(); ++c) {
    const auto& v = m.cells()[c];
    const auto& cf = m.cell_facets(c);
    const int m0 = nv + cf[0].facet, m1 = nv + cf[1].facet, m2 = nv + cf[2].facet;
    cells.push_back({v[0], m2, m1});
    cells.push_back({m2, v[1], m0});
    cells.push_back({m1, m0, v[2]});
    cells.push_back({m0, m1, m2});
  }
  return Mesh(std::move(verts), std::move(cells));
}

AffineMap affine_map(const Mesh& m, int cell) {
  const auto& c = m.cells()[cell];
  const auto& v = m.vertices();
  AffineMap map;
  map.translation = v[c[0]];
  map.jacobian.col(0) = v[c[1]] - v[c[0]];
  map.jacobian.col(1) = v[c[2]] - v[c[0]];
  map.det = map.jacobian.determinant();
  const double scale = map.jacobian.cwiseAbs().maxCoeff();
  if (!(map.det > 1e-14 * scale * scale)) {
    fail(ErrorCode::kGeometry, "cell " + std::to_string(cell) + " is degenerate");
  }
  map.inverse = map.jacobian.inverse();
  return map;
}

Mesh read_mesh(std::istream& in) {
  auto expect = [&in](const std::string& word) {
    std::string tok;
    if (!(in >> tok) || tok != word) {
      fail(ErrorCode::kIo, "mesh file: expected '" + word + "', got '" + tok + "'");
    }
  };
  expect("dim");
  int dim = 0;
  if (!(in >> dim) || dim != 2) fail(ErrorCode::kIo, "mesh file: only dim 2 is supported");
  expect("vertices");
  long nv = -1;
  if (!(in >> nv) || nv < 0) fail(ErrorCode::kIo, "mesh file: bad vertex count");
  std::vector<Vec2> verts(static_cast<std::size_t>(nv));
  for (auto& v : verts) {
    if (!(in >> v.x() >> v.y())) fail(ErrorCode::kIo, "mesh file: truncated vertex list");
  }
  expect("cells");
  long nc = -1;
  if (!(in >> nc) || nc < 0) fail(ErrorCode::kIo, "mesh file: bad cell count");
  std::vector<std::array<int, 3>> cells(static_cast<std::size_t>(nc));
  for (auto& c : cells) {
    if (!(in >> c[0] >> c[1] >> c[2])) fail(ErrorCode::kIo, "mesh file: truncated cell list");
  }
  return Mesh(std::move(verts), std::move(cells));
}

Mesh read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open mesh file " + path);
  return read_mesh(in);
}

void write_mesh(const Mesh& m, std::ostream& out) {
  out << "dim 2\n" << "vertices " << m.num_vertices() << '\n';
  out << std::setprecision(17);
  for (const auto& v : m.vertices()) out << v.x() << ' ' << v.y() << '\n';
  out << "cells " << m.num_cells() << '\n';
  for (const auto& c : m.cells()) out << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
}

void write_mesh_file(const Mesh& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot write mesh file " + path);
  write_mesh(m, out);
}

}  // namespace mhdg
