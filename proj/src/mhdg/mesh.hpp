#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mhdg {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Split direction used when a square is cut into two triangles.
enum class Diagonal {
  kMain,  ///< lower-left <-> upper-right corner (also "top right to bottom left")
  kAnti,  ///< upper-left <-> lower-right corner
};

struct Box {
  Vec2 lo{0.0, 0.0};
  Vec2 hi{1.0, 1.0};
};

/// Local facet i of a cell is the edge opposite vertex i, traversed counterclockwise.
inline constexpr std::array<std::array<int, 2>, 3> kLocalFacetVertices{{{1, 2}, {2, 0}, {0, 1}}};

struct FacetRef {
  int facet = -1;
  /// +1 when the local counterclockwise traversal runs from facets()[f][0] to facets()[f][1].
  int sign = 1;
};

/// Reference-to-physical map x = origin + jacobian * xi for the reference triangle
/// {(0,0), (1,0), (0,1)}.
struct AffineMap {
  Mat2 jacobian = Mat2::Identity();
  Vec2 translation = Vec2::Zero();
  double det = 1.0;
  Mat2 inverse = Mat2::Identity();

  Vec2 to_physical(const Vec2& xi) const { return translation + jacobian * xi; }
  Vec2 to_reference(const Vec2& x) const { return inverse * (x - translation); }
};

/// Immutable 2D simplicial mesh with its skeleton.
class Mesh {
 public:
  Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> cells);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_cells() const { return static_cast<int>(cells_.size()); }
  int num_facets() const { return static_cast<int>(facets_.size()); }
  int num_boundary_facets() const;

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& cells() const { return cells_; }
  const std::vector<std::array<int, 2>>& facets() const { return facets_; }
  const std::array<FacetRef, 3>& cell_facets(int cell) const { return cell_facets_[cell]; }
  /// Adjacent cells; the second entry is -1 on the boundary. The first entry is the
  /// lower-indexed neighbour and owns the canonical normal.
  const std::array<int, 2>& facet_cells(int facet) const { return facet_cells_[facet]; }
  bool is_boundary(int facet) const { return boundary_[facet] != 0; }
  const std::vector<char>& boundary_flags() const { return boundary_; }
  bool is_boundary_vertex(int v) const { return boundary_vertex_[v] != 0; }

  double cell_area(int cell) const;
  double facet_length(int facet) const;
  /// Unit normal pointing out of facet_cells(facet)[0].
  Vec2 facet_normal(int facet) const;
  /// Outward unit normal of local facet `lf` seen from `cell`.
  Vec2 outward_normal(int cell, int lf) const;
  double cell_diameter(int cell) const;
  double max_cell_diameter() const;
  double min_angle() const;
  double total_area() const;

 private:
  void build_skeleton();

  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> cells_;
  std::vector<std::array<int, 2>> facets_;
  std::vector<std::array<FacetRef, 3>> cell_facets_;
  std::vector<std::array<int, 2>> facet_cells_;
  std::vector<char> boundary_;
  std::vector<char> boundary_vertex_;
};

/// n x n squares over `box`, each split in two along `diagonal`.
Mesh gen_structured_square(int n, const Box& box = {}, Diagonal diagonal = Diagonal::kMain);
/// nx x ny squares (rectangles) over `box`.
Mesh gen_structured_rect(int nx, int ny, const Box& box, Diagonal diagonal);
/// (-1,1)^2 minus [0,1)x(-1,0], three unit squares each meshed with n x n squares.
Mesh gen_lshape(int n);
/// (0,0.025)x(-1,1) with l x 80l squares.
Mesh gen_strip(int l);
/// Red refinement: every triangle split into four through its edge midpoints.
Mesh uniform_refine(const Mesh& m);

AffineMap affine_map(const Mesh& m, int cell);

/// Text format: "dim 2", "vertices N", N lines "x y", "cells M", M lines "v0 v1 v2".
Mesh read_mesh(std::istream& in);
Mesh read_mesh_file(const std::string& path);
void write_mesh(const Mesh& m, std::ostream& out);
void write_mesh_file(const Mesh& m, const std::string& path);

}  // namespace mhdg
