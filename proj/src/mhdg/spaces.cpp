#include "mhdg/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Sparse>

#include "mhdg/error.hpp"

namespace mhdg {

DofLayout::DofLayout(const Mesh& mesh, int k, Variant variant)
    : k_(k), variant_(variant), num_vertices_(mesh.num_vertices()),
      facet_vertices_(mesh.facets()) {
  if (k < 1) fail(ErrorCode::kInvalidArgument, "polynomial degree must be >= 1");
  n_cell_ = (k + 1) * (k + 2) / 2;
  n_low_ = k * (k + 1) / 2;
  const std::array<int, 6> counts{4 * n_cell_, 2 * n_cell_, n_low_, n_cell_, 2 * n_cell_, n_low_};
  int off = 0;
  for (int i = 0; i < 6; ++i) {
    local_offset_[i] = off;
    off += counts[i];
  }
  local_size_ = off;

  const int ne = mesh.num_facets();
  off = 0;
  for (int f = 0; f < 4; ++f) {
    const auto field = static_cast<FacetField>(f);
    field_nodes_[f] = continuous(field) ? num_vertices_ + (k - 1) * ne : (k + 1) * ne;
    field_offset_[f] = off;
    off += field_size(field);
  }
  total_ = off;

  for (int f = 0; f < 4; ++f) {
    const auto field = static_cast<FacetField>(f);
    std::set<int> dofs;
    for (int e = 0; e < ne; ++e) {
      if (!mesh.is_boundary(e)) continue;
      for (int j = 0; j <= k; ++j) {
        for (int c = 0; c < kFacetFieldComponents[f]; ++c) dofs.insert(dof(field, e, j, c));
      }
    }
    boundary_dofs_[f].assign(dofs.begin(), dofs.end());
  }
}

bool DofLayout::continuous(FacetField f) const {
  return variant_ == Variant::kEhdg &&
         (f == FacetField::kVelocity || f == FacetField::kMagnetic);
}

int DofLayout::local_count(LocalField f) const {
  const int i = static_cast<int>(f);
  return (i + 1 < 6 ? local_offset_[i + 1] : local_size_) - local_offset_[i];
}

int DofLayout::node(FacetField f, int facet, int j) const {
  if (!continuous(f)) return facet * (k_ + 1) + j;
  if (j == 0) return facet_vertices_[facet][0];
  if (j == k_) return facet_vertices_[facet][1];
  return num_vertices_ + facet * (k_ - 1) + (j - 1);
}

DofLayout build_dof_layout(const Mesh& m, int k, Variant v) { return DofLayout(m, k, v); }

DofCounts count_global_dofs(const DofLayout& layout) {
  DofCounts c;
  c.velocity = layout.field_size(FacetField::kVelocity);
  c.pressure = layout.field_size(FacetField::kPressure);
  c.magnetic = layout.field_size(FacetField::kMagnetic);
  c.multiplier = layout.field_size(FacetField::kMultiplier);
  c.total = c.velocity + c.pressure + c.magnetic + c.multiplier;
  return c;
}

double dof_reduction_percent(const DofCounts& hdg, const DofCounts& ehdg) {
  return 100.0 * (static_cast<double>(ehdg.total) - hdg.total) / hdg.total;
}

namespace {

// L2 projection of a vector field onto the trace space of `field` restricted to the boundary
// skeleton. Handles continuous and discontinuous spaces with the same assembled mass matrix.
void project_boundary(const DofLayout& layout, const Mesh& m, const ReferenceElement& refel,
                      FacetField field, const VectorField& g, Eigen::VectorXd& values) {
  const auto& bdofs = layout.boundary_dofs(field);
  if (bdofs.empty()) return;
  const int offset = layout.field_offset(field);
  // Both components share the scalar node pattern; project per component.
  std::vector<int> nodes;
  for (std::size_t i = 0; i < bdofs.size(); i += 2) nodes.push_back((bdofs[i] - offset) / 2);
  std::vector<int> local(layout.field_nodes(field), -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) local[nodes[i]] = static_cast<int>(i);

  const int nb = static_cast<int>(nodes.size());
  const int nfb = refel.n_facet();
  const auto& rule = refel.facet_rule();
  const auto& psi = refel.facet_values();
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nb, 2);
  for (int e = 0; e < m.num_facets(); ++e) {
    if (!m.is_boundary(e)) continue;
    const double len = m.facet_length(e);
    for (int q = 0; q < rule.size(); ++q) {
      const double wq = rule.w[q] * len;
      const Vec2 val = g(facet_point(m, e, rule.x[q]));
      for (int a = 0; a < nfb; ++a) {
        const int ia = local[layout.node(field, e, a)];
        rhs(ia, 0) += wq * val.x() * psi(q, a);
        rhs(ia, 1) += wq * val.y() * psi(q, a);
        for (int b = 0; b < nfb; ++b) {
          trip.emplace_back(ia, local[layout.node(field, e, b)], wq * psi(q, a) * psi(q, b));
        }
      }
    }
  }
  Eigen::SparseMatrix<double> M(nb, nb);
  M.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(M);
  if (ldlt.info() != Eigen::Success) {
    fail(ErrorCode::kInternal, "boundary trace mass matrix is singular");
  }
  const Eigen::MatrixXd sol = ldlt.solve(rhs);
  for (int i = 0; i < nb; ++i) {
    values(offset + 2 * nodes[i]) = sol(i, 0);
    values(offset + 2 * nodes[i] + 1) = sol(i, 1);
  }
}

}  // namespace

Eigen::VectorXd boundary_dof_values(const DofLayout& layout, const Mesh& m,
                                    const ReferenceElement& refel, const VectorField& u_d,
                                    const VectorField& b_d) {
  if (refel.k() != layout.k()) fail(ErrorCode::kInvalidArgument, "degree mismatch");
  Eigen::VectorXd values = Eigen::VectorXd::Zero(layout.num_facet_dofs());
  project_boundary(layout, m, refel, FacetField::kVelocity, u_d, values);
  project_boundary(layout, m, refel, FacetField::kMagnetic, b_d, values);
  return values;
}

}  // namespace mhdg
