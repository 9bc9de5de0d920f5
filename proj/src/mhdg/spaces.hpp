#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "mhdg/basis.hpp"
#include "mhdg/mesh.hpp"

namespace mhdg {

/// HDG uses facet-discontinuous traces everywhere; E-HDG makes the velocity and magnetic
/// traces continuous across the skeleton.
enum class Variant { kHdg, kEhdg };

/// Facet (trace) fields, blocked in this order in the global vector.
enum class FacetField { kVelocity = 0, kPressure = 1, kMagnetic = 2, kMultiplier = 3 };

inline constexpr std::array<int, 4> kFacetFieldComponents{2, 1, 2, 1};

/// Element-local fields, packed in this order per element.
enum class LocalField { kL = 0, kU, kP, kJ, kB, kR };

/// Global numbering of facet unknowns plus per-element local sizes.
///
/// Inside a field block, node-major with components interleaved: dof = offset + node*ncomp + comp.
/// Continuous E-HDG fields number vertex nodes first, then the k-1 interior nodes per facet.
class DofLayout {
 public:
  DofLayout(const Mesh& mesh, int k, Variant variant);

  int k() const { return k_; }
  Variant variant() const { return variant_; }
  bool continuous(FacetField f) const;

  int n_cell() const { return n_cell_; }
  int n_low() const { return n_low_; }
  int local_size() const { return local_size_; }
  int local_offset(LocalField f) const { return local_offset_[static_cast<int>(f)]; }
  int local_count(LocalField f) const;

  /// Scalar nodes of field f (per component).
  int field_nodes(FacetField f) const { return field_nodes_[static_cast<int>(f)]; }
  int field_offset(FacetField f) const { return field_offset_[static_cast<int>(f)]; }
  int field_size(FacetField f) const {
    return field_nodes(f) * kFacetFieldComponents[static_cast<int>(f)];
  }
  int num_facet_dofs() const { return total_; }

  /// Scalar node number of node j (0..k) along global facet e.
  int node(FacetField f, int facet, int j) const;
  int dof(FacetField f, int facet, int j, int comp) const {
    return field_offset(f) + node(f, facet, j) * kFacetFieldComponents[static_cast<int>(f)] + comp;
  }

  /// Facet dofs supported on the boundary skeleton, per field.
  const std::vector<int>& boundary_dofs(FacetField f) const {
    return boundary_dofs_[static_cast<int>(f)];
  }

 private:
  int k_;
  Variant variant_;
  int num_vertices_;
  std::vector<std::array<int, 2>> facet_vertices_;
  int n_cell_, n_low_, local_size_;
  std::array<int, 6> local_offset_{};
  std::array<int, 4> field_nodes_{};
  std::array<int, 4> field_offset_{};
  int total_ = 0;
  std::array<std::vector<int>, 4> boundary_dofs_;
};

DofLayout build_dof_layout(const Mesh& m, int k, Variant v);

struct DofCounts {
  int velocity = 0;
  int pressure = 0;
  int magnetic = 0;
  int multiplier = 0;
  int total = 0;
};

DofCounts count_global_dofs(const DofLayout& layout);
/// (ehdg - hdg) / hdg in percent.
double dof_reduction_percent(const DofCounts& hdg, const DofCounts& ehdg);

using VectorField = std::function<Vec2(const Vec2&)>;

/// Projected boundary values for the velocity and magnetic traces (zero multiplier trace).
/// Entries of `values` outside the boundary dof sets are zero.
Eigen::VectorXd boundary_dof_values(const DofLayout& layout, const Mesh& m,
                                    const ReferenceElement& refel, const VectorField& u_d,
                                    const VectorField& b_d);

/// Physical point of facet parameter s in (0,1) along the global facet direction.
inline Vec2 facet_point(const Mesh& m, int facet, double s) {
  const auto& f = m.facets()[facet];
  return (1.0 - s) * m.vertices()[f[0]] + s * m.vertices()[f[1]];
}

}  // namespace mhdg
