#include "mhdg/local_solver.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

#include "mhdg/error.hpp"

namespace mhdg {

double PhysParams::hartmann() const { return std::sqrt(kappa * re * rm); }

void PhysParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      fail(ErrorCode::kParameter, std::string(name) + " must be positive");
    }
  };
  positive(re, "Re");
  positive(rm, "Rm");
  positive(kappa, "kappa");
  positive(beta1, "beta1");
  positive(beta2, "beta2");
  if (!std::isfinite(alpha1)) fail(ErrorCode::kParameter, "alpha1 must be finite");
}

VolumeSample AnalyticConvection::volume(int, int, const Vec2& x) const {
  VolumeSample s;
  if (w_) s.w = w_(x);
  if (d_) s.d = d_(x);
  if (grad_d_) s.grad_d = grad_d_(x);
  return s;
}

FacetSample AnalyticConvection::facet(int, int, int, const Vec2& x, const Vec2& n) const {
  FacetSample s;
  if (w_) s.m = w_(x).dot(n);
  if (d_) s.d = d_(x);
  return s;
}

namespace {

// Out-of-plane component of a x b for planar a, b.
double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }
// a x (0, 0, s) for planar a.
Vec2 cross(const Vec2& a, double s) { return Vec2(a.y() * s, -a.x() * s); }

}  // namespace

FluxValues eval_numerical_flux(const TraceValues& loc, const HatValues& hat, const Vec2& n,
                               double m, const Vec2& d, const PhysParams& prm) {
  FluxValues f;
  f.f1 = -hat.u * n.transpose();
  f.f2_stabilization = prm.alpha1 * (loc.u - hat.u);
  f.f2_coupling = 0.5 * prm.kappa * cross(d, cross(n, Vec2(loc.b + hat.b)));
  f.f2 = -loc.L * n + m * loc.u + hat.p * n + f.f2_coupling + f.f2_stabilization;
  f.f3 = loc.u.dot(n);
  f.f4 = -cross(n, hat.b);
  const Mat2 N = n * n.transpose();
  const Mat2 T = Mat2::Identity() - N;
  f.f5_stabilization = (prm.beta1 * T + prm.beta2 * N) * (loc.b - hat.b);
  f.f5_coupling = -0.5 * prm.kappa * cross(n, cross(Vec2(loc.u + hat.u), d));
  f.f5 = cross(n, loc.J) + hat.r * n + f.f5_coupling + f.f5_stabilization;
  f.f6 = loc.b.dot(n);
  return f;
}

int trace_slots_per_facet(int k) { return 6 * (k + 1); }

int trace_slot(int k, int lf, FacetField field, int comp, int node) {
  static constexpr std::array<int, 4> kBase{0, 2, 3, 5};
  return lf * trace_slots_per_facet(k) + (kBase[static_cast<int>(field)] + comp) * (k + 1) + node;
}

ElementTrace element_trace(const DofLayout& layout, const Mesh& mesh, int cell) {
  const int k = layout.k();
  ElementTrace t;
  t.slot_to_index.assign(3 * trace_slots_per_facet(k), -1);
  std::unordered_map<int, int> seen;
  for (int lf = 0; lf < 3; ++lf) {
    const int e = mesh.cell_facets(cell)[lf].facet;
    for (int fi = 0; fi < 4; ++fi) {
      const auto field = static_cast<FacetField>(fi);
      for (int c = 0; c < kFacetFieldComponents[fi]; ++c) {
        for (int j = 0; j <= k; ++j) {
          const int dof = layout.dof(field, e, j, c);
          auto [it, inserted] = seen.try_emplace(dof, static_cast<int>(t.dofs.size()));
          if (inserted) t.dofs.push_back(dof);
          t.slot_to_index[trace_slot(k, lf, field, c, j)] = it->second;
        }
      }
    }
  }
  return t;
}

namespace {

// Trial channels entering the numerical fluxes.
enum Channel : int {
  kChL00, kChL01, kChL10, kChL11,
  kChU0, kChU1, kChJ, kChB0, kChB1,
  kChUhat0, kChUhat1, kChPhat, kChBhat0, kChBhat1, kChRhat,
  kNumChannels
};

// Flux outputs, each tested by one equation.
enum Output : int {
  kOutF1_00, kOutF1_01, kOutF1_10, kOutF1_11,
  kOutF2_0, kOutF2_1, kOutF3, kOutF4, kOutF5_0, kOutF5_1, kOutF6,
  kNumOutputs
};

using FluxTable = Eigen::Matrix<double, kNumOutputs, kNumChannels>;

// The flux is linear in (traces, facet values), so probing it with unit inputs yields the exact
// coefficient table used by the facet integrals.
FluxTable flux_table(const Vec2& n, double m, const Vec2& d, const PhysParams& prm) {
  FluxTable tab;
  for (int ch = 0; ch < kNumChannels; ++ch) {
    TraceValues loc;
    HatValues hat;
    switch (ch) {
      case kChL00: loc.L(0, 0) = 1.0; break;
      case kChL01: loc.L(0, 1) = 1.0; break;
      case kChL10: loc.L(1, 0) = 1.0; break;
      case kChL11: loc.L(1, 1) = 1.0; break;
      case kChU0: loc.u.x() = 1.0; break;
      case kChU1: loc.u.y() = 1.0; break;
      case kChJ: loc.J = 1.0; break;
      case kChB0: loc.b.x() = 1.0; break;
      case kChB1: loc.b.y() = 1.0; break;
      case kChUhat0: hat.u.x() = 1.0; break;
      case kChUhat1: hat.u.y() = 1.0; break;
      case kChPhat: hat.p = 1.0; break;
      case kChBhat0: hat.b.x() = 1.0; break;
      case kChBhat1: hat.b.y() = 1.0; break;
      case kChRhat: hat.r = 1.0; break;
      default: break;
    }
    const FluxValues f = eval_numerical_flux(loc, hat, n, m, d, prm);
    tab(kOutF1_00, ch) = f.f1(0, 0);
    tab(kOutF1_01, ch) = f.f1(0, 1);
    tab(kOutF1_10, ch) = f.f1(1, 0);
    tab(kOutF1_11, ch) = f.f1(1, 1);
    tab(kOutF2_0, ch) = f.f2.x();
    tab(kOutF2_1, ch) = f.f2.y();
    tab(kOutF3, ch) = f.f3;
    tab(kOutF4, ch) = f.f4;
    tab(kOutF5_0, ch) = f.f5.x();
    tab(kOutF5_1, ch) = f.f5.y();
    tab(kOutF6, ch) = f.f6;
  }
  return tab;
}

}  // namespace

LocalMatrices assemble_local(const Mesh& mesh, int cell, const PhysParams& prm,
                             const ConvectiveFields& conv, const Forcing& forcing,
                             const ReferenceElement& refel, const DofLayout& layout) {
  const int k = layout.k();
  if (refel.k() != k) fail(ErrorCode::kInvalidArgument, "reference element degree mismatch");
  const int n = layout.n_cell();
  const int nl = layout.n_low();
  const int NL = layout.local_size();
  const int oL = layout.local_offset(LocalField::kL);
  const int oU = layout.local_offset(LocalField::kU);
  const int oP = layout.local_offset(LocalField::kP);
  const int oJ = layout.local_offset(LocalField::kJ);
  const int oB = layout.local_offset(LocalField::kB);
  const int oR = layout.local_offset(LocalField::kR);
  const int NS = 3 * trace_slots_per_facet(k);

  LocalMatrices lm;
  lm.cell = cell;
  lm.trace = element_trace(layout, mesh, cell);

  // Slot-space blocks; slots are folded onto unique trace dofs at the end.
  Eigen::MatrixXd all = Eigen::MatrixXd::Zero(NL + NS, NL + NS);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(NL);

  const AffineMap map = affine_map(mesh, cell);
  const Mat2& Jinv = map.inverse;

  // Volume terms.
  const auto& vrule = refel.volume_rule();
  Eigen::VectorXd phi(n), chi(nl);
  Eigen::MatrixX2d gphi(n, 2), gchi(nl, 2);
  for (int q = 0; q < vrule.size(); ++q) {
    const double W = vrule.w[q] * map.det;
    const Vec2 x = map.to_physical(Vec2(vrule.x[q], vrule.y[q]));
    phi = refel.cell_values().row(q).transpose();
    chi = refel.low_values().row(q).transpose();
    for (int a = 0; a < n; ++a) {
      const Eigen::RowVector2d gr(refel.cell_dxi()(q, a), refel.cell_deta()(q, a));
      gphi.row(a) = gr * Jinv;
    }
    for (int a = 0; a < nl; ++a) {
      const Eigen::RowVector2d gr(refel.low_dxi()(q, a), refel.low_deta()(q, a));
      gchi.row(a) = gr * Jinv;
    }
    const VolumeSample cs = conv.volume(cell, q, x);
    const Vec2 g = forcing.g ? forcing.g(x) : Vec2::Zero();
    const Vec2 f = forcing.f ? forcing.f(x) : Vec2::Zero();
    const Eigen::VectorXd w_dot_grad = gphi * cs.w;
    const Eigen::VectorXd curl_phi_c0 = -gphi.col(1);  // curl(phi e1)
    const Eigen::VectorXd curl_phi_c1 = gphi.col(0);   // curl(phi e2)

    const Eigen::MatrixXd mass = W * phi * phi.transpose();
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        const int rl = oL + (2 * i + j) * n;
        // (a): Re (L, G) + (u, div G)
        all.block(rl, rl, n, n) += prm.re * mass;
        all.block(rl, oU + i * n, n, n) += W * gphi.col(j) * phi.transpose();
        // (b): (L, grad v)
        all.block(oU + i * n, rl, n, n) += W * gphi.col(j) * phi.transpose();
      }
    }
    for (int i = 0; i < 2; ++i) {
      const int ru = oU + i * n;
      // (b): -(p, div v) - (u (x) w, grad v)
      all.block(ru, oP, n, nl) -= W * gphi.col(i) * chi.transpose();
      all.block(ru, ru, n, n) -= W * w_dot_grad * phi.transpose();
      // (b): kappa (b, curl(v x d)); v x d = s with s = phi d2 (i=0) or -phi d1 (i=1).
      const double sign = i == 0 ? 1.0 : -1.0;
      const double dcomp = i == 0 ? cs.d.y() : cs.d.x();
      const Eigen::RowVector2d grad_dcomp = i == 0 ? cs.grad_d.row(1) : cs.grad_d.row(0);
      Eigen::MatrixX2d gs = sign * (gphi * dcomp + phi * grad_dcomp);
      all.block(ru, oB, n, n) += prm.kappa * W * gs.col(1) * phi.transpose();
      all.block(ru, oB + n, n, n) -= prm.kappa * W * gs.col(0) * phi.transpose();
      rhs.segment(ru, n) += W * g(i) * phi;
      // (c): -(u, grad q)
      all.block(oP, ru, nl, n) -= W * gchi.col(i) * phi.transpose();
    }
    // (d): Rm/kappa (J, H) - (b, curl H), curl H = (H_y, -H_x)
    all.block(oJ, oJ, n, n) += (prm.rm / prm.kappa) * mass;
    all.block(oJ, oB, n, n) -= W * gphi.col(1) * phi.transpose();
    all.block(oJ, oB + n, n, n) += W * gphi.col(0) * phi.transpose();
    // (e): (J, curl c) - (r, div c) - kappa (u, d x curl c)
    for (int i = 0; i < 2; ++i) {
      const int rb = oB + i * n;
      const Eigen::VectorXd& curl_c = i == 0 ? curl_phi_c0 : curl_phi_c1;
      all.block(rb, oJ, n, n) += W * curl_c * phi.transpose();
      all.block(rb, oR, n, nl) -= W * gphi.col(i) * chi.transpose();
      all.block(rb, oU, n, n) -= prm.kappa * W * cs.d.y() * curl_c * phi.transpose();
      all.block(rb, oU + n, n, n) += prm.kappa * W * cs.d.x() * curl_c * phi.transpose();
      rhs.segment(rb, n) += W * f(i) * phi;
      // (f): -(b, grad s)
      all.block(oR, rb, nl, n) -= W * gchi.col(i) * phi.transpose();
    }
  }

  // Facet terms.
  const auto& frule = refel.facet_rule();
  const Eigen::MatrixXd& psi_tab = refel.facet_values();
  for (int lf = 0; lf < 3; ++lf) {
    const FacetRef fr = mesh.cell_facets(cell)[lf];
    const int orient = fr.sign > 0 ? 0 : 1;
    const bool boundary = mesh.is_boundary(fr.facet);
    const Vec2 nrm = mesh.outward_normal(cell, lf);
    const double len = mesh.facet_length(fr.facet);
    const Eigen::MatrixXd& tr = refel.trace(lf, orient);
    const Eigen::MatrixXd& trl = refel.low_trace(lf, orient);
    auto slot = [&](FacetField field, int comp) { return NL + trace_slot(k, lf, field, comp, 0); };

    for (int q = 0; q < frule.size(); ++q) {
      const double W = frule.w[q] * len;
      const Vec2 x = facet_point(mesh, fr.facet, frule.x[q]);
      const FacetSample fs = conv.facet(cell, lf, q, x, nrm);
      FluxTable tab = flux_table(nrm, fs.m, fs.d, prm);
      const Eigen::VectorXd ph = tr.row(q).transpose();
      const Eigen::VectorXd ch = trl.row(q).transpose();
      const Eigen::VectorXd ps = psi_tab.row(q).transpose();

      // Column position and basis values of each trial channel.
      struct Trial {
        int col;
        const Eigen::VectorXd* vals;
      };
      const std::array<Trial, kNumChannels> trials{{
          {oL + 0 * n, &ph}, {oL + 1 * n, &ph}, {oL + 2 * n, &ph}, {oL + 3 * n, &ph},
          {oU, &ph}, {oU + n, &ph}, {oJ, &ph}, {oB, &ph}, {oB + n, &ph},
          {slot(FacetField::kVelocity, 0), &ps}, {slot(FacetField::kVelocity, 1), &ps},
          {slot(FacetField::kPressure, 0), &ps},
          {slot(FacetField::kMagnetic, 0), &ps}, {slot(FacetField::kMagnetic, 1), &ps},
          {slot(FacetField::kMultiplier, 0), &ps},
      }};

      auto add = [&](int row, const Eigen::VectorXd& test, int out, const FluxTable& t) {
        for (int ch_i = 0; ch_i < kNumChannels; ++ch_i) {
          const double c = t(out, ch_i);
          if (c == 0.0) continue;
          const Trial& tr_i = trials[ch_i];
          all.block(row, tr_i.col, test.size(), tr_i.vals->size()) +=
              (W * c) * test * tr_i.vals->transpose();
        }
      };

      // Local rows.
      for (int c = 0; c < 4; ++c) add(oL + c * n, ph, kOutF1_00 + c, tab);
      add(oU, ph, kOutF2_0, tab);
      add(oU + n, ph, kOutF2_1, tab);
      add(oP, ch, kOutF3, tab);
      add(oJ, ph, kOutF4, tab);
      add(oB, ph, kOutF5_0, tab);
      add(oB + n, ph, kOutF5_1, tab);
      add(oR, ch, kOutF6, tab);

      // Facet rows: flux continuity, and on the boundary the normal-trace constraints
      // <(u - uhat).n, rho> and <(b - bhat).n, gamma>.
      if (boundary) {
        tab(kOutF3, kChUhat0) -= nrm.x();
        tab(kOutF3, kChUhat1) -= nrm.y();
        tab(kOutF6, kChBhat0) -= nrm.x();
        tab(kOutF6, kChBhat1) -= nrm.y();
      }
      add(slot(FacetField::kVelocity, 0), ps, kOutF2_0, tab);
      add(slot(FacetField::kVelocity, 1), ps, kOutF2_1, tab);
      add(slot(FacetField::kPressure, 0), ps, kOutF3, tab);
      add(slot(FacetField::kMagnetic, 0), ps, kOutF5_0, tab);
      add(slot(FacetField::kMagnetic, 1), ps, kOutF5_1, tab);
      add(slot(FacetField::kMultiplier, 0), ps, kOutF6, tab);
    }
  }

  // Fold slots onto unique trace dofs.
  const int NG = static_cast<int>(lm.trace.dofs.size());
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(NS, NG);
  for (int s = 0; s < NS; ++s) P(s, lm.trace.slot_to_index[s]) = 1.0;
  lm.a_ll = all.topLeftCorner(NL, NL);
  lm.a_lg = all.topRightCorner(NL, NS) * P;
  lm.a_gl = P.transpose() * all.bottomLeftCorner(NS, NL);
  lm.a_gg = P.transpose() * all.bottomRightCorner(NS, NS) * P;
  lm.f_l = rhs;
  return lm;
}

namespace {

Eigen::MatrixXd select(const Eigen::MatrixXd& m, const std::vector<int>& rows,
                       const std::vector<int>& cols) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
  }
  return out;
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, const std::vector<int>& rows) {
  Eigen::MatrixXd out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = m.row(rows[i]);
  return out;
}

Eigen::MatrixXd select_cols(const Eigen::MatrixXd& m, const std::vector<int>& cols) {
  Eigen::MatrixXd out(m.rows(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(j) = m.col(cols[j]);
  return out;
}

Eigen::VectorXd select(const Eigen::VectorXd& v, const std::vector<int>& idx) {
  Eigen::VectorXd out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out(i) = v(idx[i]);
  return out;
}

void check_factorization(const Eigen::PartialPivLU<Eigen::MatrixXd>& lu, int cell) {
  const double rc = lu.rcond();
  if (!(rc > 1e3 * std::numeric_limits<double>::epsilon()) || !std::isfinite(rc)) {
    fail(ErrorCode::kSingular,
         "local block of cell " + std::to_string(cell) +
             " is singular (rcond " + std::to_string(rc) +
             "); check that alpha1 > |w|/2 and beta1, beta2 > 0");
  }
}

}  // namespace

ReducedLocalMatrices eliminate_auxiliary(const LocalMatrices& lm, const DofLayout& layout) {
  ReducedLocalMatrices r;
  r.cell = lm.cell;
  r.trace = lm.trace;
  auto push_range = [](std::vector<int>& v, int off, int cnt) {
    for (int i = 0; i < cnt; ++i) v.push_back(off + i);
  };
  push_range(r.auxiliary, layout.local_offset(LocalField::kL), layout.local_count(LocalField::kL));
  push_range(r.auxiliary, layout.local_offset(LocalField::kJ), layout.local_count(LocalField::kJ));
  for (LocalField f : {LocalField::kU, LocalField::kP, LocalField::kB, LocalField::kR}) {
    push_range(r.primary, layout.local_offset(f), layout.local_count(f));
  }
  const Eigen::MatrixXd a_aa = select(lm.a_ll, r.auxiliary, r.auxiliary);
  Eigen::LLT<Eigen::MatrixXd> llt(a_aa);
  if (llt.info() != Eigen::Success) {
    fail(ErrorCode::kInternal, "auxiliary mass block is not positive definite");
  }
  const Eigen::MatrixXd a_ap = select(lm.a_ll, r.auxiliary, r.primary);
  const Eigen::MatrixXd a_ag = select_rows(lm.a_lg, r.auxiliary);
  const Eigen::MatrixXd a_pa = select(lm.a_ll, r.primary, r.auxiliary);
  const Eigen::MatrixXd a_ga = select_cols(lm.a_gl, r.auxiliary);

  r.aux_from_primary = llt.solve(a_ap);
  r.aux_from_trace = llt.solve(a_ag);
  r.aux_rhs = llt.solve(select(lm.f_l, r.auxiliary));

  r.a_pp = select(lm.a_ll, r.primary, r.primary) - a_pa * r.aux_from_primary;
  r.a_pg = select_rows(lm.a_lg, r.primary) - a_pa * r.aux_from_trace;
  r.a_gp = select_cols(lm.a_gl, r.primary) - a_ga * r.aux_from_primary;
  r.a_gg = lm.a_gg - a_ga * r.aux_from_trace;
  r.f_p = select(lm.f_l, r.primary) - a_pa * r.aux_rhs;
  r.f_g = -a_ga * r.aux_rhs;
  return r;
}

CondensedBlock condense(const LocalMatrices& lm, const DofLayout& layout) {
  const ReducedLocalMatrices r = eliminate_auxiliary(lm, layout);
  CondensedBlock cb;
  cb.cell = lm.cell;
  cb.trace = r.trace;
  cb.local_size = static_cast<int>(lm.a_ll.rows());
  cb.lu.compute(r.a_pp);
  check_factorization(cb.lu, lm.cell);
  cb.a_pp = r.a_pp;
  cb.primary = r.primary;
  cb.auxiliary = r.auxiliary;
  cb.a_pg = r.a_pg;
  cb.f_p = r.f_p;
  cb.aux_from_primary = r.aux_from_primary;
  cb.aux_from_trace = r.aux_from_trace;
  cb.aux_rhs = r.aux_rhs;
  cb.schur = r.a_gg - r.a_gp * cb.lu.solve(r.a_pg);
  cb.rhs = r.f_g - r.a_gp * cb.lu.solve(r.f_p);
  return cb;
}

CondensedBlock condense_full(const LocalMatrices& lm) {
  CondensedBlock cb;
  cb.cell = lm.cell;
  cb.trace = lm.trace;
  cb.local_size = static_cast<int>(lm.a_ll.rows());
  cb.lu.compute(lm.a_ll);
  check_factorization(cb.lu, lm.cell);
  cb.a_pp = lm.a_ll;
  for (int i = 0; i < cb.local_size; ++i) cb.primary.push_back(i);
  cb.a_pg = lm.a_lg;
  cb.f_p = lm.f_l;
  cb.aux_from_primary.resize(0, cb.local_size);
  cb.aux_from_trace.resize(0, lm.a_lg.cols());
  cb.aux_rhs.resize(0);
  cb.schur = lm.a_gg - lm.a_gl * cb.lu.solve(lm.a_lg);
  cb.rhs = -lm.a_gl * cb.lu.solve(lm.f_l);
  return cb;
}

Eigen::VectorXd reconstruct_local(const CondensedBlock& cb, const Eigen::VectorXd& trace_values) {
  const Eigen::VectorXd rhs = cb.f_p - cb.a_pg * trace_values;
  Eigen::VectorXd xp = cb.lu.solve(rhs);
  // One refinement sweep: with large kappa the local blocks lose digits in the divergence.
  xp += cb.lu.solve(rhs - cb.a_pp * xp);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(cb.local_size);
  for (std::size_t i = 0; i < cb.primary.size(); ++i) out(cb.primary[i]) = xp(i);
  if (!cb.auxiliary.empty()) {
    const Eigen::VectorXd xa =
        cb.aux_rhs - cb.aux_from_primary * xp - cb.aux_from_trace * trace_values;
    for (std::size_t i = 0; i < cb.auxiliary.size(); ++i) out(cb.auxiliary[i]) = xa(i);
  }
  return out;
}

Eigen::VectorXd gather_trace(const ElementTrace& trace, const Eigen::VectorXd& facet) {
  Eigen::VectorXd v(trace.dofs.size());
  for (std::size_t i = 0; i < trace.dofs.size(); ++i) v(i) = facet(trace.dofs[i]);
  return v;
}

}  // namespace mhdg
