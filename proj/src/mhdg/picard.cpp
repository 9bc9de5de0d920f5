#include "mhdg/picard.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "mhdg/error.hpp"
#include "mhdg/parallel.hpp"

namespace mhdg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

double sampled_sup(const Mesh& m, const ReferenceElement& refel, const ConvectiveFields& conv) {
  const auto& rule = refel.volume_rule();
  double sup = 0.0;
  for (int c = 0; c < m.num_cells(); ++c) {
    const AffineMap map = affine_map(m, c);
    for (int q = 0; q < rule.size(); ++q) {
      const Vec2 x = map.to_physical(Vec2(rule.x[q], rule.y[q]));
      sup = std::max(sup, conv.volume(c, q, x).w.norm());
    }
  }
  return sup;
}

LinearSolution solve_linear(const Mesh& m, const DofLayout& layout, const ReferenceElement& refel,
                            const Problem& prob, const ConvectiveFields& conv,
                            const SolveOptions& opts) {
  prob.params.validate();
  if (refel.k() != layout.k()) fail(ErrorCode::kInvalidArgument, "reference element degree mismatch");
  LinearSolution out;
  out.sup_w = sampled_sup(m, refel, conv);
  if (!(prob.params.alpha1 > 0.5 * out.sup_w)) {
    std::ostringstream msg;
    msg << "stabilization alpha1 = " << prob.params.alpha1 << " does not exceed sup|w|/2 = "
        << 0.5 * out.sup_w;
    if (opts.strict_stabilization) fail(ErrorCode::kParameter, msg.str());
    out.warnings.push_back(msg.str());
  }

  const VectorField zero = [](const Vec2&) { return Vec2::Zero().eval(); };
  const Eigen::VectorXd bvals = boundary_dof_values(layout, m, refel, prob.u_d ? prob.u_d : zero,
                                                    prob.b_d ? prob.b_d : zero);
  const Constraints bc = build_constraints(layout, bvals, opts.rhat_bc);
  const int nc = m.num_cells();

  auto t0 = Clock::now();
  if (opts.monolithic) {
    std::vector<LocalMatrices> locals(nc);
    parallel_for(nc, opts.threads, [&](int c) {
      locals[c] = assemble_local(m, c, prob.params, conv, prob.forcing, refel, layout);
    });
    out.timings.assembly = seconds_since(t0);
    t0 = Clock::now();
    out.state = solve_monolithic(m, layout, locals, bc);
    out.timings.solve = seconds_since(t0);
    t0 = Clock::now();
    post_normalize_pressure(out.state, m, layout, refel);
    if (bc.pinned_multiplier >= 0) post_normalize_multiplier(out.state, m, layout, refel);
    out.timings.reconstruct = seconds_since(t0);
    out.system_size = static_cast<int>(out.state.local.size()) + layout.num_facet_dofs();
    return out;
  }

  std::vector<CondensedBlock> blocks(nc);
  parallel_for(nc, opts.threads, [&](int c) {
    const LocalMatrices lm = assemble_local(m, c, prob.params, conv, prob.forcing, refel, layout);
    blocks[c] = condense(lm, layout);
  });
  SparseSystem sys = assemble_global(m, layout, blocks, bc);
  out.timings.assembly = seconds_since(t0);
  out.system_size = sys.size();

  t0 = Clock::now();
  Eigen::VectorXd facet = solve_condensed(sys, &out.residual);
  out.timings.solve = seconds_since(t0);

  t0 = Clock::now();
  out.state.local_size = layout.local_size();
  out.state.local.resize(static_cast<Eigen::Index>(nc) * layout.local_size());
  out.state.facet = std::move(facet);
  parallel_for(nc, opts.threads, [&](int c) {
    out.state.cell(c) = reconstruct_local(blocks[c], gather_trace(blocks[c].trace, out.state.facet));
  });
  post_normalize_pressure(out.state, m, layout, refel);
  if (bc.pinned_multiplier >= 0) post_normalize_multiplier(out.state, m, layout, refel);
  out.timings.reconstruct = seconds_since(t0);

  if (opts.keep_matrix) {
    out.matrix = std::move(sys.matrix);
    out.rhs = std::move(sys.rhs);
  }
  return out;
}

DiscreteConvection::DiscreteConvection(const FieldState& state, const Mesh& m,
                                       const DofLayout& layout, const ReferenceElement& refel)
    : state_(state), mesh_(m), layout_(layout), refel_(refel) {
  maps_.reserve(m.num_cells());
  for (int c = 0; c < m.num_cells(); ++c) maps_.push_back(affine_map(m, c));
}

VolumeSample DiscreteConvection::volume(int cell, int q, const Vec2&) const {
  const PointFields pf = evaluate_cell(state_, layout_, refel_, maps_[cell], cell, q);
  VolumeSample s;
  s.w = pf.u;
  s.d = pf.b;
  s.grad_d = pf.grad_b;
  return s;
}

FacetSample DiscreteConvection::facet(int cell, int lf, int q, const Vec2&, const Vec2& n) const {
  Vec2 u, b, uhat, bhat;
  evaluate_trace(state_, mesh_, layout_, refel_, cell, lf, q, u, b);
  evaluate_hat(state_, layout_, refel_, mesh_.cell_facets(cell)[lf].facet, q, uhat, bhat);
  FacetSample s;
  s.m = u.dot(n);
  s.d = bhat;
  return s;
}

double vector_l2(const FieldState& state, const Mesh& m, const DofLayout& layout,
                 const ReferenceElement& refel, LocalField field) {
  const int n = layout.n_cell();
  const int off = layout.local_offset(field);
  const auto& rule = refel.volume_rule();
  const Eigen::MatrixXd& phi = refel.cell_values();
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(rule.w.data(), rule.size());
  double sum = 0.0;
  for (int c = 0; c < m.num_cells(); ++c) {
    const auto x = state.cell(c);
    const double det = 2.0 * m.cell_area(c);
    for (int i = 0; i < 2; ++i) {
      const Eigen::VectorXd v = phi * x.segment(off + i * n, n);
      sum += det * w.dot(v.cwiseProduct(v));
    }
  }
  return std::sqrt(sum);
}

namespace {

double relative_change(const FieldState& now, const FieldState& prev, const Mesh& m,
                       const DofLayout& layout, const ReferenceElement& refel, LocalField f) {
  FieldState diff;
  diff.local_size = now.local_size;
  diff.local = now.local - prev.local;
  const double dn = vector_l2(diff, m, layout, refel, f);
  const double nn = vector_l2(now, m, layout, refel, f);
  return nn > 0.0 ? dn / nn : dn;
}

}  // namespace

NonlinearSolution solve_nonlinear(const Mesh& m, const DofLayout& layout,
                                  const ReferenceElement& refel, const Problem& prob,
                                  const PicardConfig& cfg, const SolveOptions& opts,
                                  const IterateObserver& observer) {
  if (!(cfg.epsilon > 0.0)) fail(ErrorCode::kParameter, "Picard tolerance must be positive");
  if (cfg.max_iter < 1) fail(ErrorCode::kParameter, "Picard max_iter must be >= 1");
  if (!(cfg.damping > 0.0 && cfg.damping <= 1.0)) {
    fail(ErrorCode::kParameter, "Picard damping must lie in (0, 1]");
  }
  SolveOptions inner = opts;
  inner.strict_stabilization = false;

  NonlinearSolution out;
  FieldState prev;
  prev.local_size = layout.local_size();
  prev.local = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.num_cells()) * layout.local_size());
  prev.facet = Eigen::VectorXd::Zero(layout.num_facet_dofs());

  for (int it = 1; it <= cfg.max_iter; ++it) {
    const DiscreteConvection conv(prev, m, layout, refel);
    LinearSolution lin = solve_linear(m, layout, refel, prob, conv, inner);
    out.timings += lin.timings;
    out.system_size = lin.system_size;
    for (auto& w : lin.warnings) out.warnings.push_back("iteration " + std::to_string(it) + ": " + w);
    if (opts.keep_matrix) out.matrix = std::move(lin.matrix);

    FieldState next = std::move(lin.state);
    if (cfg.damping < 1.0) {
      next.local = cfg.damping * next.local + (1.0 - cfg.damping) * prev.local;
      next.facet = cfg.damping * next.facet + (1.0 - cfg.damping) * prev.facet;
    }
    const double cu = relative_change(next, prev, m, layout, refel, LocalField::kU);
    const double cb = relative_change(next, prev, m, layout, refel, LocalField::kB);
    out.history.change_u.push_back(cu);
    out.history.change_b.push_back(cb);
    out.history.iterations = it;
    if (observer) observer(it, next);
    prev = std::move(next);
    if (std::max(cu, cb) < cfg.epsilon) {
      out.history.converged = true;
      break;
    }
    if (!std::isfinite(cu) || !std::isfinite(cb)) break;
  }
  out.state = std::move(prev);
  return out;
}

}  // namespace mhdg
