#include "mhdg/verify.hpp"

#include <cmath>

#include "mhdg/error.hpp"

namespace mhdg {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLambda = 0.54448373678246;
constexpr double kOmega = 1.5 * kPi;

// d x (0, 0, c) for planar d
Vec2 cross_scalar(const Vec2& d, double c) { return Vec2(d.y() * c, -d.x() * c); }

}  // namespace

const char* case_name(CaseKind kind) {
  switch (kind) {
    case CaseKind::kSmooth2d: return "smooth2d";
    case CaseKind::kSingular2d: return "singular2d";
    case CaseKind::kHartmann: return "hartmann";
    case CaseKind::kNonlinearSmooth2d: return "nonlinear-smooth2d";
  }
  return "?";
}

CaseKind parse_case(const std::string& name) {
  for (CaseKind k : {CaseKind::kSmooth2d, CaseKind::kSingular2d, CaseKind::kHartmann,
                     CaseKind::kNonlinearSmooth2d}) {
    if (name == case_name(k)) return k;
  }
  fail(ErrorCode::kInvalidArgument, "unknown case '" + name + "'");
}

Vec2 ManufacturedCase::g(const Vec2& x) const {
  const ExactPoint e = exact(x);
  const JetVec wj = nonlinear ? e.u : w(x);
  const JetVec dj = nonlinear ? e.b : d(x);
  const Vec2 wv = wj.value();
  const Vec2 dv = dj.value();
  return -e.u.laplacian() / params.re + e.p.g + e.u.grad() * wv +
         params.kappa * cross_scalar(dv, e.b.curl());
}

Vec2 ManufacturedCase::f(const Vec2& x) const {
  const ExactPoint e = exact(x);
  const JetVec dj = nonlinear ? e.b : d(x);
  const Jet s = e.u.c[0] * dj.c[1] - e.u.c[1] * dj.c[0];
  const Vec2 gc = e.b.grad_curl();
  const Vec2 curl_curl_b(gc.y(), -gc.x());
  const Vec2 curl_s(s.dy(), -s.dx());
  return params.kappa / params.rm * curl_curl_b + e.r.g - params.kappa * curl_s;
}

Problem ManufacturedCase::problem() const {
  Problem prob;
  prob.params = params;
  const ManufacturedCase self = *this;
  prob.forcing.g = [self](const Vec2& x) { return self.g(x); };
  prob.forcing.f = [self](const Vec2& x) { return self.f(x); };
  prob.u_d = [self](const Vec2& x) { return self.u(x); };
  prob.b_d = [self](const Vec2& x) { return self.b(x); };
  return prob;
}

std::unique_ptr<ConvectiveFields> ManufacturedCase::convection() const {
  if (nonlinear) fail(ErrorCode::kInvalidArgument, "nonlinear cases have no prescribed w, d");
  auto wf = w;
  auto df = d;
  return std::make_unique<AnalyticConvection>(
      [wf](const Vec2& x) { return wf(x).value(); }, [df](const Vec2& x) { return df(x).value(); },
      [df](const Vec2& x) { return df(x).grad(); });
}

ManufacturedCase case_smooth2d(const PhysParams& params, double p0) {
  ManufacturedCase mc;
  mc.kind = CaseKind::kSmooth2d;
  mc.params = params;
  mc.p0 = p0;
  mc.exact = [p0](const Vec2& pt) {
    const Jet X = Jet::x(pt.x());
    const Jet Y = Jet::y(pt.y());
    const Jet ex = exp(X);
    const Jet xm1 = X - 1.0;
    const Jet ym1 = Y - 1.0;
    ExactPoint e;
    e.u.c[0] = -2.0 * X * X * ex * (Y - Y * Y) * (2.0 * Y - 1.0) * xm1 * xm1;
    e.u.c[1] = -1.0 * X * Y * Y * ex * (X * (X + 3.0) - 2.0) * xm1 * ym1 * ym1;
    e.b = e.u;
    e.p = p0 * (sin(kPi * X) * sin(kPi * Y) - 4.0 / (kPi * kPi));
    return e;
  };
  mc.w = [f = mc.exact](const Vec2& x) { return f(x).u; };
  mc.d = [f = mc.exact](const Vec2& x) { return f(x).b; };
  mc.mesh = [](int level) { return gen_structured_square(1 << level); };
  return mc;
}

namespace {

struct PsiTerms {
  Jet psi, dpsi, d3psi;
};

PsiTerms psi_terms(const Jet& phi) {
  const double lp = 1.0 + kLambda;
  const double lm = 1.0 - kLambda;
  const double c = std::cos(kLambda * kOmega);
  const Jet sp = sin(lp * phi), cp = cos(lp * phi);
  const Jet sm = sin(lm * phi), cm = cos(lm * phi);
  PsiTerms t;
  t.psi = c * (sp / lp - sm / lm) - cp + cm;
  t.dpsi = c * (cp - cm) + lp * sp - lm * sm;
  t.d3psi = c * (-lp * lp * cp + lm * lm * cm) - lp * lp * lp * sp + lm * lm * lm * sm;
  return t;
}

double psi_pressure_factor(double phi) {
  const PsiTerms t = psi_terms(Jet(phi));
  return -((1.0 + kLambda) * (1.0 + kLambda) * t.dpsi.v + t.d3psi.v) / (1.0 - kLambda);
}

}  // namespace

double singular_pressure_mean() {
  // p = rho^(lambda-1) Theta(phi); integrate rho first along each ray up to the square boundary.
  std::vector<double> gx, gw;
  gauss_jacobi(20, 0.0, 0.0, gx, gw);
  const double segs[5] = {0.0, 0.25 * kPi, 0.75 * kPi, 1.25 * kPi, 1.5 * kPi};
  const int sub = 16;
  double integral = 0.0;
  for (int s = 0; s < 4; ++s) {
    const double h = (segs[s + 1] - segs[s]) / sub;
    for (int i = 0; i < sub; ++i) {
      const double a = segs[s] + i * h;
      for (std::size_t q = 0; q < gx.size(); ++q) {
        const double phi = a + 0.5 * h * (gx[q] + 1.0);
        double radius = 0.0;
        switch (s) {
          case 0: radius = 1.0 / std::cos(phi); break;
          case 1: radius = 1.0 / std::sin(phi); break;
          case 2: radius = -1.0 / std::cos(phi); break;
          default: radius = -1.0 / std::sin(phi); break;
        }
        integral += 0.5 * h * gw[q] * psi_pressure_factor(phi) *
                    std::pow(radius, kLambda + 1.0) / (kLambda + 1.0);
      }
    }
  }
  return integral / 3.0;
}

ManufacturedCase case_singular2d(const PhysParams& params) {
  ManufacturedCase mc;
  mc.kind = CaseKind::kSingular2d;
  mc.params = params;
  mc.p0 = 0.0;
  const double pmean = singular_pressure_mean();
  mc.exact = [pmean](const Vec2& pt) {
    if (pt.norm() == 0.0) fail(ErrorCode::kInvalidArgument, "singular solution evaluated at the corner");
    Jet rho, phi;
    polar_jets(pt.x(), pt.y(), rho, phi);
    const PsiTerms t = psi_terms(phi);
    const double lp = 1.0 + kLambda;
    const Jet rl = pow(rho, kLambda);
    const Jet sphi = sin(phi), cphi = cos(phi);
    ExactPoint e;
    e.u.c[0] = rl * (lp * sphi * t.psi + cphi * t.dpsi);
    e.u.c[1] = rl * (-lp * cphi * t.psi + sphi * t.dpsi);
    e.p = -1.0 * pow(rho, kLambda - 1.0) * (lp * lp * t.dpsi + t.d3psi) / (1.0 - kLambda) - pmean;
    const Jet rb = (2.0 / 3.0) * pow(rho, -1.0 / 3.0);
    e.b.c[0] = -1.0 * rb * sin(phi / 3.0);
    e.b.c[1] = rb * cos(phi / 3.0);
    return e;
  };
  mc.w = [](const Vec2&) { return JetVec{}; };
  mc.d = [](const Vec2&) {
    JetVec d;
    d.c[0] = Jet(-1.0);
    d.c[1] = Jet(1.0);
    return d;
  };
  mc.mesh = [](int level) { return gen_lshape(1 << level); };
  return mc;
}

double hartmann_profile_square_mean(double ha) {
  const double sh = std::sinh(ha);
  const double int_s2 = (std::sinh(2.0 * ha) / (2.0 * ha) - 1.0) / (sh * sh);
  const double int_ys = 2.0 * (std::cosh(ha) / ha - sh / (ha * ha)) / sh;
  return 0.5 * (int_s2 - 2.0 * int_ys + 2.0 / 3.0);
}

ManufacturedCase case_hartmann(const PhysParams& params) {
  params.validate();
  ManufacturedCase mc;
  mc.kind = CaseKind::kHartmann;
  mc.params = params;
  mc.nonlinear = true;
  const double ha = params.hartmann();
  const double re = params.re;
  const double kappa = params.kappa;
  const double mean_f2 = hartmann_profile_square_mean(ha);
  mc.p0 = -mean_f2 / (2.0 * kappa);
  mc.exact = [ha, re, kappa, mean_f2](const Vec2& pt) {
    const Jet Y = Jet::y(pt.y());
    // also carry an x-jet so derivatives in x are present (and zero)
    const Jet X = Jet::x(pt.x());
    const Jet zero_x = 0.0 * X;
    const Jet F = sinh(ha * Y) / std::sinh(ha) - Y + zero_x;
    ExactPoint e;
    e.u.c[0] = re / (ha * std::tanh(ha)) * (1.0 - cosh(ha * Y) / std::cosh(ha)) + zero_x;
    e.u.c[1] = Jet(0.0);
    e.b.c[0] = F / kappa;
    e.b.c[1] = Jet(1.0);
    e.p = -1.0 / (2.0 * kappa) * (F * F - mean_f2);
    return e;
  };
  mc.mesh = [](int level) { return gen_strip(level); };
  return mc;
}

ManufacturedCase make_case(CaseKind kind, const PhysParams& params, double p0) {
  switch (kind) {
    case CaseKind::kSmooth2d: return case_smooth2d(params, p0);
    case CaseKind::kSingular2d: return case_singular2d(params);
    case CaseKind::kHartmann: return case_hartmann(params);
    case CaseKind::kNonlinearSmooth2d: {
      ManufacturedCase mc = case_smooth2d(params, p0);
      mc.kind = kind;
      mc.nonlinear = true;
      return mc;
    }
  }
  fail(ErrorCode::kInvalidArgument, "unknown case");
}

ErrorReport error_norms(const FieldState& state, const ManufacturedCase& mc, const Mesh& m,
                        const DofLayout& layout, const ReferenceElement& refel) {
  const auto& rule = refel.volume_rule();
  const double re = mc.params.re;
  const double jscale = mc.params.rm / mc.params.kappa;
  double sL = 0, su = 0, sp = 0, sJ = 0, sb = 0, sr = 0;
  ErrorReport rep;
  for (int c = 0; c < m.num_cells(); ++c) {
    const AffineMap map = affine_map(m, c);
    for (int q = 0; q < rule.size(); ++q) {
      const double W = rule.w[q] * map.det;
      const Vec2 x = map.to_physical(Vec2(rule.x[q], rule.y[q]));
      const ExactPoint e = mc.exact(x);
      const PointFields h = evaluate_cell(state, layout, refel, map, c, q);
      sL += W * (e.u.grad() - re * h.L).squaredNorm();
      su += W * (e.u.value() - h.u).squaredNorm();
      sp += W * (e.p.v - h.p) * (e.p.v - h.p);
      sJ += W * (e.b.curl() - jscale * h.J) * (e.b.curl() - jscale * h.J);
      sb += W * (e.b.value() - h.b).squaredNorm();
      sr += W * (e.r.v - h.r) * (e.r.v - h.r);
      rep.div_u = std::max(rep.div_u, std::abs(h.grad_u.trace()));
      rep.div_b = std::max(rep.div_b, std::abs(h.grad_b.trace()));
      rep.max_u = std::max(rep.max_u, h.u.norm());
      rep.max_b = std::max(rep.max_b, h.b.norm());
    }
  }
  rep.err_L = std::sqrt(sL);
  rep.err_u = std::sqrt(su);
  rep.err_p = std::sqrt(sp);
  rep.err_J = std::sqrt(sJ);
  rep.err_b = std::sqrt(sb);
  rep.err_r = std::sqrt(sr);
  return rep;
}

InvariantReport check_invariants(const FieldState& state, const Mesh& m, const DofLayout& layout,
                                 const ReferenceElement& refel) {
  InvariantReport rep;
  const auto& rule = refel.volume_rule();
  for (int c = 0; c < m.num_cells(); ++c) {
    const AffineMap map = affine_map(m, c);
    for (int q = 0; q < rule.size(); ++q) {
      const PointFields h = evaluate_cell(state, layout, refel, map, c, q);
      rep.div_u = std::max(rep.div_u, std::abs(h.grad_u.trace()));
      rep.div_b = std::max(rep.div_b, std::abs(h.grad_b.trace()));
      rep.max_u = std::max(rep.max_u, h.u.norm());
      rep.max_b = std::max(rep.max_b, h.b.norm());
    }
  }
  const int nq = refel.facet_rule().size();
  for (int e = 0; e < m.num_facets(); ++e) {
    const auto& fc = m.facet_cells(e);
    const Vec2 n = m.facet_normal(e);
    auto local_facet = [&](int cell) {
      for (int lf = 0; lf < 3; ++lf) {
        if (m.cell_facets(cell)[lf].facet == e) return lf;
      }
      fail(ErrorCode::kInternal, "facet not found in its cell");
    };
    const int lf0 = local_facet(fc[0]);
    for (int q = 0; q < nq; ++q) {
      Vec2 u0, b0;
      evaluate_trace(state, m, layout, refel, fc[0], lf0, q, u0, b0);
      if (fc[1] >= 0) {
        Vec2 u1, b1;
        evaluate_trace(state, m, layout, refel, fc[1], local_facet(fc[1]), q, u1, b1);
        rep.jump_u = std::max(rep.jump_u, std::abs((u0 - u1).dot(n)));
        rep.jump_b = std::max(rep.jump_b, std::abs((b0 - b1).dot(n)));
      } else {
        Vec2 uh, bh;
        evaluate_hat(state, layout, refel, e, q, uh, bh);
        rep.boundary_u = std::max(rep.boundary_u, std::abs((u0 - uh).dot(n)));
        rep.boundary_b = std::max(rep.boundary_b, std::abs((b0 - bh).dot(n)));
      }
    }
  }
  rep.pressure_mean = pressure_mean(state, m, layout, refel);
  return rep;
}

LevelResult run_level(const ManufacturedCase& mc, int level, const RunSettings& settings) {
  return run_on_mesh(mc, mc.mesh(level), level, settings);
}

LevelResult run_on_mesh(const ManufacturedCase& mc, const Mesh& mesh, int level,
                        const RunSettings& settings) {
  const DofLayout layout(mesh, settings.k, settings.variant);
  const ReferenceElement refel(settings.k);
  const Problem prob = mc.problem();
  LevelResult row;
  row.level = level;
  row.h = mesh.max_cell_diameter();
  row.cells = mesh.num_cells();
  row.dofs = count_global_dofs(layout).total;
  FieldState state;
  if (mc.nonlinear) {
    NonlinearSolution sol = solve_nonlinear(mesh, layout, refel, prob, settings.picard, settings.solve);
    state = std::move(sol.state);
    row.timings = sol.timings;
    row.system_size = sol.system_size;
    row.picard_iterations = sol.history.iterations;
    row.converged = sol.history.converged;
    row.history = sol.history;
    row.warnings = std::move(sol.warnings);
    row.matrix = std::move(sol.matrix);
  } else {
    const auto conv = mc.convection();
    LinearSolution sol = solve_linear(mesh, layout, refel, prob, *conv, settings.solve);
    state = std::move(sol.state);
    row.timings = sol.timings;
    row.system_size = sol.system_size;
    row.warnings = std::move(sol.warnings);
    row.matrix = std::move(sol.matrix);
  }
  row.errors = error_norms(state, mc, mesh, layout, refel);
  row.invariants = check_invariants(state, mesh, layout, refel);
  return row;
}

std::optional<double> observed_rate(double e_coarse, double e_fine, double h_coarse,
                                    double h_fine) {
  if (!(e_coarse > 0.0) || !(e_fine > 0.0) || !(h_coarse > h_fine) || !std::isfinite(e_coarse) ||
      !std::isfinite(e_fine)) {
    return std::nullopt;
  }
  return std::log(e_coarse / e_fine) / std::log(h_coarse / h_fine);
}

double error_of(const ErrorReport& e, ErrorField f) {
  switch (f) {
    case ErrorField::kL: return e.err_L;
    case ErrorField::kU: return e.err_u;
    case ErrorField::kP: return e.err_p;
    case ErrorField::kJ: return e.err_J;
    case ErrorField::kB: return e.err_b;
    case ErrorField::kR: return e.err_r;
  }
  return 0.0;
}

const char* error_field_name(ErrorField f) {
  static const char* kNames[] = {"L", "u", "p", "J", "b", "r"};
  return kNames[static_cast<int>(f)];
}

std::array<std::optional<double>, kNumErrorFields> last_rates(const std::vector<LevelResult>& rows) {
  std::array<std::optional<double>, kNumErrorFields> out{};
  if (rows.size() < 2) return out;
  const LevelResult& a = rows[rows.size() - 2];
  const LevelResult& b = rows.back();
  for (int i = 0; i < kNumErrorFields; ++i) {
    const auto f = static_cast<ErrorField>(i);
    out[i] = observed_rate(error_of(a.errors, f), error_of(b.errors, f), a.h, b.h);
  }
  return out;
}

}  // namespace mhdg
