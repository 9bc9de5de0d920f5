#include "mhdg/mhdg.h"

#include <cmath>
#include <limits>
#include <memory>
#include <new>
#include <string>

#include "mhdg/basis.hpp"
#include "mhdg/error.hpp"
#include "mhdg/mesh.hpp"
#include "mhdg/spaces.hpp"
#include "mhdg/verify.hpp"

struct mhdg_mesh {
  mhdg::Mesh mesh;
};

struct mhdg_result {
  mhdg::LevelResult row;
};

namespace {

thread_local std::string g_last_error;

mhdg_status to_status(mhdg::ErrorCode code) {
  return static_cast<mhdg_status>(static_cast<int>(code));
}

template <class Fn>
mhdg_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return MHDG_OK;
  } catch (const mhdg::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return MHDG_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MHDG_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return MHDG_ERR_INTERNAL;
  }
}

void require(bool cond, const char* what) {
  if (!cond) mhdg::fail(mhdg::ErrorCode::kInvalidArgument, what);
}

mhdg_status wrap_mesh(mhdg::Mesh&& m, mhdg_mesh** out) {
  *out = new mhdg_mesh{std::move(m)};
  return MHDG_OK;
}

mhdg::Variant to_variant(mhdg_variant v) {
  switch (v) {
    case MHDG_VARIANT_HDG: return mhdg::Variant::kHdg;
    case MHDG_VARIANT_EHDG: return mhdg::Variant::kEhdg;
  }
  mhdg::fail(mhdg::ErrorCode::kInvalidArgument, "unknown variant");
}

mhdg::CaseKind to_case(mhdg_case c) {
  switch (c) {
    case MHDG_CASE_SMOOTH2D: return mhdg::CaseKind::kSmooth2d;
    case MHDG_CASE_SINGULAR2D: return mhdg::CaseKind::kSingular2d;
    case MHDG_CASE_HARTMANN: return mhdg::CaseKind::kHartmann;
    case MHDG_CASE_NONLINEAR_SMOOTH2D: return mhdg::CaseKind::kNonlinearSmooth2d;
  }
  mhdg::fail(mhdg::ErrorCode::kInvalidArgument, "unknown case");
}

void check_level(mhdg_case kind, int level) {
  const int min_level = kind == MHDG_CASE_HARTMANN ? 1 : 0;
  if (level < min_level || level > 10) {
    mhdg::fail(mhdg::ErrorCode::kInvalidArgument, "mesh level out of range");
  }
}

mhdg::PhysParams to_params(const mhdg_options& o) {
  mhdg::PhysParams p;
  p.re = o.re;
  p.rm = o.rm;
  p.kappa = o.kappa;
  p.alpha1 = o.alpha1;
  p.beta1 = o.beta1;
  p.beta2 = o.beta2;
  return p;
}

void validate(const mhdg_options& o) {
  to_case(o.case_kind);
  to_variant(o.variant);
  if (o.k < mhdg::ReferenceElement::kMinDegree || o.k > mhdg::ReferenceElement::kMaxDegree) {
    mhdg::fail(mhdg::ErrorCode::kUnsupported, "polynomial degree must lie in 1..6");
  }
  to_params(o).validate();
  if (!(o.alpha1 > 0.0)) mhdg::fail(mhdg::ErrorCode::kParameter, "alpha1 must be positive");
  if (!std::isfinite(o.p0)) mhdg::fail(mhdg::ErrorCode::kParameter, "p0 must be finite");
  if (!(o.epsilon > 0.0)) mhdg::fail(mhdg::ErrorCode::kParameter, "epsilon must be positive");
  if (o.max_iter < 1) mhdg::fail(mhdg::ErrorCode::kParameter, "max_iter must be >= 1");
  if (!(o.damping > 0.0 && o.damping <= 1.0)) {
    mhdg::fail(mhdg::ErrorCode::kParameter, "damping must lie in (0, 1]");
  }
  if (o.rhat_bc != MHDG_RHAT_STRONG_ZERO && o.rhat_bc != MHDG_RHAT_NORMAL_CONSTRAINT) {
    mhdg::fail(mhdg::ErrorCode::kInvalidArgument, "unknown rhat boundary mode");
  }
  if (o.threads < 1) mhdg::fail(mhdg::ErrorCode::kInvalidArgument, "threads must be >= 1");
}

mhdg::RunSettings to_settings(const mhdg_options& o) {
  mhdg::RunSettings s;
  s.k = o.k;
  s.variant = to_variant(o.variant);
  s.solve.rhat_bc = o.rhat_bc == MHDG_RHAT_NORMAL_CONSTRAINT ? mhdg::MultiplierBc::kNormalConstraint
                                                             : mhdg::MultiplierBc::kStrongZero;
  s.solve.threads = o.threads;
  s.solve.keep_matrix = o.keep_matrix != 0;
  s.solve.monolithic = o.monolithic != 0;
  s.picard.epsilon = o.epsilon;
  s.picard.max_iter = o.max_iter;
  s.picard.damping = o.damping;
  return s;
}

}  // namespace

extern "C" {

const char* mhdg_version(void) { return "0.1.0"; }

const char* mhdg_last_error(void) { return g_last_error.c_str(); }

const char* mhdg_status_string(mhdg_status status) {
  switch (status) {
    case MHDG_OK: return "ok";
    case MHDG_ERR_INVALID_ARGUMENT: return "invalid argument";
    case MHDG_ERR_UNSUPPORTED: return "unsupported";
    case MHDG_ERR_GEOMETRY: return "geometry error";
    case MHDG_ERR_SINGULAR: return "singular system";
    case MHDG_ERR_NOT_CONVERGED: return "not converged";
    case MHDG_ERR_PARAMETER: return "parameter error";
    case MHDG_ERR_IO: return "i/o error";
    case MHDG_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

mhdg_status mhdg_mesh_structured_square(int n, mhdg_mesh** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    require(n >= 1, "n must be >= 1");
    wrap_mesh(mhdg::gen_structured_square(n), out);
  });
}

mhdg_status mhdg_mesh_lshape(int n, mhdg_mesh** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    require(n >= 1, "n must be >= 1");
    wrap_mesh(mhdg::gen_lshape(n), out);
  });
}

mhdg_status mhdg_mesh_strip(int level, mhdg_mesh** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    require(level >= 1, "level must be >= 1");
    wrap_mesh(mhdg::gen_strip(level), out);
  });
}

mhdg_status mhdg_mesh_from_arrays(int num_vertices, const double* xy, int num_cells,
                                  const int* cells, mhdg_mesh** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    require(num_vertices >= 3 && num_cells >= 1, "mesh needs at least one triangle");
    require(xy != nullptr && cells != nullptr, "null array");
    std::vector<mhdg::Vec2> v(num_vertices);
    for (int i = 0; i < num_vertices; ++i) v[i] = mhdg::Vec2(xy[2 * i], xy[2 * i + 1]);
    std::vector<std::array<int, 3>> c(num_cells);
    for (int i = 0; i < num_cells; ++i) {
      for (int j = 0; j < 3; ++j) {
        const int idx = cells[3 * i + j];
        if (idx < 0 || idx >= num_vertices) {
          mhdg::fail(mhdg::ErrorCode::kGeometry, "cell vertex index out of range");
        }
        c[i][j] = idx;
      }
    }
    wrap_mesh(mhdg::Mesh(std::move(v), std::move(c)), out);
  });
}

mhdg_status mhdg_mesh_read(const char* path, mhdg_mesh** out) {
  return guarded([&] {
    require(out != nullptr && path != nullptr, "null argument");
    wrap_mesh(mhdg::read_mesh_file(path), out);
  });
}

mhdg_status mhdg_mesh_write(const mhdg_mesh* mesh, const char* path) {
  return guarded([&] {
    require(mesh != nullptr && path != nullptr, "null argument");
    mhdg::write_mesh_file(mesh->mesh, path);
  });
}

mhdg_status mhdg_mesh_refine(const mhdg_mesh* mesh, mhdg_mesh** out) {
  return guarded([&] {
    require(mesh != nullptr && out != nullptr, "null argument");
    wrap_mesh(mhdg::uniform_refine(mesh->mesh), out);
  });
}

mhdg_status mhdg_mesh_get_info(const mhdg_mesh* mesh, mhdg_mesh_info* info) {
  return guarded([&] {
    require(mesh != nullptr && info != nullptr, "null argument");
    const mhdg::Mesh& m = mesh->mesh;
    info->vertices = m.num_vertices();
    info->cells = m.num_cells();
    info->facets = m.num_facets();
    info->boundary_facets = m.num_boundary_facets();
    info->h = m.max_cell_diameter();
    info->min_angle = m.min_angle();
    info->area = m.total_area();
  });
}

void mhdg_mesh_free(mhdg_mesh* mesh) { delete mesh; }

mhdg_status mhdg_dof_counts_for(const mhdg_mesh* mesh, int k, mhdg_variant variant,
                                mhdg_dof_counts* out) {
  return guarded([&] {
    require(mesh != nullptr && out != nullptr, "null argument");
    const mhdg::DofLayout layout(mesh->mesh, k, to_variant(variant));
    const mhdg::DofCounts c = mhdg::count_global_dofs(layout);
    out->velocity = c.velocity;
    out->pressure = c.pressure;
    out->magnetic = c.magnetic;
    out->multiplier = c.multiplier;
    out->total = c.total;
  });
}

mhdg_status mhdg_case_from_name(const char* name, mhdg_case* out) {
  return guarded([&] {
    require(name != nullptr && out != nullptr, "null argument");
    switch (mhdg::parse_case(name)) {
      case mhdg::CaseKind::kSmooth2d: *out = MHDG_CASE_SMOOTH2D; break;
      case mhdg::CaseKind::kSingular2d: *out = MHDG_CASE_SINGULAR2D; break;
      case mhdg::CaseKind::kHartmann: *out = MHDG_CASE_HARTMANN; break;
      case mhdg::CaseKind::kNonlinearSmooth2d: *out = MHDG_CASE_NONLINEAR_SMOOTH2D; break;
    }
  });
}

const char* mhdg_case_name(mhdg_case kind) {
  try {
    return mhdg::case_name(to_case(kind));
  } catch (...) {
    return "unknown";
  }
}

mhdg_status mhdg_case_mesh(mhdg_case kind, int level, mhdg_mesh** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    check_level(kind, level);
    const mhdg::ManufacturedCase mc = mhdg::make_case(to_case(kind), mhdg::PhysParams{}, 1.0);
    wrap_mesh(mc.mesh(level), out);
  });
}

void mhdg_options_default(mhdg_options* o) {
  if (!o) return;
  o->case_kind = MHDG_CASE_SMOOTH2D;
  o->variant = MHDG_VARIANT_EHDG;
  o->k = 1;
  o->re = 1.0;
  o->rm = 1.0;
  o->kappa = 1.0;
  o->alpha1 = 125.0;
  o->beta1 = 1.0;
  o->beta2 = 1.0;
  o->p0 = 1.0;
  o->epsilon = 1e-10;
  o->max_iter = 100;
  o->damping = 1.0;
  o->rhat_bc = MHDG_RHAT_STRONG_ZERO;
  o->threads = 1;
  o->keep_matrix = 0;
  o->monolithic = 0;
}

mhdg_status mhdg_options_validate(const mhdg_options* opts) {
  return guarded([&] {
    require(opts != nullptr, "null options");
    validate(*opts);
  });
}

mhdg_status mhdg_solve_case(const mhdg_options* opts, int level, mhdg_result** out) {
  return guarded([&] {
    require(opts != nullptr && out != nullptr, "null argument");
    validate(*opts);
    const mhdg::ManufacturedCase mc =
        mhdg::make_case(to_case(opts->case_kind), to_params(*opts), opts->p0);
    check_level(opts->case_kind, level);
    auto res = std::make_unique<mhdg_result>();
    res->row = mhdg::run_level(mc, level, to_settings(*opts));
    *out = res.release();
  });
}

mhdg_status mhdg_solve_case_on_mesh(const mhdg_options* opts, const mhdg_mesh* mesh,
                                    mhdg_result** out) {
  return guarded([&] {
    require(opts != nullptr && mesh != nullptr && out != nullptr, "null argument");
    validate(*opts);
    const mhdg::ManufacturedCase mc =
        mhdg::make_case(to_case(opts->case_kind), to_params(*opts), opts->p0);
    auto res = std::make_unique<mhdg_result>();
    res->row = mhdg::run_on_mesh(mc, mesh->mesh, -1, to_settings(*opts));
    *out = res.release();
  });
}

mhdg_status mhdg_result_report(const mhdg_result* result, mhdg_report* out) {
  return guarded([&] {
    require(result != nullptr && out != nullptr, "null argument");
    const mhdg::LevelResult& r = result->row;
    out->level = r.level;
    out->h = r.h;
    out->cells = r.cells;
    out->dofs = r.dofs;
    out->system_size = r.system_size;
    out->err_L_scaled = r.errors.err_L;
    out->err_u = r.errors.err_u;
    out->err_p = r.errors.err_p;
    out->err_J_scaled = r.errors.err_J;
    out->err_b = r.errors.err_b;
    out->err_r = r.errors.err_r;
    out->divinf_u = r.errors.div_u;
    out->divinf_b = r.errors.div_b;
    out->max_u = r.errors.max_u;
    out->max_b = r.errors.max_b;
    out->jump_u = r.invariants.jump_u;
    out->jump_b = r.invariants.jump_b;
    out->boundary_u = r.invariants.boundary_u;
    out->boundary_b = r.invariants.boundary_b;
    out->pressure_mean = r.invariants.pressure_mean;
    out->t_assembly_s = r.timings.assembly;
    out->t_solve_s = r.timings.solve;
    out->t_reconstruct_s = r.timings.reconstruct;
    out->picard_iterations = r.picard_iterations;
    out->converged = r.converged ? 1 : 0;
    out->num_warnings = static_cast<int>(r.warnings.size());
  });
}

const char* mhdg_result_warning(const mhdg_result* result, int index) {
  if (!result || index < 0 || index >= static_cast<int>(result->row.warnings.size())) {
    return nullptr;
  }
  return result->row.warnings[index].c_str();
}

mhdg_status mhdg_result_picard_change(const mhdg_result* result, int index, double* change_u,
                                      double* change_b) {
  return guarded([&] {
    require(result != nullptr && change_u != nullptr && change_b != nullptr, "null argument");
    const auto& h = result->row.history;
    require(index >= 0 && index < static_cast<int>(h.change_u.size()), "iteration out of range");
    *change_u = h.change_u[index];
    *change_b = h.change_b[index];
  });
}

mhdg_status mhdg_result_write_matrix(const mhdg_result* result, const char* path) {
  return guarded([&] {
    require(result != nullptr && path != nullptr, "null argument");
    if (result->row.matrix.size() == 0) {
      mhdg::fail(mhdg::ErrorCode::kInvalidArgument, "no matrix kept; set keep_matrix");
    }
    mhdg::write_matrix_coo(result->row.matrix, path);
  });
}

void mhdg_result_free(mhdg_result* result) { delete result; }

double mhdg_observed_rate(double e_coarse, double e_fine, double h_coarse, double h_fine) {
  const auto r = mhdg::observed_rate(e_coarse, e_fine, h_coarse, h_fine);
  return r ? *r : std::numeric_limits<double>::quiet_NaN();
}

}  // extern "C"
