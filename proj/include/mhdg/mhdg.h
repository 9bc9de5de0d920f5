/* C interface to the mhdg solver library. All functions return an mhdg_status; on failure the
 * message is available from mhdg_last_error() on the calling thread. Handles are opaque and
 * owned by the caller once returned. */
#ifndef MHDG_MHDG_H
#define MHDG_MHDG_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define MHDG_API __declspec(dllexport)
#else
#define MHDG_API __attribute__((visibility("default")))
#endif

typedef enum mhdg_status {
  MHDG_OK = 0,
  MHDG_ERR_INVALID_ARGUMENT = 1,
  MHDG_ERR_UNSUPPORTED = 2,
  MHDG_ERR_GEOMETRY = 3,
  MHDG_ERR_SINGULAR = 4,
  MHDG_ERR_NOT_CONVERGED = 5,
  MHDG_ERR_PARAMETER = 6,
  MHDG_ERR_IO = 7,
  MHDG_ERR_INTERNAL = 8
} mhdg_status;

typedef enum mhdg_variant { MHDG_VARIANT_HDG = 0, MHDG_VARIANT_EHDG = 1 } mhdg_variant;

typedef enum mhdg_case {
  MHDG_CASE_SMOOTH2D = 0,
  MHDG_CASE_SINGULAR2D = 1,
  MHDG_CASE_HARTMANN = 2,
  MHDG_CASE_NONLINEAR_SMOOTH2D = 3
} mhdg_case;

typedef enum mhdg_rhat_bc {
  MHDG_RHAT_STRONG_ZERO = 0,
  MHDG_RHAT_NORMAL_CONSTRAINT = 1
} mhdg_rhat_bc;

typedef struct mhdg_mesh mhdg_mesh;
typedef struct mhdg_result mhdg_result;

typedef struct mhdg_mesh_info {
  int vertices;
  int cells;
  int facets;
  int boundary_facets;
  double h;         /* largest cell diameter */
  double min_angle; /* radians */
  double area;
} mhdg_mesh_info;

typedef struct mhdg_dof_counts {
  int velocity;
  int pressure;
  int magnetic;
  int multiplier;
  int total;
} mhdg_dof_counts;

typedef struct mhdg_options {
  mhdg_case case_kind;
  mhdg_variant variant;
  int k;
  double re;
  double rm;
  double kappa;
  double alpha1;
  double beta1;
  double beta2;
  double p0;
  double epsilon; /* Picard tolerance */
  int max_iter;
  double damping;
  mhdg_rhat_bc rhat_bc;
  int threads;
  int keep_matrix;
  int monolithic;
} mhdg_options;

typedef struct mhdg_report {
  int level;
  double h;
  int cells;
  int dofs;
  int system_size;
  double err_L_scaled;
  double err_u;
  double err_p;
  double err_J_scaled;
  double err_b;
  double err_r;
  double divinf_u;
  double divinf_b;
  double max_u;
  double max_b;
  double jump_u;
  double jump_b;
  double boundary_u;
  double boundary_b;
  double pressure_mean;
  double t_assembly_s;
  double t_solve_s;
  double t_reconstruct_s;
  int picard_iterations;
  int converged;
  int num_warnings;
} mhdg_report;

MHDG_API const char* mhdg_version(void);
MHDG_API const char* mhdg_last_error(void);
MHDG_API const char* mhdg_status_string(mhdg_status status);

MHDG_API mhdg_status mhdg_mesh_structured_square(int n, mhdg_mesh** out);
MHDG_API mhdg_status mhdg_mesh_lshape(int n, mhdg_mesh** out);
MHDG_API mhdg_status mhdg_mesh_strip(int level, mhdg_mesh** out);
MHDG_API mhdg_status mhdg_mesh_from_arrays(int num_vertices, const double* xy, int num_cells,
                                           const int* cells, mhdg_mesh** out);
MHDG_API mhdg_status mhdg_mesh_read(const char* path, mhdg_mesh** out);
MHDG_API mhdg_status mhdg_mesh_write(const mhdg_mesh* mesh, const char* path);
MHDG_API mhdg_status mhdg_mesh_refine(const mhdg_mesh* mesh, mhdg_mesh** out);
MHDG_API mhdg_status mhdg_mesh_get_info(const mhdg_mesh* mesh, mhdg_mesh_info* info);
MHDG_API void mhdg_mesh_free(mhdg_mesh* mesh);

MHDG_API mhdg_status mhdg_dof_counts_for(const mhdg_mesh* mesh, int k, mhdg_variant variant,
                                         mhdg_dof_counts* out);

MHDG_API mhdg_status mhdg_case_from_name(const char* name, mhdg_case* out);
MHDG_API const char* mhdg_case_name(mhdg_case kind);
/* Mesh the case uses at `level` (smooth: 2*4^level cells, singular: 6*4^level, hartmann: level >= 1). */
MHDG_API mhdg_status mhdg_case_mesh(mhdg_case kind, int level, mhdg_mesh** out);

/* smooth2d, E-HDG, k = 1, Re = Rm = kappa = 1, alpha1 = 125, beta1 = beta2 = 1, p0 = 1,
 * epsilon = 1e-10, max_iter = 100, damping = 1, strong-zero rhat, one thread. */
MHDG_API void mhdg_options_default(mhdg_options* opts);
MHDG_API mhdg_status mhdg_options_validate(const mhdg_options* opts);

/* Solves the configured case on its mesh of the given refinement level. A Picard run that
 * does not converge still returns MHDG_OK; check mhdg_report.converged. */
MHDG_API mhdg_status mhdg_solve_case(const mhdg_options* opts, int level, mhdg_result** out);
/* Same on a caller-supplied mesh; report.level is -1. */
MHDG_API mhdg_status mhdg_solve_case_on_mesh(const mhdg_options* opts, const mhdg_mesh* mesh,
                                             mhdg_result** out);
MHDG_API mhdg_status mhdg_result_report(const mhdg_result* result, mhdg_report* out);
MHDG_API const char* mhdg_result_warning(const mhdg_result* result, int index);
/* Relative changes of u and b at Picard iteration `index` (0-based). */
MHDG_API mhdg_status mhdg_result_picard_change(const mhdg_result* result, int index,
                                               double* change_u, double* change_b);
/* Coordinate-format dump of the condensed matrix; requires keep_matrix. */
MHDG_API mhdg_status mhdg_result_write_matrix(const mhdg_result* result, const char* path);
MHDG_API void mhdg_result_free(mhdg_result* result);

/* log(e_coarse / e_fine) / log(h_coarse / h_fine), or NaN when undefined. */
MHDG_API double mhdg_observed_rate(double e_coarse, double e_fine, double h_coarse,
                                   double h_fine);

#ifdef __cplusplus
}
#endif

#endif
