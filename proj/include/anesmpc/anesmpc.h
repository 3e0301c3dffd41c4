#ifndef ANESMPC_H
#define ANESMPC_H

/* C interface of the anesmpc library. All handles are opaque; every call
 * returns a status code and, on failure, leaves a message retrievable with
 * anesmpc_last_error() on the calling thread. Matrices are row-major. */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(ANESMPC_BUILDING_LIBRARY)
#define ANESMPC_API __attribute__((visibility("default")))
#else
#define ANESMPC_API
#endif

typedef enum anesmpc_status {
  ANESMPC_OK = 0,
  ANESMPC_VALIDATION_FAILED = 1,
  ANESMPC_CONFIG_ERROR = 2, /* bad configuration or model error */
  ANESMPC_INFEASIBLE = 3,
  ANESMPC_INVALID_ARGUMENT = 4,
  ANESMPC_INTERNAL_ERROR = 5
} anesmpc_status;

typedef struct anesmpc_controller anesmpc_controller;
typedef struct anesmpc_simulation anesmpc_simulation;

ANESMPC_API const char* anesmpc_version(void);
ANESMPC_API const char* anesmpc_status_string(anesmpc_status status);
/* Message of the last failed call on this thread ("" if none). */
ANESMPC_API const char* anesmpc_last_error(void);

/* ---- controller --------------------------------------------------------- */

/* Builds every ingredient (dynamics, D, V, Z_s, K, P, X_a) from INI files. */
ANESMPC_API anesmpc_status anesmpc_controller_create(const char* patient_path,
                                                     const char* config_path,
                                                     anesmpc_controller** out);
/* Same from in-memory INI text. */
ANESMPC_API anesmpc_status anesmpc_controller_create_from_text(const char* patient_ini,
                                                               const char* config_ini,
                                                               anesmpc_controller** out);
ANESMPC_API void anesmpc_controller_destroy(anesmpc_controller* ctrl);

typedef struct anesmpc_info {
  int horizon;
  double ts;
  double K[8];  /* 2x4, A + B K Schur */
  double P[16]; /* 4x4 */
  double D[8];  /* 2x4 compensation gain */
  double m_bar[2];
  double u_lower[2], u_upper[2]; /* applied input box U */
  double v_lower[2], v_upper[2]; /* tracking input box V */
  double steady_gain[2];         /* steady line gain . v_a = level */
  double steady_level;
  double lambda;
  int determination_index;
  int terminal_rows;
  int controllability_index;
} anesmpc_info;

ANESMPC_API anesmpc_status anesmpc_controller_info(const anesmpc_controller* ctrl, anesmpc_info* out);

typedef struct anesmpc_step_result {
  double u[2];   /* applied input v0 + D x_s */
  double v0[2];
  double v_a[2];
  double x_a[4];
  double cost;
  int qp_iterations;
  int clamped;
  double solve_ms;
} anesmpc_step_result;

/* One MPC solve from the measured fast state (p1, p4, r1, r4) and slow
 * state (p2, p3, r2, r3). Warm-started from the previous call. */
ANESMPC_API anesmpc_status anesmpc_controller_step(anesmpc_controller* ctrl, const double xf[4],
                                                   const double xs[4], anesmpc_step_result* out);
ANESMPC_API anesmpc_status anesmpc_controller_reset(anesmpc_controller* ctrl);

/* One plant step of the 8-state Euler model, x = (xf, xs), in place. */
ANESMPC_API anesmpc_status anesmpc_plant_step(const anesmpc_controller* ctrl, double x[8],
                                              const double u[2]);
ANESMPC_API anesmpc_status anesmpc_bis(const anesmpc_controller* ctrl, const double xf[4],
                                       double* bis);

/* ---- closed-loop simulation ---------------------------------------------- */

/* Columns: t bis u_p u_r v_p v_r va_p va_r p1 p4 r1 r4 p2 p3 r2 r3 cost */
#define ANESMPC_SIM_COLUMNS 17

ANESMPC_API anesmpc_status anesmpc_simulate(anesmpc_controller* ctrl, double duration,
                                            anesmpc_simulation** out);
ANESMPC_API size_t anesmpc_simulation_length(const anesmpc_simulation* sim);
ANESMPC_API anesmpc_status anesmpc_simulation_row(const anesmpc_simulation* sim, size_t index,
                                                  double row[ANESMPC_SIM_COLUMNS]);
ANESMPC_API void anesmpc_simulation_destroy(anesmpc_simulation* sim);

/* ---- subcommands --------------------------------------------------------- */

typedef struct anesmpc_run_options {
  const char* patient_path;
  const char* config_path;
  const char* out_dir;   /* NULL: no bundle (validate, steady-set) */
  double duration;       /* <= 0: take it from the config */
  int svg;
  int timing;            /* write measured solve times into the CSV */
  int flip_compensation; /* validate: fault injection D -> -D */
} anesmpc_run_options;

/* Reports go to stdout. */
ANESMPC_API anesmpc_status anesmpc_run_ingredients(const anesmpc_run_options* opt);
ANESMPC_API anesmpc_status anesmpc_run_simulate(const anesmpc_run_options* opt);
ANESMPC_API anesmpc_status anesmpc_run_validate(const anesmpc_run_options* opt);
ANESMPC_API anesmpc_status anesmpc_run_steady_set(const anesmpc_run_options* opt);

#ifdef __cplusplus
}
#endif

#endif /* ANESMPC_H */
