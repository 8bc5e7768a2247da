/*
 * C interface of the quasi-1D stochastic simulator. Everything the CLI (or
 * any foreign-language binding) needs: scale derivation, regime checks and
 * the scenario runner behind an opaque handle. All functions are
 * thread-safe; error text is thread-local.
 */
#ifndef QUASI1D_H
#define QUASI1D_H

#include <stddef.h>

#ifndef Q1D_API
#if defined(__GNUC__) || defined(__clang__)
#define Q1D_API __attribute__((visibility("default")))
#else
#define Q1D_API
#endif
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum q1d_status {
  Q1D_OK = 0,
  Q1D_ERR_VALIDATION = 1,  /* bad input: config, parameters, ranges */
  Q1D_ERR_RUNTIME = 2,     /* I/O failure, sampler non-convergence, ... */
  Q1D_ASSERTIONS_FAILED = 3 /* run completed but a physics assertion failed */
} q1d_status;

/* Artifact version string, e.g. "1.0.0". Static storage. */
Q1D_API const char* q1d_version(void);

/*
 * Message of the last failure on the calling thread. Valid until the next
 * failing call on the same thread; empty string if nothing failed yet.
 */
Q1D_API const char* q1d_last_error(void);

/* ------------------------------------------------------------------ */
/* scales                                                             */

typedef struct q1d_gas_params {
  double atom_mass_kg;
  double scattering_length_m;
  double omega_perp_rad_s;
  int geometry; /* 0 = box, 1 = harmonic */
  double box_length_m;
  double omega_parallel_rad_s;
  double density_per_m;
  double temperature_k;
  double tunnel_rate_rad_s;
  double atom_number; /* 0 = density * length */
} q1d_gas_params;

typedef struct q1d_derived_scales {
  double g1d_j_m;
  double a_perp_m;
  double chemical_potential_j;
  double sound_speed_m_s;
  double luttinger_k;
  double gamma;
  double lambda_t_m;
  double xi_n_m;
  double xi_j_m; /* 0 when the tunnel rate is 0 */
  double q_ratio;
  double t_eff_k;
  double lambda_eff_m;
} q1d_derived_scales;

typedef struct q1d_regime_report {
  double kbt_over_transverse_gap;
  double mu_over_transverse_gap;
  double gamma;
  int one_dimensional;
  int quasicondensate;
} q1d_regime_report;

Q1D_API q1d_status q1d_derive_scales(const q1d_gas_params* gas, q1d_derived_scales* out);

Q1D_API q1d_status q1d_check_regime(const q1d_gas_params* gas, q1d_regime_report* out);

/* ------------------------------------------------------------------ */
/* scenarios                                                          */

/*
 * Lifecycle: open (stores the config text) -> validate and/or run ->
 * read back report/summary -> close. A handle can be run once; open a new
 * one for another run.
 */
typedef struct q1d_scenario q1d_scenario;

/* Returns NULL (and sets the error text) only when config_json is NULL. */
Q1D_API q1d_scenario* q1d_scenario_open(const char* config_json);

Q1D_API void q1d_scenario_close(q1d_scenario* s);

/*
 * Full config + physics-regime validation. On Q1D_OK the human-readable
 * report is available via q1d_scenario_report.
 */
Q1D_API q1d_status q1d_scenario_validate(q1d_scenario* s);

/* Report text of the last successful validate on this handle, else "". */
Q1D_API const char* q1d_scenario_report(const q1d_scenario* s);

/*
 * Runs the scenario and writes the output bundle. output_dir may be NULL
 * or empty to use the config's output.directory; threads <= 0 defers to
 * the config. Returns Q1D_ASSERTIONS_FAILED when the run finished and
 * wrote its bundle but a physics assertion did not hold.
 */
Q1D_API q1d_status q1d_scenario_run(q1d_scenario* s, const char* output_dir, int threads);

/* summary.json text of a completed run on this handle, else "". */
Q1D_API const char* q1d_scenario_summary(const q1d_scenario* s);

/* Output directory of a completed run on this handle, else "". */
Q1D_API const char* q1d_scenario_output_dir(const q1d_scenario* s);

/*
 * Builds (or loads from cache) the thermal decay-length calibration table
 * for the gas in config_json. Returns a JSON description in thread-local
 * storage, valid until the next q1d_* call on this thread; NULL on error.
 */
Q1D_API const char* q1d_calibrate(const char* config_json, int threads);

#ifdef __cplusplus
}
#endif

#endif /* QUASI1D_H */
