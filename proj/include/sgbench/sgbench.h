#ifndef SGBENCH_H
#define SGBENCH_H

#include <stddef.h>
#include <stdint.h>

#if defined(SGB_BUILDING)
#define SGB_API __attribute__((visibility("default")))
#else
#define SGB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sgb_status {
  SGB_OK = 0,
  SGB_ERR_INVALID_ARGUMENT = 1,
  SGB_ERR_PARSE = 2,
  SGB_ERR_IO = 3,
  SGB_ERR_STATE = 4,
  SGB_ERR_INTERNAL = 5
} sgb_status;

typedef struct sgb_config sgb_config;
typedef struct sgb_pegasus sgb_pegasus;
typedef struct sgb_layout sgb_layout;
typedef struct sgb_instance sgb_instance;

typedef void (*sgb_log_fn)(const char* line, void* user);

/* Message of the last failed call on this thread, "" if none. */
SGB_API const char* sgb_last_error(void);
SGB_API const char* sgb_status_name(sgb_status status);
SGB_API const char* sgb_version(void);

/* String outputs: copies at most cap bytes including the terminator and
   stores the full length (without terminator) in *needed when non-null.
   A buffer that is too small gives SGB_ERR_INVALID_ARGUMENT. */

/* profile is "desk", "full" or NULL (desk). */
SGB_API sgb_status sgb_config_new(const char* profile, sgb_config** out);
SGB_API sgb_status sgb_config_parse(const char* text, sgb_config** out);
SGB_API sgb_status sgb_config_load(const char* path, sgb_config** out);
SGB_API sgb_status sgb_config_set(sgb_config* config, const char* key, const char* value);
SGB_API sgb_status sgb_config_get(const sgb_config* config, const char* key, char* buf, size_t cap, size_t* needed);
SGB_API sgb_status sgb_config_text(const sgb_config* config, char* buf, size_t cap, size_t* needed);
SGB_API sgb_status sgb_config_hash(const sgb_config* config, char* buf, size_t cap, size_t* needed);
SGB_API void sgb_config_free(sgb_config* config);

/* Stages: generate, gs-validate, solve-pticm, sample, analyze, collapse, report. */
SGB_API sgb_status sgb_run_stage(const sgb_config* config, const char* stage, int force, int calibrate,
                                 sgb_log_fn log, void* user);
SGB_API sgb_status sgb_report(const sgb_config* config, char* buf, size_t cap, size_t* needed);

SGB_API sgb_status sgb_pegasus_new(int m, sgb_pegasus** out);
SGB_API size_t sgb_pegasus_num_qubits(const sgb_pegasus* pegasus);
SGB_API size_t sgb_pegasus_num_couplers(const sgb_pegasus* pegasus);
SGB_API int sgb_pegasus_max_side(const sgb_pegasus* pegasus);
SGB_API void sgb_pegasus_free(sgb_pegasus* pegasus);

SGB_API sgb_status sgb_layout_new(const sgb_pegasus* pegasus, int side, int min_support, sgb_layout** out);
SGB_API size_t sgb_layout_num_nodes(const sgb_layout* layout);
SGB_API size_t sgb_layout_num_edges(const sgb_layout* layout);
SGB_API void sgb_layout_free(sgb_layout* layout);

/* disorder: "binomial", "S28", "R6". */
SGB_API sgb_status sgb_instance_generate(const sgb_layout* layout, const char* disorder, uint64_t seed,
                                         sgb_instance** out);
SGB_API sgb_status sgb_instance_load(const char* path, sgb_instance** out);
SGB_API sgb_status sgb_instance_save(const sgb_instance* instance, const char* path);
SGB_API size_t sgb_instance_num_spins(const sgb_instance* instance);
SGB_API size_t sgb_instance_num_edges(const sgb_instance* instance);
SGB_API int64_t sgb_instance_denominator(const sgb_instance* instance);
/* spins are +1/-1; the energy is num/den in lowest terms. */
SGB_API sgb_status sgb_instance_energy(const sgb_instance* instance, const int8_t* spins, size_t n,
                                       int64_t* num, int64_t* den);
SGB_API void sgb_instance_free(sgb_instance* instance);

/* Exact ground energy by enumeration (at most 30 spins). ground may be NULL,
   otherwise it receives the lexicographically smallest ground state. */
SGB_API sgb_status sgb_brute_force(const sgb_instance* instance, int64_t* num, int64_t* den,
                                   uint64_t* degeneracy, int8_t* ground, size_t n);

/* ladder: "B5", "F24", "F32", "B20". Best energy found in `sweeps` sweeps. */
SGB_API sgb_status sgb_pticm_best(const sgb_instance* instance, const char* ladder, uint64_t seed, uint64_t sweeps,
                                  int64_t* num, int64_t* den, uint64_t* last_improvement);

/* t_f log(0.01)/log(1 - p), at least t_f; INFINITY for p = 0, NaN for p outside [0, 1]. */
SGB_API double sgb_tte(double t_f, double p);

#ifdef __cplusplus
}
#endif

#endif
