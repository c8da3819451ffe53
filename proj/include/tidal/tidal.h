/* C interface to the training-dynamics active-learning workbench. All functions are thread-safe with
 * respect to distinct handles. Failing calls return a nonzero tidal_status
 * and leave a message retrievable with tidal_last_error() on the same thread. */
#ifndef TIDAL_TIDAL_H
#define TIDAL_TIDAL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(TIDAL_BUILDING_LIBRARY)
#    define TIDAL_API __declspec(dllexport)
#  else
#    define TIDAL_API __declspec(dllimport)
#  endif
#else
#  define TIDAL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tidal_status {
  TIDAL_OK = 0,
  TIDAL_ERR_INPUT = 1,     /* invalid argument or configuration value */
  TIDAL_ERR_STATE = 2,     /* operation invalid in the current state */
  TIDAL_ERR_NUMERICAL = 3, /* non-finite loss or gradient */
  TIDAL_ERR_PARSE = 4,     /* malformed config or CSV */
  TIDAL_ERR_IO = 5,        /* file system failure */
  TIDAL_ERR_RUN = 6,       /* one or more dispatched runs failed */
  TIDAL_ERR_INTERNAL = 7
} tidal_status;

typedef enum tidal_command {
  TIDAL_CMD_AL_RUN = 0,
  TIDAL_CMD_PILOT = 1,
  TIDAL_CMD_KL_ANALYSIS = 2,
  TIDAL_CMD_THEORY_SDE = 3,
  TIDAL_CMD_THEORY_CLOSED_FORM = 4,
  TIDAL_CMD_GEN_DATA = 5
} tidal_command;

typedef struct tidal_config tidal_config;
typedef struct tidal_run tidal_run;
typedef struct tidal_td_record tidal_td_record;

TIDAL_API const char* tidal_version(void);
/* Message of the last failure on this thread; "" if none. Valid until the next call. */
TIDAL_API const char* tidal_last_error(void);
TIDAL_API void tidal_set_warnings(int enabled);
TIDAL_API tidal_status tidal_command_from_name(const char* name, tidal_command* out);

/* ---- configuration ---- */
TIDAL_API tidal_status tidal_config_default(tidal_config** out);
TIDAL_API tidal_status tidal_config_load(const char* path, tidal_config** out);
TIDAL_API tidal_status tidal_config_parse(const char* json_text, tidal_config** out);
/* Caller frees *out with tidal_string_free. */
TIDAL_API tidal_status tidal_config_to_json(const tidal_config* cfg, char** out);
TIDAL_API tidal_status tidal_config_equal(const tidal_config* a, const tidal_config* b, int* out);
TIDAL_API void tidal_config_free(tidal_config* cfg);
TIDAL_API void tidal_string_free(char* s);

/* ---- experiment dispatch ---- */
typedef struct tidal_manifest {
  tidal_command command;
  const char* out_dir;
  const uint64_t* seeds;     /* may be NULL: use the config's seeds */
  size_t n_seeds;
  const char* const* strategies; /* may be NULL: use the config's strategy */
  size_t n_strategies;
  unsigned jobs;             /* 0 behaves as 1 */
  int analysis;
} tidal_manifest;

/* On success *out holds the run summary even when individual runs failed;
 * the return value is then TIDAL_ERR_RUN. */
TIDAL_API tidal_status tidal_dispatch(const tidal_config* cfg, const tidal_manifest* manifest, tidal_run** out);
TIDAL_API int tidal_run_exit_code(const tidal_run* run);
TIDAL_API size_t tidal_run_message_count(const tidal_run* run);
TIDAL_API const char* tidal_run_message(const tidal_run* run, size_t i);
TIDAL_API size_t tidal_run_artifact_count(const tidal_run* run);
TIDAL_API const char* tidal_run_artifact(const tidal_run* run, size_t i);
TIDAL_API void tidal_run_free(tidal_run* run);

/* ---- scoring primitives on raw probability arrays ---- */
TIDAL_API tidal_status tidal_entropy(const double* p, size_t n, double* out);
TIDAL_API tidal_status tidal_margin_with_label(const double* p, size_t n, size_t label, double* out);
/* Margin of p_score around the class predicted by p_cls. */
TIDAL_API tidal_status tidal_td_margin(const double* p_cls, const double* p_score, size_t n, double* out);
TIDAL_API tidal_status tidal_kl_divergence(const double* target, const double* pred, size_t n, double* out);
TIDAL_API tidal_status tidal_theorem2(double s_y, size_t n_classes, double* entropy, double* margin);
TIDAL_API tidal_status tidal_separation_auroc(const double* scores, const int* is_minor, size_t n, double* out);

/* ---- running-mean training-dynamics record ---- */
TIDAL_API tidal_status tidal_td_record_new(size_t n_classes, tidal_td_record** out);
TIDAL_API tidal_status tidal_td_record_update(tidal_td_record* rec, const double* p, size_t n);
/* Writes n_classes values into out. */
TIDAL_API tidal_status tidal_td_record_value(const tidal_td_record* rec, double* out, size_t n);
TIDAL_API void tidal_td_record_free(tidal_td_record* rec);

#ifdef __cplusplus
}
#endif

#endif /* TIDAL_TIDAL_H */
