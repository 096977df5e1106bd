#ifndef DIOPH_LAB_H
#define DIOPH_LAB_H

/* C interface to the dioph_core shared library.
 *
 * Every function that can fail returns a dioph_status; on failure a
 * human-readable message is kept per thread and can be read back with
 * dioph_last_error(). Strings returned through char** are heap-allocated
 * and must be released with dioph_free_string(). Large numbers cross this
 * boundary as decimal strings.
 */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
    DIOPH_OK = 0,
    DIOPH_ERR_ARGUMENT = 1,  /* bad parameter or malformed input text */
    DIOPH_ERR_PRECISION = 2, /* precision cap reached before a decision */
    DIOPH_ERR_CONDITION = 3, /* an exact condition or verification failed */
    DIOPH_ERR_TIE = 4,       /* exact tie; best approximations undefined */
    DIOPH_ERR_BUDGET = 5,    /* growth or scan budget refused the request */
    DIOPH_ERR_INTERNAL = 6
} dioph_status;

const char* dioph_version(void);

/* Message from the most recent failing call on this thread ("" if none). */
const char* dioph_last_error(void);

void dioph_free_string(char* s);

/* Default working precision in bits for subsequent calls (0 keeps current). */
void dioph_set_precision(unsigned bits);
unsigned dioph_get_precision(void);

/* Root/parameter table over a lambda grid and a k list. format: "json" or
 * "csv". */
dioph_status dioph_roots(const double* lambdas, size_t n_lambda, const int* ks, size_t n_k,
                         const char* format, char** out_text);

/* Best-approximation analysis of a target given as comma-separated
 * coordinates; each coordinate is an integer, "p/q", a decimal like
 * "0.618...", or "sqrt:N" for an exact square root. q_max is a decimal
 * string. Returns the analysis JSON document. */
dioph_status dioph_analyze(const char* target, const char* q_max, char** out_json);

/* Full synthesis run (with internal retries); returns the artifact JSON. */
dioph_status dioph_synthesize(double lambda, int k, int steps, const char* q1,
                              char** out_json);

/* Re-verifies a synthesis artifact (JSON text). *out_json receives the
 * verification report; the status is DIOPH_OK only when every re-derived
 * check passes. */
dioph_status dioph_verify(const char* artifact_json, char** out_json);

/* Quick internal consistency suite; report JSON with per-check verdicts. */
dioph_status dioph_selftest(char** out_json);

/* Incremental synthesis handle. */
typedef struct dioph_synth dioph_synth;

dioph_status dioph_synth_new(double lambda, int k, int steps, const char* q1,
                             dioph_synth** out);
dioph_status dioph_synth_init(dioph_synth* s);
dioph_status dioph_synth_step(dioph_synth* s);
long dioph_synth_size(const dioph_synth* s);
/* Vector by 0-based index as {"q": "...", "a": ["...","...","..."]}. */
dioph_status dioph_synth_vector(const dioph_synth* s, long index, char** out_json);
/* Exact condition report for the current state (needs >= 5 vectors). */
dioph_status dioph_synth_report(const dioph_synth* s, char** out_json);
void dioph_synth_free(dioph_synth* s);

#ifdef __cplusplus
}
#endif

#endif /* DIOPH_LAB_H */
