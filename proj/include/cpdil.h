/* cpdil — commuting CP-map dilation toolkit, C interface.
 *
 * All objects are opaque handles created and destroyed by this library.
 * Functions return CPDIL_OK (0) on success and a nonzero status otherwise;
 * cpdil_last_error() describes the most recent failure on the calling thread.
 * Strings returned through char** parameters are heap-allocated JSON and must
 * be released with cpdil_string_free().
 */
#ifndef CPDIL_H
#define CPDIL_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct cpdil_pair cpdil_pair;         /* two Kraus-presented CP maps */
typedef struct cpdil_rep cpdil_rep;           /* exchange system + operator tuples */
typedef struct cpdil_dilation cpdil_dilation; /* assembled isometric dilation */

typedef enum cpdil_status {
    CPDIL_OK = 0,
    CPDIL_INVALID_INPUT = 1,
    CPDIL_NOT_POSITIVE = 2,
    CPDIL_NOT_PARTIAL_ISOMETRY = 3,
    CPDIL_NOT_COMMUTING = 4,
    CPDIL_NOT_STRONGLY_COMMUTING = 5,
    CPDIL_COISOMETRY_CHECK_FAILED = 6,
    CPDIL_CONSTRUCTION_FAILED = 7,
    CPDIL_TOO_LARGE = 8,
    CPDIL_INVALID_FLIP = 9,
    CPDIL_VERIFICATION_FAILED = 10,
    CPDIL_IO_ERROR = 11,
    CPDIL_PARSE_ERROR = 12,
    CPDIL_NOT_CONTRACTIVE = 13,
    CPDIL_UNKNOWN = 99
} cpdil_status;

typedef struct cpdil_options {
    int64_t levels;      /* truncation depth L; dilation needs >= 2 */
    int64_t mu;          /* extra multiplicity growth per level (>= 0) */
    double rank_eps;     /* numerical-rank threshold */
    double accept_eps;   /* identity acceptance threshold */
    uint64_t seed;       /* RNG seed for sampled identities */
    int64_t samples;     /* sample count for randomized identities */
    int64_t window;      /* verification window depth; -1 = widest valid */
} cpdil_options;

/* Fills every field with the library defaults (L = 4, mu = 0, ...). */
void cpdil_options_init(cpdil_options* opts);

/* --- input objects ------------------------------------------------------- */

/* Pair JSON: {"theta": {"d": d, "ops": [matrix...]}, "phi": {...}} where a
 * matrix is {"rows": r, "cols": c, "data": [[re, im], ...]} in row-major
 * order. */
cpdil_status cpdil_pair_parse(const char* json_text, cpdil_pair** out);
cpdil_status cpdil_pair_from_file(const char* path, cpdil_pair** out);
/* d, n, m may each be NULL when the caller does not need them. */
cpdil_status cpdil_pair_sizes(const cpdil_pair* pair, int64_t* d, int64_t* n, int64_t* m);
void cpdil_pair_free(cpdil_pair* pair);

/* Rep JSON: {"system": {"n": n, "m": m, "u": matrix}, "rep": {"h": h,
 * "T": [matrix...], "S": [matrix...]}} */
cpdil_status cpdil_rep_parse(const char* json_text, cpdil_rep** out);
cpdil_status cpdil_rep_from_file(const char* path, cpdil_rep** out);
cpdil_status cpdil_rep_sizes(const cpdil_rep* rep, int64_t* h, int64_t* n, int64_t* m);
void cpdil_rep_free(cpdil_rep* rep);

/* --- pair-level analyses -------------------------------------------------- */

/* Choi-matrix equality of the two compositions. *pass is 1/0. */
cpdil_status cpdil_check_commute(const cpdil_pair* pair, const cpdil_options* opts,
                                 char** report_json, int* pass);

/* Kernel-dimension oracle plus the direct tensor-space oracle, with their
 * agreement recorded in the report. */
cpdil_status cpdil_strong_commute(const cpdil_pair* pair, const cpdil_options* opts,
                                  char** report_json, int* pass);

/* Builds the exchange unitary. flip_json receives {"n","m","u","ordering"}.
 * Either output pointer may be NULL. */
cpdil_status cpdil_build_flip(const cpdil_pair* pair, const cpdil_options* opts,
                              char** flip_json, char** report_json, int* pass);

/* --- dilation ------------------------------------------------------------- */

/* Full pipeline for a pair: drop dependent Kraus operators if necessary,
 * check commutation, build the exchange unitary, then assemble the dilation
 * with the pair's own operators as the represented tuples. */
cpdil_status cpdil_dilate_pair(const cpdil_pair* pair, const cpdil_options* opts,
                               cpdil_dilation** out);

/* Dilation of an explicitly given tuple representation. */
cpdil_status cpdil_dilate_rep(const cpdil_rep* rep, const cpdil_options* opts,
                              cpdil_dilation** out);

cpdil_status cpdil_dilation_sizes(const cpdil_dilation* dil, int64_t* n, int64_t* m,
                                  int64_t* levels, int64_t* total_dim,
                                  int64_t* valid_depth);

/* Serialized result; include_operators = 0 stores only the data needed to
 * rebuild deterministically. */
cpdil_status cpdil_dilation_export(const cpdil_dilation* dil, int include_operators,
                                   char** json_out);
cpdil_status cpdil_dilation_import(const char* json_text, const cpdil_options* opts,
                                   cpdil_dilation** out);

/* Residual report for the isometry, range-orthogonality, exchange
 * commutation, corner and complement-invariance identities. */
cpdil_status cpdil_dilation_verify(const cpdil_dilation* dil, const cpdil_options* opts,
                                   char** report_json, int* pass);

/* Largest corrector-equation residual across levels. */
cpdil_status cpdil_dilation_residual(const cpdil_dilation* dil, double* max_residual);

/* Compressions P_H V^a U^b |_H for a + b <= max_len; single-operator tuples
 * only. JSON: [{"a": a, "b": b, "matrix": {...}}, ...] */
cpdil_status cpdil_dilation_word_table(const cpdil_dilation* dil, int64_t max_len,
                                       char** json_out);

void cpdil_dilation_free(cpdil_dilation* dil);

/* --- endomorphisms and round trip ----------------------------------------- */

/* Lifts the dilation to the endomorphism pair and verifies corner recovery,
 * coinvariance, multiplicativity and exchange of the lifts against the CP
 * maps induced by the represented tuples. */
cpdil_status cpdil_endo_verify(const cpdil_dilation* dil, const cpdil_options* opts,
                               char** report_json, int* pass);

/* rep -> induced CP pair -> intertwiner dimensions -> rebuilt exchange
 * unitary; asserts the index equalities and the rebuilt relation. */
cpdil_status cpdil_roundtrip(const cpdil_rep* rep, const cpdil_options* opts,
                             char** report_json, int* pass);

/* --- misc ------------------------------------------------------------------ */

/* Message for the last failing call on this thread; empty string if none. */
const char* cpdil_last_error(void);
void cpdil_string_free(char* s);
const char* cpdil_version(void);

#ifdef __cplusplus
}
#endif

#endif /* CPDIL_H */
