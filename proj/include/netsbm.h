/* netsbm: two-stage slack-based-measure DEA efficiencies with robust
 * (ellipsoidal / polyhedral / budget) counterparts.
 *
 * C API over the C++ core: opaque handles, status codes, thread-local
 * error message. All functions returning netsbm_status set the message
 * retrievable via netsbm_last_error() on failure.
 */
#ifndef NETSBM_H
#define NETSBM_H

#include <stddef.h>

#if defined(_WIN32)
#define NETSBM_API __declspec(dllexport)
#else
#define NETSBM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
    NETSBM_OK = 0,
    NETSBM_ERR_IO = 1,      /* missing/unreadable/unwritable files */
    NETSBM_ERR_CONFIG = 2,  /* bad config, schema or panel contents */
    NETSBM_ERR_SOLVE = 3,   /* a model family failed for every DMU */
    NETSBM_ERR_INVALID = 4  /* bad arguments to the API itself */
} netsbm_status;

typedef struct netsbm_config netsbm_config;
typedef struct netsbm_report netsbm_report;

NETSBM_API const char* netsbm_version(void);

/* Message for the most recent failing call on this thread. */
NETSBM_API const char* netsbm_last_error(void);

NETSBM_API netsbm_status netsbm_config_load(const char* path, netsbm_config** out);
NETSBM_API void netsbm_config_free(netsbm_config* config);

/* Validates the config and panel without solving; writes a summary. */
NETSBM_API netsbm_status netsbm_config_check(const netsbm_config* config, char* summary,
                                             size_t capacity);
NETSBM_API netsbm_status netsbm_config_output_dir(const netsbm_config* config, char* buffer,
                                                  size_t capacity);

/* Full batch solve over the configured DMU x family grid. */
NETSBM_API netsbm_status netsbm_solve(const netsbm_config* config, netsbm_report** out);

NETSBM_API netsbm_status netsbm_report_load_json(const char* path, netsbm_report** out);
NETSBM_API netsbm_status netsbm_report_write_csv(const netsbm_report* report, const char* path);
NETSBM_API netsbm_status netsbm_report_write_json(const netsbm_report* report, const char* path);
NETSBM_API void netsbm_report_free(netsbm_report* report);

NETSBM_API size_t netsbm_report_dmu_count(const netsbm_report* report);
/* Returns NULL when the index is out of range. */
NETSBM_API const char* netsbm_report_dmu_name(const netsbm_report* report, size_t index);

/* family: "crisp" | "ellipsoidal" | "polyhedral" | "budget";
 * scope: "stage1" | "stage2" | "overall". NETSBM_ERR_INVALID when the cell
 * is absent or failed. */
NETSBM_API netsbm_status netsbm_report_efficiency(const netsbm_report* report, const char* family,
                                                  const char* scope, size_t dmu, double* out);

/* Friedman rank test across the named families (comma separated) on the
 * given scope. */
NETSBM_API netsbm_status netsbm_friedman(const netsbm_report* report, const char* families_csv,
                                         const char* scope, double* statistic, int* df,
                                         double* p_value);

/* The Friedman result stored in the report by the batch run (computed over
 * the selected families); NETSBM_ERR_INVALID when the report carries none. */
NETSBM_API netsbm_status netsbm_report_friedman(const netsbm_report* report, double* statistic,
                                                int* df, double* p_value, char* scope,
                                                size_t scope_capacity);

#ifdef __cplusplus
}
#endif

#endif /* NETSBM_H */
