#ifndef HOLOKIT_H
#define HOLOKIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Zero is success; everything else is a failure except
 * `HK_STATUS_WARNING`, which means the output is valid but below the
 * requested accuracy.
 */
typedef enum HkStatus {
  HK_STATUS_OK = 0,
  HK_STATUS_WARNING = 1,
  HK_STATUS_NULL_POINTER = 2,
  HK_STATUS_INVALID_UTF8 = 3,
  HK_STATUS_CONFIG = 4,
  HK_STATUS_NOT_FOUND = 5,
  HK_STATUS_INVALID_INPUT = 6,
  HK_STATUS_NOT_A_LOOP = 7,
  HK_STATUS_ACCURACY = 8,
  HK_STATUS_GROUP = 9,
  HK_STATUS_GEOMETRY = 10,
  HK_STATUS_BUFFER_TOO_SMALL = 11,
  HK_STATUS_IO = 12,
  HK_STATUS_PANIC = 13,
} HkStatus;

/**
 * A loaded fixture: atlas, connection and named objects.
 */
typedef struct HkFixture HkFixture;

/**
 * A transport or holonomy result.
 */
typedef struct HkTransport HkTransport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static nul-terminated string.
 */
const char *hk_version(void);

/**
 * Message for the last failed call on this thread, or null.
 *
 * The pointer stays valid until the next `hk_*` call on the same thread.
 */
const char *hk_last_error(void);

/**
 * Load a fixture file.
 *
 * # Safety
 * `path` must be a nul-terminated string and `out` a valid pointer to
 * writable storage for one handle.
 */
enum HkStatus hk_fixture_load(const char *path, struct HkFixture **out);

/**
 * Load one of the fixtures shipped with the library by name.
 *
 * # Safety
 * As for [`hk_fixture_load`].
 */
enum HkStatus hk_fixture_builtin(const char *name, struct HkFixture **out);

/**
 * Release a fixture. Null is ignored.
 *
 * # Safety
 * `fixture` must come from a `hk_fixture_*` constructor and not be freed twice.
 */
void hk_fixture_free(struct HkFixture *fixture);

/**
 * Side length of the matrices representing the fixture's structure group,
 * or 0 if the fixture has no connection or the handle is null.
 *
 * # Safety
 * `fixture` must be null or a live handle.
 */
size_t hk_fixture_matrix_dim(const struct HkFixture *fixture);

/**
 * Parallel transport along the fixture's named path with `steps` RKMK4
 * steps per segment. Returns `HK_STATUS_WARNING` with a valid result when
 * the step-halving estimate is above the warning threshold.
 *
 * # Safety
 * `fixture` must be a live handle, `path` a nul-terminated string and `out`
 * writable storage for one handle.
 */
enum HkStatus hk_transport(const struct HkFixture *fixture,
                           const char *path,
                           size_t steps,
                           struct HkTransport **out);

/**
 * Holonomy of the fixture's named loop; fails with `HK_STATUS_NOT_A_LOOP`
 * for open paths.
 *
 * # Safety
 * As for [`hk_transport`].
 */
enum HkStatus hk_holonomy(const struct HkFixture *fixture,
                          const char *path,
                          size_t steps,
                          struct HkTransport **out);

/**
 * Copy the transport matrix into `buffer` in row-major order. `len` is the
 * buffer length in doubles and must be at least `dim * dim`.
 *
 * # Safety
 * `result` must be a live handle and `buffer` valid for `len` writes.
 */
enum HkStatus hk_transport_matrix(const struct HkTransport *result, double *buffer, size_t len);

/**
 * Matrix side length of a transport result, or 0 for null.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
size_t hk_transport_dim(const struct HkTransport *result);

/**
 * Step-halving error estimate of a transport result, or NaN for null.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
double hk_transport_error_estimate(const struct HkTransport *result);

/**
 * Unwrapped rotation angle for circle groups. Writes it to `angle` and
 * returns true, or returns false for other groups and null handles.
 *
 * # Safety
 * `result` must be null or a live handle; `angle` must be writable.
 */
bool hk_transport_angle(const struct HkTransport *result, double *angle);

/**
 * Release a transport result. Null is ignored.
 *
 * # Safety
 * `result` must come from [`hk_transport`] or [`hk_holonomy`] and not be freed twice.
 */
void hk_transport_free(struct HkTransport *result);

/**
 * Run a command-line subcommand (`"transport"`, `"sweep"`, ...) on a run
 * config and return its report. The report is written to `*report` and must
 * be released with [`hk_string_free`]. Returns `HK_STATUS_WARNING` when the
 * command line would exit with status 2.
 *
 * # Safety
 * `command` and `config` must be nul-terminated strings; `report` must be
 * writable storage for one pointer.
 */
enum HkStatus hk_run(const char *command, const char *config, char **report);

/**
 * Release a string returned by [`hk_run`]. Null is ignored.
 *
 * # Safety
 * `s` must come from [`hk_run`] and not be freed twice.
 */
void hk_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HOLOKIT_H */
