#ifndef APPROBUST_H
#define APPROBUST_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every entry point.
 */
typedef enum ApStatus {
  AP_STATUS_OK = 0,
  AP_STATUS_NULL_POINTER = 1,
  AP_STATUS_INVALID_UTF8 = 2,
  AP_STATUS_VALIDATION = 3,
  AP_STATUS_CAP_EXCEEDED = 4,
  AP_STATUS_INVALID_REQUEST = 5,
  AP_STATUS_PANIC = 6,
} ApStatus;

/**
 * Opaque parsed election.
 */
typedef struct ApElection ApElection;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses an election in the text format into `*out`.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum ApStatus ap_election_parse(const char *text, struct ApElection **out);

/**
 * Releases an election; null is ignored.
 *
 * # Safety
 * `election` must come from `ap_election_parse` and not be freed twice.
 */
void ap_election_free(struct ApElection *election);

/**
 * Number of candidates, or 0 for null.
 *
 * # Safety
 * `election` must be null or a live handle.
 */
size_t ap_election_num_candidates(const struct ApElection *election);

/**
 * Number of voters, or 0 for null.
 *
 * # Safety
 * `election` must be null or a live handle.
 */
size_t ap_election_num_voters(const struct ApElection *election);

/**
 * Runs a JSON request. With a non-null `election` the request runs on it
 * (`winners`, `radius`, `count`, `level`); otherwise the request must carry
 * its own inputs. On success `*out` holds the JSON result; on a validation
 * or cap error it holds the JSON error body.
 *
 * # Safety
 * `request_json` must be a NUL-terminated string, `out` a valid pointer and
 * `election` null or a live handle.
 */
enum ApStatus ap_run_json(const struct ApElection *election, const char *request_json, char **out);

/**
 * Releases a string returned by this library; null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void ap_string_free(char *s);

/**
 * Message for the last failure on this thread, or null. Valid until the
 * next call into the library.
 */
const char *ap_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* APPROBUST_H */
