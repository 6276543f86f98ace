#ifndef IAMSIM_H
#define IAMSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IamsimReason {
  IAMSIM_REASON_EXPLICIT_DENY = 0,
  IAMSIM_REASON_IMPLICIT_DENY = 1,
  IAMSIM_REASON_SAME_ACCOUNT_ALLOW = 2,
  IAMSIM_REASON_CROSS_ACCOUNT_ALLOW = 3,
} IamsimReason;

typedef enum IamsimStatus {
  IAMSIM_STATUS_OK = 0,
  IAMSIM_STATUS_NULL_ARGUMENT = 1,
  IAMSIM_STATUS_INVALID_UTF8 = 2,
  /**
   * Input failed to parse or validate.
   */
  IAMSIM_STATUS_INVALID_INPUT = 3,
  IAMSIM_STATUS_IO = 4,
  IAMSIM_STATUS_PANIC = 5,
} IamsimStatus;

typedef enum IamsimVerdict {
  IAMSIM_VERDICT_ALLOW = 0,
  IAMSIM_VERDICT_DENY = 1,
} IamsimVerdict;

/**
 * Loaded organization. Create with `iamsim_org_from_json` or
 * `iamsim_org_from_file`; release with `iamsim_org_free`.
 */
typedef struct IamsimOrg IamsimOrg;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer is
 * valid until the next call into this library on the same thread.
 */
const char *iamsim_last_error_message(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a pointer obtained from this library, freed once.
 */
void iamsim_string_free(char *s);

/**
 * Parses and validates a scenario document.
 *
 * # Safety
 * `json` must be a valid C string and `out` writable.
 */
enum IamsimStatus iamsim_org_from_json(const char *json, struct IamsimOrg **out);

/**
 * Reads and validates a scenario file.
 *
 * # Safety
 * `path` must be a valid C string and `out` writable.
 */
enum IamsimStatus iamsim_org_from_file(const char *path, struct IamsimOrg **out);

/**
 * Releases an organization handle. Null is ignored.
 *
 * # Safety
 * `org` must be null or a handle from this library, freed once.
 */
void iamsim_org_free(struct IamsimOrg *org);

/**
 * Decides one request given as a JSON object with `user`, `account`,
 * `action`, `resource` and optional `context`.
 *
 * # Safety
 * `org` must be a live handle, `request_json` a valid C string, and
 * `verdict` and `reason` writable.
 */
enum IamsimStatus iamsim_authorize(const struct IamsimOrg *org,
                                   const char *request_json,
                                   enum IamsimVerdict *verdict,
                                   enum IamsimReason *reason);

/**
 * Decides one request and returns its rendered trace.
 *
 * # Safety
 * `org` must be a live handle, `request_json` a valid C string and `out`
 * writable.
 */
enum IamsimStatus iamsim_explain(const struct IamsimOrg *org, const char *request_json, char **out);

/**
 * Decides a JSON Lines batch and returns one `{"verdict","reason"}` line
 * per request, in input order.
 *
 * # Safety
 * `org` must be a live handle, `requests_jsonl` a valid C string and `out`
 * writable.
 */
enum IamsimStatus iamsim_simulate(const struct IamsimOrg *org,
                                  const char *requests_jsonl,
                                  char **out);

/**
 * Parses a policy document and returns its canonical compact form.
 *
 * # Safety
 * `policy_json` must be a valid C string and `out` writable.
 */
enum IamsimStatus iamsim_policy_normalize(const char *policy_json, char **out);

/**
 * Classifies an action pattern into level 1 to 4.
 *
 * # Safety
 * `pattern` must be a valid C string and `level` writable.
 */
enum IamsimStatus iamsim_action_level(const char *pattern, uint8_t *level);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IAMSIM_H */
