#ifndef HYPERQUAL_H
#define HYPERQUAL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HqAnswer {
  HQ_ANSWER_HOLDS = 0,
  HQ_ANSWER_FAILS = 1,
  HQ_ANSWER_UNKNOWN_WITHIN_EPSILON = 2,
} HqAnswer;

typedef enum HqOp {
  HQ_OP_GE = 0,
  HQ_OP_LE = 1,
} HqOp;

/**
 * Result code of every fallible call.
 */
typedef enum HqStatus {
  HQ_STATUS_OK = 0,
  HQ_STATUS_NULL_ARGUMENT = 1,
  HQ_STATUS_INVALID_UTF8 = 2,
  HQ_STATUS_PARSE_ERROR = 3,
  HQ_STATUS_INPUT_ERROR = 4,
  HQ_STATUS_CAP_EXCEEDED = 5,
  HQ_STATUS_NEEDS_EPSILON = 6,
  HQ_STATUS_PANIC = 7,
} HqStatus;

/**
 * A parsed closed formula.
 */
typedef struct HqFormula HqFormula;

/**
 * A parsed weighted Kripke structure.
 */
typedef struct HqKripke HqKripke;

/**
 * Result of a threshold check.
 */
typedef struct HqVerdict HqVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null. The
 * pointer stays valid until the next hyperqual call on the same thread.
 */
const char *hq_last_error(void);

/**
 * Parses a structure in the `.wks` text format.
 *
 * # Safety
 * `src` must be a NUL-terminated string and `out` a writable pointer.
 */
enum HqStatus hq_kripke_parse(const char *src, struct HqKripke **out);

/**
 * # Safety
 * `k` must be null or a handle from [`hq_kripke_parse`] not yet freed.
 */
void hq_kripke_free(struct HqKripke *k);

/**
 * Parses a closed formula in the `.hq` text format.
 *
 * # Safety
 * `src` must be a NUL-terminated string and `out` a writable pointer.
 */
enum HqStatus hq_formula_parse(const char *src, struct HqFormula **out);

/**
 * # Safety
 * `f` must be null or a handle from [`hq_formula_parse`] not yet freed.
 */
void hq_formula_free(struct HqFormula *f);

/**
 * Decides `value(formula) op threshold` on `kripke`. `threshold` and
 * `epsilon` are rationals such as `"1/2"` or `"0.25"`; `epsilon` may be
 * null, in which case formulas outside the exact fragments yield
 * `NeedsEpsilon`. A `state_cap` of 0 selects the default cap.
 *
 * # Safety
 * Handles must be live, strings NUL-terminated, `out` writable.
 */
enum HqStatus hq_check(const struct HqKripke *kripke,
                       const struct HqFormula *formula,
                       enum HqOp op,
                       const char *threshold,
                       const char *epsilon,
                       uintptr_t state_cap,
                       struct HqVerdict **out);

/**
 * Exact value of a propositional-quality formula, written to `out` as a
 * string to be released with [`hq_string_free`].
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum HqStatus hq_prop_value(const struct HqKripke *kripke,
                            const struct HqFormula *formula,
                            uintptr_t state_cap,
                            char **out);

/**
 * # Safety
 * `v` must be a live verdict handle.
 */
enum HqAnswer hq_verdict_answer(const struct HqVerdict *v);

/**
 * Verdict as a JSON document; release with [`hq_string_free`].
 *
 * # Safety
 * `v` must be null or a live verdict handle.
 */
char *hq_verdict_json(const struct HqVerdict *v);

/**
 * # Safety
 * `v` must be null or a handle from [`hq_check`] not yet freed.
 */
void hq_verdict_free(struct HqVerdict *v);

/**
 * # Safety
 * `s` must be null or a string returned by this library not yet freed.
 */
void hq_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYPERQUAL_H */
