#ifndef STAGEDIFF_H
#define STAGEDIFF_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Opaque expression handle. Release with sd_expr_free. */
typedef struct SdExpr SdExpr;

/* Opaque compiled-function handle. Release with sd_fn_free. */
typedef struct SdFn SdFn;

typedef enum SdStatus {
  SD_STATUS_OK = 0,
  SD_STATUS_NULL_POINTER = 1,
  SD_STATUS_INVALID_UTF8 = 2,
  SD_STATUS_PARSE = 3,
  SD_STATUS_ARITY = 4,
  SD_STATUS_STAGE = 5,
  SD_STATUS_PANIC = 6,
} SdStatus;

/* Message of the last failed call on this thread; empty after a success.
 * Valid until the next call into this library on the same thread. */
const char *sd_last_error(void);

SdStatus sd_parse(const char *text, SdExpr **out);

void sd_expr_free(SdExpr *e);

void sd_string_free(char *s);

SdStatus sd_format(const SdExpr *e, char **out);

/* raw != 0 disables simplification. */
SdStatus sd_differentiate(const SdExpr *e, size_t wrt, uint32_t order, int raw, SdExpr **out);

/* order == 0 simplifies e. */
SdStatus sd_derivative_n(const SdExpr *e, size_t wrt, uint32_t order, SdExpr **out);

SdStatus sd_simplify(const SdExpr *e, SdExpr **out);

size_t sd_node_count(const SdExpr *e);

size_t sd_arity(const SdExpr *e);

SdStatus sd_eval(const SdExpr *e, const double *x, size_t len, double *out);

SdStatus sd_emit_source(const SdExpr *e, char **out);

SdStatus sd_stage(const SdExpr *e, SdFn **out);

SdStatus sd_fn_call(const SdFn *f, const double *x, size_t len, double *out);

size_t sd_fn_flop_count(const SdFn *f);

size_t sd_fn_arity(const SdFn *f);

void sd_fn_free(SdFn *f);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif  /* STAGEDIFF_H */
