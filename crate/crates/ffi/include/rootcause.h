#ifndef ROOTCAUSE_H
#define ROOTCAUSE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  RC_STATUS_OK = 0,
  RC_STATUS_NULL_POINTER = 1,
  RC_STATUS_INVALID_UTF8 = 2,
  RC_STATUS_IO = 3,
  RC_STATUS_INVALID_MODEL = 4,
  RC_STATUS_OUT_OF_RANGE = 5,
  RC_STATUS_INVALID_ARGUMENT = 6,
  RC_STATUS_PANIC = 7,
} rc_status;

// Opaque handle to a loaded model.
typedef struct rc_model rc_model;

typedef struct {
  double precision;
  double recall;
  double f1;
  double accuracy;
} rc_weighted_metrics_t;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *rc_version(void);

// Message for the most recent failure on this thread, or null. Valid
// until the next call into this library from the same thread.
const char *rc_last_error(void);

// # Safety
// `s` must be null or a pointer returned by this library that has not
// been freed yet.
void rc_string_free(char *s);

// Loads a model file. On success `*out` holds a handle to release with
// [`rc_model_free`].
//
// # Safety
// `path` must be a NUL-terminated string and `out` a writable pointer.
rc_status rc_model_load(const char *path, rc_model **out);

// # Safety
// `model` must be null or a handle from [`rc_model_load`] not yet freed.
void rc_model_free(rc_model *model);

// Number of classes, or 0 for a null handle.
//
// # Safety
// `model` must be null or a live handle.
size_t rc_model_num_classes(const rc_model *model);

// Classifier kind (`mnb`, `lsvc`, `sgdc`, `rfc` or `lrc`) as a string
// owned by the handle, or null for a null handle.
//
// # Safety
// `model` must be null or a live handle.
const char *rc_model_kind(const rc_model *model);

// Name of class `index`; free the result with [`rc_string_free`].
//
// # Safety
// `model` must be a live handle and `out` a writable pointer.
rc_status rc_model_class_name(const rc_model *model, size_t index, char **out);

// Classifies `text`. The predicted index goes to `*out_class`; if
// `scores` is non-null it must hold `scores_len` doubles, at least the
// number of classes, and receives the per-class scores.
//
// # Safety
// `model` must be a live handle, `text` a NUL-terminated string,
// `out_class` writable and `scores` null or valid for `scores_len` writes.
rc_status rc_model_predict(const rc_model *model,
                           const char *text,
                           size_t *out_class,
                           double *scores,
                           size_t scores_len);

// Porter stem of a single lowercase word; free the result with
// [`rc_string_free`].
//
// # Safety
// `word` must be a NUL-terminated string and `out` a writable pointer.
rc_status rc_stem(const char *word, char **out);

// Support-weighted precision, recall and F1 plus accuracy of an
// `n x n` row-major confusion matrix (rows are true classes).
//
// # Safety
// `matrix` must be valid for `n * n` reads and `out` writable.
rc_status rc_weighted_metrics(const uint64_t *matrix, size_t n, rc_weighted_metrics_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROOTCAUSE_H */
