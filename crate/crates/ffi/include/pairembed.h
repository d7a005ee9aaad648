#ifndef PAIREMBED_H
#define PAIREMBED_H

/* Generated by cbindgen from pairembed-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum PeStatus {
  PE_STATUS_OK = 0,
  PE_STATUS_NULL_POINTER = 1,
  PE_STATUS_INVALID_STRING = 2,
  PE_STATUS_INVALID_ARGUMENT = 3,
  PE_STATUS_DIMENSION_MISMATCH = 4,
  PE_STATUS_DATASET_ERROR = 5,
  PE_STATUS_PARSE_ERROR = 6,
  PE_STATUS_IO_ERROR = 7,
  PE_STATUS_DIVERGED = 8,
  PE_STATUS_INTERNAL_ERROR = 9,
} PeStatus;

// Opaque labeled dataset.
typedef struct PeDataset PeDataset;

// Opaque trained model (parameters plus the training-data mean).
typedef struct PeModel PeModel;

// Training options; get defaults from [`pe_train_options_default`].
// The extractor is the default single dense layer of width `embed_dim`.
typedef struct PeTrainOptions {
  double lambda;
  double margin;
  double learning_rate;
  size_t epochs;
  size_t batch_size;
  uint64_t seed;
  size_t embed_dim;
} PeTrainOptions;

// Evaluation summary; `separability` is +inf when the intra-class mean
// distance is zero.
typedef struct PeMetrics {
  double accuracy;
  double mean_intra;
  double mean_inter;
  double separability;
  double margin_violation_rate;
} PeMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *pe_version(void);

// Message of the last failure on this thread. The pointer stays valid
// until the next failing `pe_*` call on the same thread.
const char *pe_last_error(void);

// Default training options (λ = 1, m = 1, η = 0.01, 50 epochs, batch 32,
// seed 0, embedding width 16).
struct PeTrainOptions pe_train_options_default(void);

// Generates Gaussian blobs: class centers on a sphere of radius
// `separation`, per-feature noise std `spread`.
//
// # Safety
// `out` must be a valid location for one pointer.
enum PeStatus pe_dataset_gen_blobs(size_t classes,
                                   size_t per_class,
                                   size_t dim,
                                   double spread,
                                   double separation,
                                   uint64_t seed,
                                   struct PeDataset **out);

// Generates sinusoidal texture images of `side`×`side` pixels, stored flat.
//
// # Safety
// `out` must be a valid location for one pointer.
enum PeStatus pe_dataset_gen_textures(size_t classes,
                                      size_t per_class,
                                      size_t side,
                                      double spread,
                                      double separation,
                                      uint64_t seed,
                                      struct PeDataset **out);

// Loads a dataset from the CSV interchange format.
//
// # Safety
// `path` must be a NUL-terminated string; `out` a valid location for one
// pointer.
enum PeStatus pe_dataset_load_csv(const char *path, struct PeDataset **out);

// Writes a dataset in the CSV interchange format.
//
// # Safety
// `ds` must be a live dataset handle; `path` a NUL-terminated string.
enum PeStatus pe_dataset_save_csv(const struct PeDataset *ds, const char *path);

// Number of samples; 0 for null.
//
// # Safety
// `ds` must be a live dataset handle or null.
size_t pe_dataset_len(const struct PeDataset *ds);

// Feature width; 0 for null.
//
// # Safety
// `ds` must be a live dataset handle or null.
size_t pe_dataset_feature_dim(const struct PeDataset *ds);

// Number of classes; 0 for null.
//
// # Safety
// `ds` must be a live dataset handle or null.
size_t pe_dataset_n_classes(const struct PeDataset *ds);

// Frees a dataset handle. Null is a no-op.
//
// # Safety
// `ds` must be a handle from this library, not yet freed.
void pe_dataset_free(struct PeDataset *ds);

// Trains on a raw dataset: the per-feature mean is computed, subtracted,
// and stored in the model. `opts` may be null for defaults.
//
// # Safety
// `ds` must be a live dataset handle; `opts` null or valid; `out` a valid
// location for one pointer.
enum PeStatus pe_train(const struct PeDataset *ds,
                       const struct PeTrainOptions *opts,
                       struct PeModel **out);

// Loads a model checkpoint.
//
// # Safety
// `path` must be a NUL-terminated string; `out` a valid location for one
// pointer.
enum PeStatus pe_model_load(const char *path, struct PeModel **out);

// Saves a model checkpoint.
//
// # Safety
// `model` must be a live model handle; `path` a NUL-terminated string.
enum PeStatus pe_model_save(const struct PeModel *model, const char *path);

// Embedding width of the model; 0 for null.
//
// # Safety
// `model` must be a live model handle or null.
size_t pe_model_embed_dim(const struct PeModel *model);

// Input width the model expects; 0 for null.
//
// # Safety
// `model` must be a live model handle or null.
size_t pe_model_input_dim(const struct PeModel *model);

// Number of classes the model predicts; 0 for null.
//
// # Safety
// `model` must be a live model handle or null.
size_t pe_model_n_classes(const struct PeModel *model);

// Frees a model handle. Null is a no-op.
//
// # Safety
// `model` must be a handle from this library, not yet freed.
void pe_model_free(struct PeModel *model);

// Embeds one raw feature vector: subtracts the model's stored mean and
// runs the feature extractor. `input_len` must equal the model's input
// width and `out_len` its embedding width.
//
// # Safety
// `input` must point to `input_len` doubles, `out` to `out_len` writable
// doubles; `model` must be a live model handle.
enum PeStatus pe_embed(const struct PeModel *model,
                       const double *input,
                       size_t input_len,
                       double *out,
                       size_t out_len);

// Evaluates a model on a raw dataset (the model's stored mean is applied
// first), filling `out_metrics`.
//
// # Safety
// `model` and `ds` must be live handles; `out_metrics` must be writable.
enum PeStatus pe_evaluate(const struct PeModel *model,
                          const struct PeDataset *ds,
                          double margin,
                          struct PeMetrics *out_metrics);

// Checks every analytic gradient of a seeded random configuration against
// central finite differences, writing the worst relative error.
//
// # Safety
// `out_max_rel_err` must be a writable double location.
enum PeStatus pe_gradcheck(uint64_t seed, double eps, double *out_max_rel_err);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PAIREMBED_H */
