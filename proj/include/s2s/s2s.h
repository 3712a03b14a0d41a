#ifndef S2S_S2S_H
#define S2S_S2S_H

/*
 * C interface to the scan-to-simulation core. Every function returns an
 * s2s_status; on failure s2s_last_error() holds a message for the calling
 * thread. Strings returned through char** are owned by the caller and released
 * with s2s_string_free. Handles are opaque and released with their _free
 * function; passing NULL to a _free function is a no-op.
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define S2S_API __declspec(dllexport)
#else
#define S2S_API __attribute__((visibility("default")))
#endif

typedef enum s2s_status {
  S2S_OK = 0,
  S2S_E_INVALID_ARGUMENT = 1,
  S2S_E_PRECONDITION = 2,
  S2S_E_DEGENERATE = 3,
  S2S_E_IO = 4,
  S2S_E_MISSING_FILE = 5,
  S2S_E_DUP_ID = 6,
  S2S_E_DIM = 7,
  S2S_E_MALFORMED = 8,
  S2S_E_NOT_FOUND = 9,
  S2S_E_VALIDATION = 10,
  S2S_E_CONFLICT = 11,
  S2S_E_UNKNOWN = 99
} s2s_status;

typedef struct s2s_bundle s2s_bundle;
typedef struct s2s_config s2s_config;
typedef struct s2s_result s2s_result;
typedef struct s2s_server s2s_server;

S2S_API const char* s2s_version(void);
/* "OK", "E_DUP_ID", ... */
S2S_API const char* s2s_status_name(s2s_status status);
/* Message of the last failed call on this thread; "" after a success. */
S2S_API const char* s2s_last_error(void);
S2S_API void s2s_string_free(char* s);

/* Configuration: JSON with "matching", "align", "optimizer" and "thresholds" sections. */
S2S_API s2s_status s2s_config_default(s2s_config** out);
S2S_API s2s_status s2s_config_from_json(const char* json, s2s_config** out);
S2S_API s2s_status s2s_config_load(const char* path, s2s_config** out);
S2S_API s2s_status s2s_config_set_seed(s2s_config* cfg, uint64_t seed);
S2S_API s2s_status s2s_config_set_threads(s2s_config* cfg, uint32_t threads);
S2S_API s2s_status s2s_config_to_json(const s2s_config* cfg, char** out);
S2S_API void s2s_config_free(s2s_config* cfg);

/* Loads a bundle directory; relative paths resolve against $S2S_DATA_ROOT when set. */
S2S_API s2s_status s2s_bundle_open(const char* path, s2s_bundle** out);
S2S_API void s2s_bundle_free(s2s_bundle* bundle);
S2S_API s2s_status s2s_bundle_scene_id(const s2s_bundle* bundle, char** out);
/* {"scene_id", "objects", "candidates", "annotated", "placed", "dim"} */
S2S_API s2s_status s2s_bundle_summary_json(const s2s_bundle* bundle, char** out);
S2S_API s2s_status s2s_bundle_manifest_json(const s2s_bundle* bundle, char** out);
/* Writes the manifest, annotations and every referenced file below out_dir. */
S2S_API s2s_status s2s_bundle_write(const s2s_bundle* bundle, const char* out_dir);

/* Per-object candidate rankings with fused scores. */
S2S_API s2s_status s2s_match_json(const s2s_bundle* bundle, const s2s_config* cfg, char** out);
/* Per-object top-1 alignment: pose, chosen yaw and the 12 yaw costs. */
S2S_API s2s_status s2s_align_json(const s2s_bundle* bundle, const s2s_config* cfg, char** out);
/* Scene graph of the placed layout when the bundle is placed, else of the scans. */
S2S_API s2s_status s2s_scenegraph_json(const s2s_bundle* bundle, const s2s_config* cfg, char** out);

/* match -> align -> scene graph -> optimize -> metrics. */
S2S_API s2s_status s2s_pipeline_run(const s2s_bundle* bundle, const s2s_config* cfg, s2s_result** out);
S2S_API void s2s_result_free(s2s_result* result);
/* Losses, step count and accepted moves of the optimizer. */
S2S_API s2s_status s2s_result_optimization_json(const s2s_result* result, char** out);
S2S_API s2s_status s2s_result_moves_csv(const s2s_result* result, char** out);
S2S_API s2s_status s2s_result_metrics_json(const s2s_result* result, char** out);
S2S_API s2s_status s2s_result_metrics_csv(const s2s_result* result, char** out);
/* Per-object outcome: ranking, chosen asset, failure reason. */
S2S_API s2s_status s2s_result_outcomes_json(const s2s_result* result, char** out);
/* The placed bundle as a new handle. */
S2S_API s2s_status s2s_result_apply(const s2s_bundle* bundle, const s2s_result* result, s2s_bundle** out);
/* scene.json, copied files, metrics.json, metrics.csv, scene.gltf, moves.csv. */
S2S_API s2s_status s2s_result_write(const s2s_bundle* bundle, const s2s_result* result, const char* out_dir);

/* Swaps each object to a seeded draw among ranks 2..k+1 and re-aligns it. */
S2S_API s2s_status s2s_augment(const s2s_bundle* placed, uint32_t k, uint64_t seed, const s2s_config* cfg,
                               s2s_bundle** out);
/* category_map_path may be NULL for the built-in map. */
S2S_API s2s_status s2s_microscenes_json(const s2s_bundle* bundle, const s2s_config* cfg,
                                        const char* category_map_path, char** out);
S2S_API s2s_status s2s_export_gltf(const s2s_bundle* placed, char** out);

/* Pairs predicted and truth bundles by scene id. Either output may be NULL. */
S2S_API s2s_status s2s_eval(const s2s_bundle* const* predicted, size_t n_predicted, const s2s_bundle* const* truth,
                            size_t n_truth, const s2s_config* cfg, const char* category_map_path, char** json_out,
                            char** csv_out);

/* Review service over every bundle below root. port 0 picks a free port. */
S2S_API s2s_status s2s_server_start(const char* root, const char* host, int port, s2s_server** out,
                                    int* bound_port);
/* Blocks until another thread calls s2s_server_stop. */
S2S_API s2s_status s2s_server_wait(s2s_server* server);
S2S_API s2s_status s2s_server_stop(s2s_server* server);
S2S_API void s2s_server_free(s2s_server* server);
/* Training quadruple export of every annotated object below root. */
S2S_API s2s_status s2s_export_training(const char* root, char** out);

#ifdef __cplusplus
}
#endif

#endif
