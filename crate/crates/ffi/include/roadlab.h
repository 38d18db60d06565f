#ifndef ROADLAB_H
#define ROADLAB_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RoadlabStatus {
  ROADLAB_STATUS_OK = 0,
  ROADLAB_STATUS_NULL_POINTER = 1,
  ROADLAB_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed network, trips or coordinate text.
   */
  ROADLAB_STATUS_PARSE = 3,
  /**
   * Malformed or inconsistent session document.
   */
  ROADLAB_STATUS_INVALID_SESSION = 4,
  /**
   * The modification was rejected; the tree is unchanged.
   */
  ROADLAB_STATUS_INVALID_MODIFICATION = 5,
  ROADLAB_STATUS_UNKNOWN_STATE = 6,
  ROADLAB_STATUS_ROOT_DELETION = 7,
  /**
   * Some OD pair has no path.
   */
  ROADLAB_STATUS_UNREACHABLE = 8,
  ROADLAB_STATUS_INVALID_ARGUMENT = 9,
  /**
   * A bug inside the library, including panics.
   */
  ROADLAB_STATUS_INTERNAL = 10,
} RoadlabStatus;

/**
 * Opaque session handle: a state tree plus the cost rates applied to new
 * modifications.
 */
typedef struct RoadlabSession RoadlabSession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failed call on this thread, or NULL. The
 * pointer stays valid until the next `roadlab_*` call on this thread.
 */
const char *roadlab_last_error_message(void);

/**
 * Creates a session from TNTP network and trips text. `coords` may be NULL.
 * `projection` is `"planar"`, `"lonlat"`, or NULL for planar.
 */
enum RoadlabStatus roadlab_session_new(const char *network,
                                       const char *trips,
                                       const char *coords,
                                       const char *projection,
                                       struct RoadlabSession **out);

/**
 * Creates a session from a bundled dataset: `"braess"` or `"sioux-falls"`.
 */
enum RoadlabStatus roadlab_session_from_dataset(const char *name, struct RoadlabSession **out);

/**
 * Rebuilds a session from a document produced by [`roadlab_session_export`].
 */
enum RoadlabStatus roadlab_session_import(const char *json, struct RoadlabSession **out);

/**
 * Writes the session document to `*out`.
 */
enum RoadlabStatus roadlab_session_export(const struct RoadlabSession *session, char **out);

/**
 * Releases a session. NULL is ignored.
 */
void roadlab_session_free(struct RoadlabSession *session);

/**
 * Releases a string returned by this library. NULL is ignored.
 */
void roadlab_string_free(char *s);

/**
 * Sets the construction cost rates per kilometre used by later
 * modifications.
 */
enum RoadlabStatus roadlab_set_cost_params(struct RoadlabSession *session,
                                           double surface_per_km,
                                           double tunnel_per_km);

/**
 * Applies a modification, given as JSON such as
 * `{"kind":"close_road","road":3}`, to `parent` and writes the new state id.
 */
enum RoadlabStatus roadlab_apply_modification(struct RoadlabSession *session,
                                              uint64_t parent,
                                              const char *modification_json,
                                              uint64_t *out_state);

/**
 * Total system travel time of a state.
 */
enum RoadlabStatus roadlab_state_metric(const struct RoadlabSession *session,
                                        uint64_t state,
                                        double *out_metric);

/**
 * Relative metric improvement of a state over the root and over its
 * parent. At the root both are 0 and `*out_parent_applicable` is false.
 */
enum RoadlabStatus roadlab_metric_deltas(const struct RoadlabSession *session,
                                         uint64_t state,
                                         double *out_vs_initial,
                                         double *out_vs_parent,
                                         bool *out_parent_applicable);

/**
 * Construction cost of the modification that produced `state`, and the
 * total along its lineage.
 */
enum RoadlabStatus roadlab_state_cost(const struct RoadlabSession *session,
                                      uint64_t state,
                                      double *out_step,
                                      double *out_cumulative);

/**
 * Deletes a state and its descendants. `out_removed` may be NULL.
 */
enum RoadlabStatus roadlab_delete_state(struct RoadlabSession *session,
                                        uint64_t state,
                                        size_t *out_removed);

/**
 * Network and per-road status of a state as JSON.
 */
enum RoadlabStatus roadlab_state_json(const struct RoadlabSession *session,
                                      uint64_t state,
                                      char **out);

/**
 * Summaries of every state in the tree as JSON.
 */
enum RoadlabStatus roadlab_tree_json(const struct RoadlabSession *session, char **out);

/**
 * Link travel time `fftt * (1 + 0.15 * (volume / capacity)^4)`.
 */
enum RoadlabStatus roadlab_bpr_time(double fftt, double capacity, double volume, double *out_time);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROADLAB_H */
