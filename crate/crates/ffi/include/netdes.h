#ifndef NETDES_H
#define NETDES_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every fallible call.
 */
typedef enum {
  NETDES_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  NETDES_STATUS_NULL_POINTER = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  NETDES_STATUS_INVALID_UTF8 = 2,
  /**
   * A JSON document could not be parsed or validated.
   */
  NETDES_STATUS_PARSE = 3,
  /**
   * An argument names unknown events or states or is otherwise invalid.
   */
  NETDES_STATUS_INVALID_ARGUMENT = 4,
  /**
   * The observation is impossible given the current estimate.
   */
  NETDES_STATUS_INCONSISTENT = 5,
  /**
   * A state budget was exceeded.
   */
  NETDES_STATUS_BUDGET = 6,
  /**
   * No safe networked supervisor exists.
   */
  NETDES_STATUS_NO_SUPERVISOR = 7,
  /**
   * A panic was caught at the boundary.
   */
  NETDES_STATUS_INTERNAL = 8,
} NetdesStatus;

/**
 * A plant automaton.
 */
typedef struct NetdesPlant NetdesPlant;

/**
 * A running state estimator driven by a supervisor.
 */
typedef struct NetdesSession NetdesSession;

/**
 * A networked supervisor over some plant's alphabet.
 */
typedef struct NetdesSupervisor NetdesSupervisor;

/**
 * Delay and loss bounds of the two channels.
 */
typedef struct {
  uint32_t obs_delay;
  uint32_t ctrl_delay;
  uint32_t obs_loss;
  uint32_t ctrl_loss;
} NetdesBounds;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *netdes_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *netdes_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void netdes_string_free(char *s);

/**
 * Parses a plant document.
 *
 * # Safety
 * `json` must be null or a NUL-terminated string; `out` must be null or
 * writable.
 */
NetdesStatus netdes_plant_from_json(const char *json, NetdesPlant **out);

/**
 * Number of plant states.
 *
 * # Safety
 * `plant` must be null or a live plant handle; `out` must be null or writable.
 */
NetdesStatus netdes_plant_num_states(const NetdesPlant *plant, size_t *out);

/**
 * # Safety
 * `plant` must be null or a handle not yet freed.
 */
void netdes_plant_free(NetdesPlant *plant);

/**
 * Parses a supervisor document against the alphabet of `plant`.
 *
 * # Safety
 * Pointers must be null or valid as described for the other functions.
 */
NetdesStatus netdes_supervisor_from_json(const NetdesPlant *plant,
                                         const char *json,
                                         NetdesSupervisor **out);

/**
 * Serializes a supervisor. Free the result with [`netdes_string_free`].
 *
 * # Safety
 * Pointers must be null or valid as described for the other functions.
 */
NetdesStatus netdes_supervisor_to_json(const NetdesSupervisor *supervisor, char **out);

/**
 * # Safety
 * `supervisor` must be null or a handle not yet freed.
 */
void netdes_supervisor_free(NetdesSupervisor *supervisor);

/**
 * Synthesizes a safe networked supervisor with the greedy maximal policy.
 *
 * `safe_states` is a comma-separated list of state names. A `budget_states` of 0
 * selects the default state budget. Returns
 * [`NetdesStatus::NoSupervisor`] when no safe supervisor exists.
 *
 * # Safety
 * Pointers must be null or valid as described for the other functions.
 */
NetdesStatus netdes_synthesize(const NetdesPlant *plant,
                               const char *safe_states,
                               NetdesBounds bounds,
                               size_t budget_states,
                               NetdesSupervisor **out);

/**
 * Checks that no reachable closed-loop state has an unsafe plant component.
 *
 * Writes 1 or 0 to `out_safe`. When unsafe and `out_witness` is not null, a
 * JSON array with the event names of a shortest plant string reaching an
 * unsafe state is stored there; otherwise it is set to null.
 *
 * # Safety
 * Pointers must be null or valid as described for the other functions.
 */
NetdesStatus netdes_verify(const NetdesPlant *plant,
                           const NetdesSupervisor *supervisor,
                           const char *safe_states,
                           NetdesBounds bounds,
                           size_t budget_states,
                           int *out_safe,
                           char **out_witness);

/**
 * Starts an estimator in which `supervisor` issues the control actions.
 *
 * # Safety
 * Pointers must be null or valid as described for the other functions.
 */
NetdesStatus netdes_session_new(const NetdesPlant *plant,
                                const NetdesSupervisor *supervisor,
                                NetdesBounds bounds,
                                NetdesSession **out);

/**
 * Feeds one delivered observation. On failure the session is unchanged.
 *
 * # Safety
 * Pointers must be null or valid as described for the other functions.
 */
NetdesStatus netdes_session_observe(NetdesSession *session, const char *event);

/**
 * Current state estimate as a JSON array of plant state names. Free the
 * result with [`netdes_string_free`].
 *
 * # Safety
 * Pointers must be null or valid as described for the other functions.
 */
NetdesStatus netdes_session_estimate(const NetdesSession *session, char **out);

/**
 * # Safety
 * `session` must be null or a handle not yet freed.
 */
void netdes_session_free(NetdesSession *session);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NETDES_H */
