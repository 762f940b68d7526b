#ifndef EGG_H
#define EGG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum EggStatus {
  EGG_STATUS_OK = 0,
  EGG_STATUS_NULL_ARGUMENT = 1,
  EGG_STATUS_INVALID_UTF8 = 2,
  EGG_STATUS_PARSE_ERROR = 3,
  EGG_STATUS_MALFORMED = 4,
  EGG_STATUS_INVALID_CHECK = 5,
  EGG_STATUS_PANIC = 6,
} EggStatus;

/**
 * An immutable cache value.
 */
typedef struct EggCache EggCache;

/**
 * An egg shell session with its reference caches.
 */
typedef struct EggSession EggSession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, as a static string.
 */
const char *egg_version(void);

/**
 * The last error on this thread, or null. Valid until the next call.
 */
const char *egg_last_error(void);

/**
 * A session with the bundled types and commands and empty reference caches.
 */
struct EggSession *egg_session_new(void);

/**
 * # Safety
 * `s` is null or a handle from `egg_session_new` not yet freed.
 */
void egg_session_free(struct EggSession *s);

/**
 * Executes one shell line; the result goes to `*out`.
 *
 * # Safety
 * `s` is a live session, `line` a NUL-terminated string and `out` writable.
 */
enum EggStatus egg_session_eval(struct EggSession *s, const char *line, struct EggCache **out);

/**
 * Renders `c` the way the session displays results.
 *
 * # Safety
 * `s` and `c` are live handles; `out` is writable.
 */
enum EggStatus egg_session_render(const struct EggSession *s, const struct EggCache *c, char **out);

/**
 * Replaces the session's `.` cache.
 *
 * # Safety
 * `s` and `c` are live handles.
 */
enum EggStatus egg_session_set_dot(struct EggSession *s, const struct EggCache *c);

/**
 * # Safety
 * `c` is null or a cache handle not yet freed.
 */
void egg_cache_free(struct EggCache *c);

/**
 * Number of elements.
 *
 * # Safety
 * `c` is null or a live cache handle.
 */
size_t egg_cache_len(const struct EggCache *c);

/**
 * Algebraic notation, e.g. `(hello,0) ∨ (world,0)`.
 *
 * # Safety
 * `s` and `c` are live handles; `out` is writable.
 */
enum EggStatus egg_cache_render(const struct EggSession *s, const struct EggCache *c, char **out);

/**
 * # Safety
 * All handles are live; `out` is writable.
 */
enum EggStatus egg_cache_join(const struct EggSession *s,
                              const struct EggCache *a,
                              const struct EggCache *b,
                              struct EggCache **out);

/**
 * # Safety
 * All handles are live; `out` is writable.
 */
enum EggStatus egg_cache_meet(const struct EggSession *s,
                              const struct EggCache *a,
                              const struct EggCache *b,
                              struct EggCache **out);

/**
 * `a/datum`, with the datum in shell notation such as `name:wor*`.
 *
 * # Safety
 * Handles are live, `datum` is a NUL-terminated string, `out` is writable.
 */
enum EggStatus egg_cache_select(const struct EggSession *s,
                                const struct EggCache *a,
                                const char *datum,
                                struct EggCache **out);

/**
 * `a//datum`.
 *
 * # Safety
 * As for `egg_cache_select`.
 */
enum EggStatus egg_cache_deep_select(const struct EggSession *s,
                                     const struct EggCache *a,
                                     const char *datum,
                                     struct EggCache **out);

/**
 * Canonical bytes of `c`, released with `egg_bytes_free`.
 *
 * # Safety
 * `c` is live; `out` and `len` are writable.
 */
enum EggStatus egg_cache_serialize(const struct EggCache *c, uint8_t **out, size_t *len);

/**
 * # Safety
 * `s` is live, `data` points to `len` readable bytes, `out` is writable.
 */
enum EggStatus egg_cache_deserialize(const struct EggSession *s,
                                     const uint8_t *data,
                                     size_t len,
                                     struct EggCache **out);

/**
 * # Safety
 * `p` and `len` come from one `egg_cache_serialize` call, or `p` is null.
 */
void egg_bytes_free(uint8_t *p, size_t len);

/**
 * # Safety
 * `p` is null or a string handed out by this library.
 */
void egg_string_free(char *p);

/**
 * `Ok` when every signature of the check (canonical bytes, Ed25519)
 * verifies, `InvalidCheck` when one does not.
 *
 * # Safety
 * `data` points to `len` readable bytes.
 */
enum EggStatus egg_check_verify(const uint8_t *data, size_t len);

/**
 * Display text of a check, e.g. `50#a1b2c3d4e5f6.#0f1e2d3c4b5a._#99aa00bb11cc_`.
 * Keys print as fingerprints.
 *
 * # Safety
 * `data` points to `len` readable bytes; `out` is writable.
 */
enum EggStatus egg_check_display(const uint8_t *data, size_t len, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EGG_H */
