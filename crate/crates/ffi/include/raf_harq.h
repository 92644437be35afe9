#ifndef RAF_HARQ_H
#define RAF_HARQ_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RafStatus {
  RAF_STATUS_OK = 0,
  RAF_STATUS_NULL_POINTER = 1,
  RAF_STATUS_INVALID_ARGUMENT = 2,
  RAF_STATUS_IO = 3,
  RAF_STATUS_PARSE = 4,
  RAF_STATUS_CONFIG = 5,
  RAF_STATUS_BUFFER_TOO_SMALL = 6,
  RAF_STATUS_PANIC = 7,
} RafStatus;

typedef enum RafPolicyKind {
  RAF_POLICY_KIND_HARQ = 0,
  RAF_POLICY_KIND_DHARQ = 1,
  RAF_POLICY_KIND_ST = 2,
  RAF_POLICY_KIND_TA = 3,
  RAF_POLICY_KIND_RAF = 4,
  RAF_POLICY_KIND_NAIVE = 5,
} RafPolicyKind;

typedef enum RafOutcome {
  RAF_OUTCOME_SUCCESS = 0,
  RAF_OUTCOME_UNDETECTED = 1,
  RAF_OUTCOME_DROPPED = 2,
} RafOutcome;

typedef struct RafAgent RafAgent;

typedef struct RafCode RafCode;

typedef struct RafSimulator RafSimulator;

// Scalars of one simulated episode.
typedef struct RafEpisode {
  enum RafOutcome outcome;
  uint32_t t_rounds;
  double e_tot_mj;
  double e_b;
  double latency_ms;
  double reward;
} RafEpisode;

// Monte Carlo averages over a batch of episodes.
typedef struct RafSummary {
  uint64_t episodes;
  double latency_ms;
  double latency_se;
  double e_b;
  double e_b_se;
  double uder;
  double uder_lo;
  double uder_hi;
  double drop_rate;
  double objective;
  double objective_se;
  double mean_retx;
} RafSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *raf_version(void);

// Copies the calling thread's last error message into `buf`.
//
// Returns the buffer size needed (message plus NUL), or 0 if no error has
// been recorded. The message is truncated to fit when `len` is too small.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t raf_last_error_message(char *buf, size_t len);

// Builds a `(2,3)`-regular mother code with `dim` information symbols.
//
// # Safety
// `out` must be a valid pointer to a handle slot.
enum RafStatus raf_code_new(uint64_t seed,
                            size_t len,
                            size_t dim,
                            uint32_t field_order,
                            struct RafCode **out);

// Parses a mother code from its text form.
//
// # Safety
// `text` must be a NUL-terminated string; `out` a valid handle slot.
enum RafStatus raf_code_from_text(const char *text, struct RafCode **out);

// Writes the text form of the code; `needed` receives the size including NUL.
//
// # Safety
// `code` must come from this library; `buf` must hold `len` bytes.
enum RafStatus raf_code_to_text(const struct RafCode *code, char *buf, size_t len, size_t *needed);

// Codeword length in symbols, or 0 for a null handle.
//
// # Safety
// `code` must be null or come from this library.
size_t raf_code_len(const struct RafCode *code);

// Number of message bits, or 0 for a null handle.
//
// # Safety
// `code` must be null or come from this library.
size_t raf_code_message_bits(const struct RafCode *code);

// Encodes `nbits` message bits (one per byte, 0 or 1) into `out_len` symbols.
//
// # Safety
// Pointers must reference buffers of the stated lengths.
enum RafStatus raf_code_encode(const struct RafCode *code,
                               const uint8_t *bits,
                               size_t nbits,
                               uint8_t *out,
                               size_t out_len);

// Sets `*valid` to whether the word satisfies every parity check.
//
// # Safety
// `symbols` must hold `len` bytes; `valid` must be writable.
enum RafStatus raf_code_is_codeword(const struct RafCode *code,
                                    const uint8_t *symbols,
                                    size_t len,
                                    bool *valid);

// # Safety
// `code` must be null or a handle from this library not yet freed.
void raf_code_free(struct RafCode *code);

// Creates a simulator from TOML config text; null or empty text selects the
// reference scenario. The initial policy is the one named in the config
// (RAF needs a later [`raf_simulator_set_policy`] call).
//
// # Safety
// `config_toml` must be null or NUL-terminated; `out` a valid handle slot.
enum RafStatus raf_simulator_new(const char *config_toml, struct RafSimulator **out);

// Selects the feedback policy. `param` is `L_static` for HARQ/ST and the
// entropy threshold for D-HARQ/TA; `agent` is required for RAF only.
//
// # Safety
// Handles must come from this library; `agent` may be null unless `kind` is RAF.
enum RafStatus raf_simulator_set_policy(struct RafSimulator *sim,
                                        enum RafPolicyKind kind,
                                        double param,
                                        const struct RafAgent *agent);

// Simulates one episode.
//
// # Safety
// `sim` must come from this library; `out` must be writable.
enum RafStatus raf_simulator_run_episode(const struct RafSimulator *sim,
                                         uint64_t seed,
                                         struct RafEpisode *out);

// Averages `episodes` episodes with seeds derived from `seed`.
//
// # Safety
// `sim` must come from this library; `out` must be writable.
enum RafStatus raf_simulator_evaluate(const struct RafSimulator *sim,
                                      size_t episodes,
                                      uint64_t seed,
                                      struct RafSummary *out);

// # Safety
// `sim` must be null or a handle from this library not yet freed.
void raf_simulator_free(struct RafSimulator *sim);

// Loads a Q-network checkpoint.
//
// # Safety
// `path` must be NUL-terminated; `out` a valid handle slot.
enum RafStatus raf_agent_load(const char *path, struct RafAgent **out);

// Input (and output) width of the agent, or 0 for a null handle.
//
// # Safety
// `agent` must be null or come from this library.
size_t raf_agent_input_dim(const struct RafAgent *agent);

// Q-values for an entropy vector.
//
// # Safety
// `h` must hold `len` doubles and `out` `out_len` doubles.
enum RafStatus raf_agent_q_values(const struct RafAgent *agent,
                                  const double *h,
                                  size_t len,
                                  double *out,
                                  size_t out_len);

// Greedy number of symbols to request, in `1..=L0`.
//
// # Safety
// `h` must hold `len` doubles; `action` must be writable.
enum RafStatus raf_agent_action(const struct RafAgent *agent,
                                const double *h,
                                size_t len,
                                size_t *action);

// # Safety
// `agent` must be null or a handle from this library not yet freed.
void raf_agent_free(struct RafAgent *agent);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RAF_HARQ_H */
