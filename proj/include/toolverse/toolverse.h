/* C interface to the toolverse library. All strings are UTF-8 JSON unless
 * noted. Strings returned through `char**` are owned by the caller and must
 * be released with tv_string_free. */
#ifndef TOOLVERSE_H
#define TOOLVERSE_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(TOOLVERSE_BUILDING)
#define TV_API __attribute__((visibility("default")))
#else
#define TV_API
#endif

/* Same values as toolverse::ErrorCode. */
typedef enum tv_status {
  TV_OK = 0,
  TV_INVALID_ARGUMENT = 1,
  TV_SCHEMA_VIOLATION = 2,
  TV_DUPLICATE_NAME = 3,
  TV_UNKNOWN_TOOL = 4,
  TV_MISSING_ARGUMENT = 5,
  TV_TYPE_MISMATCH = 6,
  TV_UNBOUND_PLACEHOLDER = 7,
  TV_TRANSPORT = 8,
  TV_PARSE = 9,
  TV_CONTEXT_OVERFLOW = 10,
  TV_FINGERPRINT_MISMATCH = 11,
  TV_IO = 12,
  TV_PRECONDITION = 13,
  TV_DIMENSION_MISMATCH = 14,
  TV_TIMEOUT = 15,
  TV_INTERNAL = 16
} tv_status;

typedef struct tv_runtime tv_runtime;

TV_API const char* tv_version(void);
TV_API const char* tv_status_name(tv_status status);

/* Message of the last failure on the calling thread; "" when none. */
TV_API const char* tv_last_error(void);

TV_API void tv_string_free(char* s);

/* options: {"config_file"?: path, "flags"?: {key: value}, "env"?: bool}.
 * Flags override the environment, which overrides the file. With "env":
 * false the process environment is ignored. NULL means "{}". */
TV_API tv_status tv_config_resolve(const char* options, char** out_json);
TV_API tv_status tv_runtime_create(const char* options, tv_runtime** out);
TV_API void tv_runtime_destroy(tv_runtime* runtime);

/* Space-separated command names. */
TV_API const char* tv_command_list(void);

/* Runs one command with a JSON object request and returns its JSON result. */
TV_API tv_status tv_run(tv_runtime* runtime, const char* command, const char* request, char** out_json);

TV_API tv_status tv_tools_validate(tv_runtime* runtime, const char* request, char** out_json);
TV_API tv_status tv_tools_graph(tv_runtime* runtime, const char* request, char** out_json);
TV_API tv_status tv_tools_augment(tv_runtime* runtime, const char* request, char** out_json);
TV_API tv_status tv_index_build(tv_runtime* runtime, const char* request, char** out_json);
TV_API tv_status tv_ask(tv_runtime* runtime, const char* request, char** out_json);
TV_API tv_status tv_eval(tv_runtime* runtime, const char* request, char** out_json);
TV_API tv_status tv_smoke(tv_runtime* runtime, const char* request, char** out_json);

#ifdef __cplusplus
}
#endif

#endif
