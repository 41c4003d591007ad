/* didlpack -- OAIS-profiled MPEG-21 DIDL packaging toolkit, C API.
 *
 * All handles are opaque and owned by the library; release them with the
 * matching *_free function. Functions return DIDLPACK_OK on success; on
 * failure didlpack_last_error() describes the problem for the calling
 * thread. Strings and byte buffers returned through out-parameters are
 * heap copies the caller releases with didlpack_string_free /
 * didlpack_bytes_free. Documents are immutable: operations that change
 * content return a fresh handle.
 */

#ifndef DIDLPACK_H
#define DIDLPACK_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DIDLPACK_API __declspec(dllexport)
#else
#define DIDLPACK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum didlpack_status {
  DIDLPACK_OK = 0,
  DIDLPACK_E_INVALID_ARG = 1,
  DIDLPACK_E_MALFORMED_XML = 2,
  DIDLPACK_E_NOT_DIDL = 3,
  DIDLPACK_E_PROFILE_SHAPE = 4,
  DIDLPACK_E_INVARIANT = 5,
  DIDLPACK_E_NOT_XML = 6,
  DIDLPACK_E_MISSING_IDENTIFIER = 7,
  DIDLPACK_E_EMPTY_IDENTIFIER = 8,
  DIDLPACK_E_BASE64 = 9,
  DIDLPACK_E_FETCH = 10,
  DIDLPACK_E_SCHEME = 11,
  DIDLPACK_E_WRITE = 12,
  DIDLPACK_E_UNSUPPORTED_ENCODING = 13,
  DIDLPACK_E_CORRUPT_STREAM = 14,
  DIDLPACK_E_UNSUPPORTED_ALGORITHM = 15,
  DIDLPACK_E_MALFORMED_FIXITY = 16,
  DIDLPACK_E_EMPTY_RECORD_LIST = 17,
  DIDLPACK_E_MANIFEST_SYNTAX = 18,
  DIDLPACK_E_MANIFEST_SEMANTICS = 19,
  DIDLPACK_E_PROFILE_BLOCKED = 20,
  DIDLPACK_E_IO = 21,
  DIDLPACK_E_INTERNAL = 22
} didlpack_status;

typedef struct didlpack_document didlpack_document;
typedef struct didlpack_fetcher didlpack_fetcher;
typedef struct didlpack_registry didlpack_registry;

DIDLPACK_API const char* didlpack_version(void);
DIDLPACK_API const char* didlpack_status_name(didlpack_status status);

/* Message for the most recent failure on this thread; valid until the
 * next didlpack call on the same thread. */
DIDLPACK_API const char* didlpack_last_error(void);

DIDLPACK_API void didlpack_string_free(char* s);
DIDLPACK_API void didlpack_bytes_free(uint8_t* bytes);

/* ------------------------------------------------------------------ */
/* Documents                                                          */

DIDLPACK_API didlpack_status didlpack_parse(const uint8_t* bytes, size_t len,
                                            didlpack_document** out);
DIDLPACK_API didlpack_status didlpack_parse_file(const char* path, didlpack_document** out);
DIDLPACK_API void didlpack_document_free(didlpack_document* doc);

DIDLPACK_API didlpack_status didlpack_serialize(const didlpack_document* doc, uint8_t** out,
                                                size_t* out_len);
/* exclude_info_blocks != 0 omits the DIDLInfo element entirely (the
 * package-fixity digest scope). */
DIDLPACK_API didlpack_status didlpack_canonicalize(const didlpack_document* doc,
                                                   int exclude_info_blocks, uint8_t** out,
                                                   size_t* out_len);
DIDLPACK_API didlpack_status didlpack_write_file(const didlpack_document* doc, const char* path);

/* Parse warnings retained on the document handle (code, location, message). */
DIDLPACK_API size_t didlpack_warning_count(const didlpack_document* doc);
DIDLPACK_API didlpack_status didlpack_warning(const didlpack_document* doc, size_t index,
                                              char** code, char** location, char** message);

/* documentId: *out is NULL when the document has none. */
DIDLPACK_API didlpack_status didlpack_document_id(const didlpack_document* doc, char** out);
DIDLPACK_API didlpack_status didlpack_content_identifier(const didlpack_document* doc, char** out);
DIDLPACK_API size_t didlpack_component_count(const didlpack_document* doc);
DIDLPACK_API size_t didlpack_resource_count(const didlpack_document* doc, size_t component);
/* by_value receives 1 for By Value provisioning; *ref is NULL then.
 * Indices are 0-based. */
DIDLPACK_API didlpack_status didlpack_resource_info(const didlpack_document* doc, size_t component,
                                                    size_t resource, char** mime_type, int* by_value,
                                                    char** ref);

/* ------------------------------------------------------------------ */
/* Namespace registry                                                 */

DIDLPACK_API didlpack_registry* didlpack_registry_new(void);
/* Lines of `kind whitespace namespace-URI`; extends/overrides the
 * built-in table. */
DIDLPACK_API didlpack_status didlpack_registry_load_file(didlpack_registry* registry,
                                                         const char* path);
DIDLPACK_API void didlpack_registry_free(didlpack_registry* registry);

/* ------------------------------------------------------------------ */
/* Fetcher                                                            */

/* New fetchers resolve file: URIs only; enable the network explicitly. */
DIDLPACK_API didlpack_fetcher* didlpack_fetcher_new(void);
DIDLPACK_API didlpack_status didlpack_fetcher_allow_network(didlpack_fetcher* fetcher, int allow);
DIDLPACK_API didlpack_status didlpack_fetcher_set_timeout(didlpack_fetcher* fetcher,
                                                          unsigned seconds);
DIDLPACK_API didlpack_status didlpack_fetcher_map(didlpack_fetcher* fetcher, const char* uri,
                                                  const char* path);
/* Lines of `URI<TAB>path`; relative paths resolve against the map file. */
DIDLPACK_API didlpack_status didlpack_fetcher_load_map_file(didlpack_fetcher* fetcher,
                                                            const char* path);
DIDLPACK_API void didlpack_fetcher_free(didlpack_fetcher* fetcher);

/* ------------------------------------------------------------------ */
/* Profile validation                                                 */

/* report_json (optional) receives {"passed": ..., "findings": [...]};
 * passed (optional) receives 0/1. registry may be NULL for the built-in
 * table. lenient downgrades PR-03 to a warning. */
DIDLPACK_API didlpack_status didlpack_validate(const didlpack_document* doc,
                                               const didlpack_registry* registry, int lenient,
                                               int* passed, char** report_json);

/* ------------------------------------------------------------------ */
/* Fixity verification                                                */

#define DIDLPACK_VERIFY_COMPONENTS 1u
#define DIDLPACK_VERIFY_PACKAGE 2u
#define DIDLPACK_VERIFY_BIT_EQUIVALENCE 4u
#define DIDLPACK_VERIFY_ALL 7u

/* ok receives 1 when every requested check passed (no-fixity-info counts
 * as passing); fetch_trouble receives 1 when some bytes could not be
 * resolved. */
DIDLPACK_API didlpack_status didlpack_verify(const didlpack_document* doc,
                                             const didlpack_registry* registry,
                                             didlpack_fetcher* fetcher, unsigned checks, int* ok,
                                             int* fetch_trouble, char** report_json);

DIDLPACK_API didlpack_status didlpack_attach_package_fixity(const didlpack_document* doc,
                                                            const char* algorithm_uri,
                                                            didlpack_document** out);

/* ------------------------------------------------------------------ */
/* Provisioning                                                       */

DIDLPACK_API didlpack_status didlpack_embed_all(const didlpack_document* doc,
                                                didlpack_fetcher* fetcher,
                                                didlpack_document** out);
/* Writes every resource into out_dir as <component>-<resource>.<ext> and
 * rewrites it By Reference under base_uri. */
DIDLPACK_API didlpack_status didlpack_externalize_all(const didlpack_document* doc,
                                                      didlpack_fetcher* fetcher,
                                                      const char* base_uri, const char* out_dir,
                                                      didlpack_document** out);

/* ------------------------------------------------------------------ */
/* Assembly                                                           */

DIDLPACK_API didlpack_status didlpack_build(const char* manifest_path, didlpack_fetcher* fetcher,
                                            didlpack_document** out);
/* ok as for didlpack_verify; report_json receives the report.json body. */
DIDLPACK_API didlpack_status didlpack_unpack(const didlpack_document* doc,
                                             const didlpack_registry* registry,
                                             didlpack_fetcher* fetcher, const char* out_dir,
                                             int* ok, int* fetch_trouble, char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* DIDLPACK_H */
