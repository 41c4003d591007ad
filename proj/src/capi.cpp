// extern "C" surface of the shared library. Exceptions from the core are
// caught here and turned into status codes plus a thread-local message.

#include "didlpack/didlpack.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "assembler.hpp"
#include "error.hpp"
#include "fixity.hpp"
#include "model.hpp"
#include "profile.hpp"
#include "resources.hpp"
#include "uri.hpp"
#include "xmlio.hpp"

using namespace didlpack;

struct didlpack_document {
  DidlDocument doc;
  std::vector<Warning> warnings;
};

struct didlpack_fetcher {
  StandardFetcher fetcher;
};

struct didlpack_registry {
  NamespaceRegistry registry;
};

namespace {

thread_local std::string g_last_error;

didlpack_status map_errc(Errc code) {
  switch (code) {
    case Errc::malformed_xml: return DIDLPACK_E_MALFORMED_XML;
    case Errc::not_didl: return DIDLPACK_E_NOT_DIDL;
    case Errc::profile_shape: return DIDLPACK_E_PROFILE_SHAPE;
    case Errc::invariant_violation: return DIDLPACK_E_INVARIANT;
    case Errc::not_xml: return DIDLPACK_E_NOT_XML;
    case Errc::missing_identifier: return DIDLPACK_E_MISSING_IDENTIFIER;
    case Errc::empty_identifier: return DIDLPACK_E_EMPTY_IDENTIFIER;
    case Errc::invalid_base64: return DIDLPACK_E_BASE64;
    case Errc::fetch_failed: return DIDLPACK_E_FETCH;
    case Errc::scheme_unsupported: return DIDLPACK_E_SCHEME;
    case Errc::write_failed: return DIDLPACK_E_WRITE;
    case Errc::unsupported_encoding: return DIDLPACK_E_UNSUPPORTED_ENCODING;
    case Errc::corrupt_stream: return DIDLPACK_E_CORRUPT_STREAM;
    case Errc::unsupported_algorithm: return DIDLPACK_E_UNSUPPORTED_ALGORITHM;
    case Errc::malformed_fixity: return DIDLPACK_E_MALFORMED_FIXITY;
    case Errc::empty_record_list: return DIDLPACK_E_EMPTY_RECORD_LIST;
    case Errc::manifest_syntax: return DIDLPACK_E_MANIFEST_SYNTAX;
    case Errc::manifest_semantics: return DIDLPACK_E_MANIFEST_SEMANTICS;
    case Errc::profile_blocked: return DIDLPACK_E_PROFILE_BLOCKED;
    case Errc::io_error: return DIDLPACK_E_IO;
    case Errc::invalid_argument: return DIDLPACK_E_INVALID_ARG;
  }
  return DIDLPACK_E_INTERNAL;
}

template <typename Fn>
didlpack_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return DIDLPACK_OK;
  } catch (const Error& e) {
    SourcePos pos = e.pos();
    std::ostringstream msg;
    msg << errc_name(e.code()) << ": " << e.what();
    if (pos.line != 0) msg << " (line " << pos.line << ", column " << pos.column << ")";
    g_last_error = msg.str();
    return map_errc(e.code());
  } catch (const std::exception& e) {
    g_last_error = std::string("internal error: ") + e.what();
    return DIDLPACK_E_INTERNAL;
  } catch (...) {
    g_last_error = "internal error";
    return DIDLPACK_E_INTERNAL;
  }
}

didlpack_status bad_arg(const char* what) {
  g_last_error = std::string("InvalidArgument: ") + what;
  return DIDLPACK_E_INVALID_ARG;
}

char* dup_string(std::string_view s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) std::abort();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

uint8_t* dup_bytes(std::string_view s) {
  uint8_t* out = static_cast<uint8_t*>(std::malloc(s.empty() ? 1 : s.size()));
  if (out == nullptr) std::abort();
  std::memcpy(out, s.data(), s.size());
  return out;
}

const NamespaceRegistry& registry_of(const didlpack_registry* registry) {
  return registry != nullptr ? registry->registry : NamespaceRegistry::builtin();
}

std::string read_whole_file(const char* path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io_error, std::string("cannot open ") + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

}  // namespace

extern "C" {

const char* didlpack_version(void) { return "0.1.0"; }

const char* didlpack_status_name(didlpack_status status) {
  switch (status) {
    case DIDLPACK_OK: return "ok";
    case DIDLPACK_E_INVALID_ARG: return "invalid-argument";
    case DIDLPACK_E_MALFORMED_XML: return "malformed-xml";
    case DIDLPACK_E_NOT_DIDL: return "not-didl";
    case DIDLPACK_E_PROFILE_SHAPE: return "profile-shape";
    case DIDLPACK_E_INVARIANT: return "invariant-violation";
    case DIDLPACK_E_NOT_XML: return "not-xml";
    case DIDLPACK_E_MISSING_IDENTIFIER: return "missing-identifier";
    case DIDLPACK_E_EMPTY_IDENTIFIER: return "empty-identifier";
    case DIDLPACK_E_BASE64: return "invalid-base64";
    case DIDLPACK_E_FETCH: return "fetch-failed";
    case DIDLPACK_E_SCHEME: return "scheme-unsupported";
    case DIDLPACK_E_WRITE: return "write-failed";
    case DIDLPACK_E_UNSUPPORTED_ENCODING: return "unsupported-encoding";
    case DIDLPACK_E_CORRUPT_STREAM: return "corrupt-stream";
    case DIDLPACK_E_UNSUPPORTED_ALGORITHM: return "unsupported-algorithm";
    case DIDLPACK_E_MALFORMED_FIXITY: return "malformed-fixity";
    case DIDLPACK_E_EMPTY_RECORD_LIST: return "empty-record-list";
    case DIDLPACK_E_MANIFEST_SYNTAX: return "manifest-syntax";
    case DIDLPACK_E_MANIFEST_SEMANTICS: return "manifest-semantics";
    case DIDLPACK_E_PROFILE_BLOCKED: return "profile-blocked";
    case DIDLPACK_E_IO: return "io-error";
    case DIDLPACK_E_INTERNAL: return "internal-error";
  }
  return "unknown";
}

const char* didlpack_last_error(void) { return g_last_error.c_str(); }

void didlpack_string_free(char* s) { std::free(s); }
void didlpack_bytes_free(uint8_t* bytes) { std::free(bytes); }

/* ------------------------------------------------------------------ */

didlpack_status didlpack_parse(const uint8_t* bytes, size_t len, didlpack_document** out) {
  if (bytes == nullptr || out == nullptr) return bad_arg("didlpack_parse: NULL argument");
  return guarded([&] {
    ParseOutcome outcome = parse_didl(std::string_view(reinterpret_cast<const char*>(bytes), len));
    *out = new didlpack_document{std::move(outcome.document), std::move(outcome.warnings)};
  });
}

didlpack_status didlpack_parse_file(const char* path, didlpack_document** out) {
  if (path == nullptr || out == nullptr) return bad_arg("didlpack_parse_file: NULL argument");
  return guarded([&] {
    std::string bytes = read_whole_file(path);
    ParseOutcome outcome = parse_didl(bytes);
    *out = new didlpack_document{std::move(outcome.document), std::move(outcome.warnings)};
  });
}

void didlpack_document_free(didlpack_document* doc) { delete doc; }

didlpack_status didlpack_serialize(const didlpack_document* doc, uint8_t** out, size_t* out_len) {
  if (doc == nullptr || out == nullptr || out_len == nullptr) {
    return bad_arg("didlpack_serialize: NULL argument");
  }
  return guarded([&] {
    std::string bytes = serialize_didl(doc->doc);
    *out = dup_bytes(bytes);
    *out_len = bytes.size();
  });
}

didlpack_status didlpack_canonicalize(const didlpack_document* doc, int exclude_info_blocks,
                                      uint8_t** out, size_t* out_len) {
  if (doc == nullptr || out == nullptr || out_len == nullptr) {
    return bad_arg("didlpack_canonicalize: NULL argument");
  }
  return guarded([&] {
    std::string bytes = canonicalize(doc->doc, exclude_info_blocks != 0);
    *out = dup_bytes(bytes);
    *out_len = bytes.size();
  });
}

didlpack_status didlpack_write_file(const didlpack_document* doc, const char* path) {
  if (doc == nullptr || path == nullptr) return bad_arg("didlpack_write_file: NULL argument");
  return guarded([&] {
    std::string bytes = serialize_didl(doc->doc);
    std::ofstream outfile(path, std::ios::binary | std::ios::trunc);
    if (!outfile) raise(Errc::io_error, std::string("cannot open ") + path + " for writing");
    outfile.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!outfile.good()) raise(Errc::io_error, std::string("write error on ") + path);
  });
}

size_t didlpack_warning_count(const didlpack_document* doc) {
  return doc == nullptr ? 0 : doc->warnings.size();
}

didlpack_status didlpack_warning(const didlpack_document* doc, size_t index, char** code,
                                 char** location, char** message) {
  if (doc == nullptr || index >= doc->warnings.size()) {
    return bad_arg("didlpack_warning: index out of range");
  }
  const Warning& w = doc->warnings[index];
  if (code != nullptr) *code = dup_string(w.code);
  if (location != nullptr) *location = dup_string(w.location);
  if (message != nullptr) *message = dup_string(w.message);
  g_last_error.clear();
  return DIDLPACK_OK;
}

didlpack_status didlpack_document_id(const didlpack_document* doc, char** out) {
  if (doc == nullptr || out == nullptr) return bad_arg("didlpack_document_id: NULL argument");
  *out = doc->doc.document_id ? dup_string(*doc->doc.document_id) : nullptr;
  g_last_error.clear();
  return DIDLPACK_OK;
}

didlpack_status didlpack_content_identifier(const didlpack_document* doc, char** out) {
  if (doc == nullptr || out == nullptr) return bad_arg("didlpack_content_identifier: NULL argument");
  return guarded([&] { *out = dup_string(get_content_identifier(doc->doc.item()).value); });
}

size_t didlpack_component_count(const didlpack_document* doc) {
  if (doc == nullptr || doc->doc.items.empty()) return 0;
  return doc->doc.items.front().components.size();
}

size_t didlpack_resource_count(const didlpack_document* doc, size_t component) {
  if (doc == nullptr || doc->doc.items.empty()) return 0;
  const auto& components = doc->doc.items.front().components;
  if (component >= components.size()) return 0;
  return components[component].resources.size();
}

didlpack_status didlpack_resource_info(const didlpack_document* doc, size_t component,
                                       size_t resource, char** mime_type, int* by_value,
                                       char** ref) {
  if (doc == nullptr || doc->doc.items.empty()) return bad_arg("didlpack_resource_info: no document");
  const auto& components = doc->doc.items.front().components;
  if (component >= components.size() || resource >= components[component].resources.size()) {
    return bad_arg("didlpack_resource_info: index out of range");
  }
  const Resource& r = components[component].resources[resource];
  if (mime_type != nullptr) *mime_type = dup_string(r.mime_type);
  if (by_value != nullptr) *by_value = r.payload.has_value() ? 1 : 0;
  if (ref != nullptr) *ref = r.ref ? dup_string(*r.ref) : nullptr;
  g_last_error.clear();
  return DIDLPACK_OK;
}

/* ------------------------------------------------------------------ */

didlpack_registry* didlpack_registry_new(void) { return new didlpack_registry{}; }

didlpack_status didlpack_registry_load_file(didlpack_registry* registry, const char* path) {
  if (registry == nullptr || path == nullptr) return bad_arg("didlpack_registry_load_file: NULL argument");
  return guarded([&] { registry->registry.load_file(path); });
}

void didlpack_registry_free(didlpack_registry* registry) { delete registry; }

/* ------------------------------------------------------------------ */

didlpack_fetcher* didlpack_fetcher_new(void) { return new didlpack_fetcher{}; }

didlpack_status didlpack_fetcher_allow_network(didlpack_fetcher* fetcher, int allow) {
  if (fetcher == nullptr) return bad_arg("didlpack_fetcher_allow_network: NULL fetcher");
  fetcher->fetcher.allow_network(allow != 0);
  g_last_error.clear();
  return DIDLPACK_OK;
}

didlpack_status didlpack_fetcher_set_timeout(didlpack_fetcher* fetcher, unsigned seconds) {
  if (fetcher == nullptr) return bad_arg("didlpack_fetcher_set_timeout: NULL fetcher");
  fetcher->fetcher.set_timeout(seconds);
  g_last_error.clear();
  return DIDLPACK_OK;
}

didlpack_status didlpack_fetcher_map(didlpack_fetcher* fetcher, const char* uri, const char* path) {
  if (fetcher == nullptr || uri == nullptr || path == nullptr) {
    return bad_arg("didlpack_fetcher_map: NULL argument");
  }
  fetcher->fetcher.map_uri(uri, path);
  g_last_error.clear();
  return DIDLPACK_OK;
}

didlpack_status didlpack_fetcher_load_map_file(didlpack_fetcher* fetcher, const char* path) {
  if (fetcher == nullptr || path == nullptr) return bad_arg("didlpack_fetcher_load_map_file: NULL argument");
  return guarded([&] { fetcher->fetcher.load_map_file(path); });
}

void didlpack_fetcher_free(didlpack_fetcher* fetcher) { delete fetcher; }

/* ------------------------------------------------------------------ */

didlpack_status didlpack_validate(const didlpack_document* doc, const didlpack_registry* registry,
                                  int lenient, int* passed, char** report_json) {
  if (doc == nullptr) return bad_arg("didlpack_validate: NULL document");
  return guarded([&] {
    ProfileReport report = validate_profile(doc->doc, registry_of(registry), lenient != 0);
    if (passed != nullptr) *passed = report.passed ? 1 : 0;
    if (report_json != nullptr) *report_json = dup_string(report.to_json());
  });
}

didlpack_status didlpack_verify(const didlpack_document* doc, const didlpack_registry* registry,
                                didlpack_fetcher* fetcher, unsigned checks, int* ok,
                                int* fetch_trouble, char** report_json) {
  if (doc == nullptr || fetcher == nullptr) return bad_arg("didlpack_verify: NULL argument");
  if ((checks & DIDLPACK_VERIFY_ALL) == 0) return bad_arg("didlpack_verify: no checks selected");
  return guarded([&] {
    DocumentVerification verification =
        verify_document(doc->doc, fetcher->fetcher, checks, registry_of(registry));
    if (ok != nullptr) *ok = verification.ok ? 1 : 0;
    if (fetch_trouble != nullptr) *fetch_trouble = verification.fetch_trouble ? 1 : 0;
    if (report_json != nullptr) *report_json = dup_string(verification_to_json(verification));
  });
}

didlpack_status didlpack_attach_package_fixity(const didlpack_document* doc,
                                               const char* algorithm_uri, didlpack_document** out) {
  if (doc == nullptr || out == nullptr) return bad_arg("didlpack_attach_package_fixity: NULL argument");
  return guarded([&] {
    std::string uri = algorithm_uri != nullptr ? algorithm_uri : kSha256Uri;
    *out = new didlpack_document{attach_package_fixity(doc->doc, uri), {}};
  });
}

/* ------------------------------------------------------------------ */

didlpack_status didlpack_embed_all(const didlpack_document* doc, didlpack_fetcher* fetcher,
                                   didlpack_document** out) {
  if (doc == nullptr || fetcher == nullptr || out == nullptr) {
    return bad_arg("didlpack_embed_all: NULL argument");
  }
  return guarded([&] {
    DidlDocument copy = doc->doc;
    for (auto& item : copy.items) {
      for (auto& component : item.components) {
        for (auto& resource : component.resources) {
          resource = embed_resource(resource, fetcher->fetcher);
        }
      }
    }
    *out = new didlpack_document{std::move(copy), {}};
  });
}

didlpack_status didlpack_externalize_all(const didlpack_document* doc, didlpack_fetcher* fetcher,
                                         const char* base_uri, const char* out_dir,
                                         didlpack_document** out) {
  if (doc == nullptr || fetcher == nullptr || base_uri == nullptr || out_dir == nullptr ||
      out == nullptr) {
    return bad_arg("didlpack_externalize_all: NULL argument");
  }
  return guarded([&] {
    std::string scheme = uri_scheme(base_uri);
    if (!is_absolute_uri(base_uri) || (scheme != "file" && scheme != "http" && scheme != "https")) {
      raise(Errc::invalid_argument,
            std::string("--base-uri must be an absolute file/http/https URI, got \"") + base_uri + "\"");
    }
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) raise(Errc::io_error, std::string("cannot create ") + out_dir + ": " + ec.message());

    DidlDocument copy = doc->doc;
    for (auto& item : copy.items) {
      for (std::size_t c = 0; c < item.components.size(); ++c) {
        auto& component = item.components[c];
        for (std::size_t r = 0; r < component.resources.size(); ++r) {
          std::string name = std::to_string(c + 1) + "-" + std::to_string(r + 1) + "." +
                             extension_for_mime_type(component.resources[r].mime_type);
          FileSink sink((std::filesystem::path(out_dir) / name).string());
          component.resources[r] = externalize_resource(component.resources[r], fetcher->fetcher,
                                                        join_uri(base_uri, name), sink);
        }
      }
    }
    *out = new didlpack_document{std::move(copy), {}};
  });
}

/* ------------------------------------------------------------------ */

didlpack_status didlpack_build(const char* manifest_path, didlpack_fetcher* fetcher,
                               didlpack_document** out) {
  if (manifest_path == nullptr || fetcher == nullptr || out == nullptr) {
    return bad_arg("didlpack_build: NULL argument");
  }
  return guarded([&] {
    PackageManifest manifest = load_manifest_file(manifest_path);
    *out = new didlpack_document{build_package(manifest, fetcher->fetcher), {}};
  });
}

didlpack_status didlpack_unpack(const didlpack_document* doc, const didlpack_registry* registry,
                                didlpack_fetcher* fetcher, const char* out_dir, int* ok,
                                int* fetch_trouble, char** report_json) {
  if (doc == nullptr || fetcher == nullptr || out_dir == nullptr) {
    return bad_arg("didlpack_unpack: NULL argument");
  }
  return guarded([&] {
    UnpackResult result = unpack_package(doc->doc, fetcher->fetcher, out_dir, registry_of(registry));
    if (ok != nullptr) *ok = result.ok ? 1 : 0;
    if (fetch_trouble != nullptr) *fetch_trouble = result.fetch_trouble ? 1 : 0;
    if (report_json != nullptr) *report_json = dup_string(result.report_json);
  });
}

}  // extern "C"
