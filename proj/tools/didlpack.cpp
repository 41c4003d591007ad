// didlpack -- command-line front end for the didlpack shared library.
//
// Exit codes: 0 success, 1 validation/verification failure, 2 usage
// error, 3 I/O or fetch error. Human-readable text goes to stderr;
// machine output (documents, reports, tables) goes to stdout or -o files.

#include <didlpack/didlpack.h>

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

int exit_code_for(didlpack_status status) {
  switch (status) {
    case DIDLPACK_OK:
      return kExitOk;
    case DIDLPACK_E_INVALID_ARG:
      return kExitUsage;
    case DIDLPACK_E_FETCH:
    case DIDLPACK_E_SCHEME:
    case DIDLPACK_E_WRITE:
    case DIDLPACK_E_IO:
    case DIDLPACK_E_INTERNAL:
      return kExitIo;
    default:
      return kExitFailed;
  }
}

int report_failure(didlpack_status status) {
  std::fprintf(stderr, "didlpack: %s\n", didlpack_last_error());
  return exit_code_for(status);
}

struct StringOut {
  char* value = nullptr;
  ~StringOut() { didlpack_string_free(value); }
};

struct BytesOut {
  uint8_t* data = nullptr;
  size_t size = 0;
  ~BytesOut() { didlpack_bytes_free(data); }
};

using DocPtr = std::unique_ptr<didlpack_document, decltype(&didlpack_document_free)>;
using FetcherPtr = std::unique_ptr<didlpack_fetcher, decltype(&didlpack_fetcher_free)>;
using RegistryPtr = std::unique_ptr<didlpack_registry, decltype(&didlpack_registry_free)>;

// Options shared by the subcommands that resolve resource bytes.
struct FetchOptions {
  std::string fetch_map;
  bool allow_network = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--fetch-map", fetch_map,
                    "URI<TAB>path overrides, one per line, applied before any scheme handling");
    cmd->add_flag("--allow-network", allow_network, "enable http/https fetching (off by default)");
  }

  FetcherPtr make(didlpack_status& status) const {
    FetcherPtr fetcher(didlpack_fetcher_new(), didlpack_fetcher_free);
    status = DIDLPACK_OK;
    if (allow_network) didlpack_fetcher_allow_network(fetcher.get(), 1);
    if (const char* env = std::getenv("DIDLPACK_TIMEOUT_SECS")) {
      char* end = nullptr;
      unsigned long secs = std::strtoul(env, &end, 10);
      if (end != env && *end == '\0' && secs > 0) {
        didlpack_fetcher_set_timeout(fetcher.get(), static_cast<unsigned>(secs));
      } else {
        std::fprintf(stderr, "didlpack: ignoring malformed DIDLPACK_TIMEOUT_SECS=\"%s\"\n", env);
      }
    }
    if (!fetch_map.empty()) {
      status = didlpack_fetcher_load_map_file(fetcher.get(), fetch_map.c_str());
    }
    return fetcher;
  }
};

struct RegistryOptions {
  std::string path;

  void attach(CLI::App* cmd) {
    cmd->add_option("--ns-registry", path,
                    "namespace registry file (`kind namespace-URI` lines) extending the built-in table");
  }

  RegistryPtr make(didlpack_status& status) const {
    status = DIDLPACK_OK;
    if (path.empty()) return RegistryPtr(nullptr, didlpack_registry_free);
    RegistryPtr registry(didlpack_registry_new(), didlpack_registry_free);
    status = didlpack_registry_load_file(registry.get(), path.c_str());
    return registry;
  }
};

DocPtr parse_input(const std::string& path, didlpack_status& status) {
  didlpack_document* doc = nullptr;
  status = didlpack_parse_file(path.c_str(), &doc);
  return DocPtr(doc, didlpack_document_free);
}

void print_warnings(const didlpack_document* doc) {
  size_t n = didlpack_warning_count(doc);
  for (size_t i = 0; i < n; ++i) {
    StringOut code, location, message;
    if (didlpack_warning(doc, i, &code.value, &location.value, &message.value) == DIDLPACK_OK) {
      std::fprintf(stderr, "didlpack: warning %s at %s: %s\n", code.value, location.value,
                   message.value);
    }
  }
}

int write_output(const didlpack_document* doc, const std::string& out_path) {
  if (!out_path.empty()) {
    didlpack_status status = didlpack_write_file(doc, out_path.c_str());
    if (status != DIDLPACK_OK) return report_failure(status);
    return kExitOk;
  }
  BytesOut bytes;
  didlpack_status status = didlpack_serialize(doc, &bytes.data, &bytes.size);
  if (status != DIDLPACK_OK) return report_failure(status);
  std::fwrite(bytes.data, 1, bytes.size, stdout);
  return kExitOk;
}

int write_text(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
    std::fputc('\n', stdout);
    return kExitOk;
  }
  std::FILE* f = std::fopen(out_path.c_str(), "wb");
  if (f == nullptr) {
    std::fprintf(stderr, "didlpack: cannot open %s for writing\n", out_path.c_str());
    return kExitIo;
  }
  std::fwrite(text.data(), 1, text.size(), f);
  std::fclose(f);
  return kExitOk;
}

// ---------------------------------------------------------------------------

int run_build(const std::string& manifest, const std::string& out_path, const FetchOptions& fetch) {
  didlpack_status status;
  FetcherPtr fetcher = fetch.make(status);
  if (status != DIDLPACK_OK) return report_failure(status);
  didlpack_document* raw = nullptr;
  status = didlpack_build(manifest.c_str(), fetcher.get(), &raw);
  DocPtr doc(raw, didlpack_document_free);
  if (status != DIDLPACK_OK) return report_failure(status);
  return write_output(doc.get(), out_path);
}

int run_validate(const std::string& input, bool lenient, const std::string& report_path,
                 const RegistryOptions& reg) {
  didlpack_status status;
  RegistryPtr registry = reg.make(status);
  if (status != DIDLPACK_OK) return report_failure(status);
  DocPtr doc = parse_input(input, status);
  if (status != DIDLPACK_OK) return report_failure(status);
  print_warnings(doc.get());
  int passed = 0;
  StringOut report;
  status = didlpack_validate(doc.get(), registry.get(), lenient ? 1 : 0, &passed, &report.value);
  if (status != DIDLPACK_OK) return report_failure(status);
  int rc = write_text(report.value, report_path);
  if (rc != kExitOk) return rc;
  std::fprintf(stderr, "didlpack: profile %s\n", passed ? "passed" : "failed");
  return passed ? kExitOk : kExitFailed;
}

int run_verify(const std::string& input, unsigned checks, const FetchOptions& fetch,
               const RegistryOptions& reg) {
  didlpack_status status;
  FetcherPtr fetcher = fetch.make(status);
  if (status != DIDLPACK_OK) return report_failure(status);
  RegistryPtr registry = reg.make(status);
  if (status != DIDLPACK_OK) return report_failure(status);
  DocPtr doc = parse_input(input, status);
  if (status != DIDLPACK_OK) return report_failure(status);
  print_warnings(doc.get());
  int ok = 0;
  int fetch_trouble = 0;
  StringOut report;
  status = didlpack_verify(doc.get(), registry.get(), fetcher.get(), checks, &ok, &fetch_trouble,
                           &report.value);
  if (status != DIDLPACK_OK) return report_failure(status);
  int rc = write_text(report.value, "");
  if (rc != kExitOk) return rc;
  if (ok) return kExitOk;
  std::fprintf(stderr, "didlpack: verification failed%s\n",
               fetch_trouble ? " (some bytes could not be fetched)" : "");
  return fetch_trouble ? kExitIo : kExitFailed;
}

int run_unpack(const std::string& input, const std::string& dir, const FetchOptions& fetch,
               const RegistryOptions& reg) {
  didlpack_status status;
  FetcherPtr fetcher = fetch.make(status);
  if (status != DIDLPACK_OK) return report_failure(status);
  RegistryPtr registry = reg.make(status);
  if (status != DIDLPACK_OK) return report_failure(status);
  DocPtr doc = parse_input(input, status);
  if (status != DIDLPACK_OK) return report_failure(status);
  print_warnings(doc.get());
  int ok = 0;
  int fetch_trouble = 0;
  StringOut report;
  status = didlpack_unpack(doc.get(), registry.get(), fetcher.get(), dir.c_str(), &ok,
                           &fetch_trouble, &report.value);
  if (status != DIDLPACK_OK) return report_failure(status);
  std::fprintf(stderr, "didlpack: unpacked into %s (report.json written)\n", dir.c_str());
  if (ok) return kExitOk;
  std::fprintf(stderr, "didlpack: unpack finished with problems, see report.json\n");
  return fetch_trouble ? kExitIo : kExitFailed;
}

int run_inspect(const std::string& input, const RegistryOptions& reg) {
  didlpack_status status;
  RegistryPtr registry = reg.make(status);
  if (status != DIDLPACK_OK) return report_failure(status);
  DocPtr doc = parse_input(input, status);
  if (status != DIDLPACK_OK) return report_failure(status);
  print_warnings(doc.get());

  StringOut doc_id;
  didlpack_document_id(doc.get(), &doc_id.value);
  std::printf("documentId:  %s\n", doc_id.value != nullptr ? doc_id.value : "(none)");
  StringOut content_id;
  if (didlpack_content_identifier(doc.get(), &content_id.value) == DIDLPACK_OK) {
    std::printf("identifier:  %s\n", content_id.value);
  } else {
    std::printf("identifier:  (none)\n");
  }

  std::printf("%-10s %-9s %-24s %-13s %s\n", "component", "resource", "mimeType", "provision",
              "location");
  size_t components = didlpack_component_count(doc.get());
  for (size_t c = 0; c < components; ++c) {
    size_t resources = didlpack_resource_count(doc.get(), c);
    for (size_t r = 0; r < resources; ++r) {
      StringOut mime, ref;
      int by_value = 0;
      if (didlpack_resource_info(doc.get(), c, r, &mime.value, &by_value, &ref.value) != DIDLPACK_OK) {
        continue;
      }
      std::printf("%-10zu %-9zu %-24s %-13s %s\n", c + 1, r + 1, mime.value,
                  by_value ? "by-value" : "by-reference",
                  ref.value != nullptr ? ref.value : "(embedded)");
    }
  }
  return kExitOk;
}

int run_embed(const std::string& input, const std::string& out_path, const FetchOptions& fetch) {
  didlpack_status status;
  FetcherPtr fetcher = fetch.make(status);
  if (status != DIDLPACK_OK) return report_failure(status);
  DocPtr doc = parse_input(input, status);
  if (status != DIDLPACK_OK) return report_failure(status);
  print_warnings(doc.get());
  didlpack_document* raw = nullptr;
  status = didlpack_embed_all(doc.get(), fetcher.get(), &raw);
  DocPtr embedded(raw, didlpack_document_free);
  if (status != DIDLPACK_OK) return report_failure(status);
  return write_output(embedded.get(), out_path);
}

int run_externalize(const std::string& input, const std::string& base_uri, const std::string& dir,
                    const std::string& out_path, const FetchOptions& fetch) {
  didlpack_status status;
  FetcherPtr fetcher = fetch.make(status);
  if (status != DIDLPACK_OK) return report_failure(status);
  DocPtr doc = parse_input(input, status);
  if (status != DIDLPACK_OK) return report_failure(status);
  print_warnings(doc.get());
  didlpack_document* raw = nullptr;
  status = didlpack_externalize_all(doc.get(), fetcher.get(), base_uri.c_str(), dir.c_str(), &raw);
  DocPtr externalized(raw, didlpack_document_free);
  if (status != DIDLPACK_OK) return report_failure(status);
  return write_output(externalized.get(), out_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"didlpack: OAIS-profiled MPEG-21 DIDL packaging toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("didlpack ") + didlpack_version());

  std::string manifest, input, out_path, report_path, dir, base_uri;
  bool lenient = false;
  bool check_components = false, check_package = false, check_bits = false;
  FetchOptions fetch;
  RegistryOptions reg;

  auto* build = app.add_subcommand("build", "build a package from a JSON manifest");
  build->add_option("manifest", manifest, "manifest JSON file")->required();
  build->add_option("-o,--output", out_path, "write the DIDL document here (default stdout)");
  fetch.attach(build);

  auto* validate = app.add_subcommand("validate", "validate a DIDL document against the profile");
  validate->add_option("didl", input, "DIDL XML file")->required();
  validate->add_flag("--lenient", lenient, "downgrade PR-03 (missing identifier) to a warning");
  validate->add_option("--report", report_path, "write the JSON report here (default stdout)");
  reg.attach(validate);

  auto* verify = app.add_subcommand("verify", "verify fixity and bit-equivalence");
  verify->add_option("didl", input, "DIDL XML file")->required();
  verify->add_flag("--components", check_components, "check component-level fixity");
  verify->add_flag("--package", check_package, "check package-level fixity");
  verify->add_flag("--bit-equivalence", check_bits, "check multi-resource components");
  fetch.attach(verify);
  reg.attach(verify);

  auto* unpack = app.add_subcommand("unpack", "write resources, sidecars and report.json");
  unpack->add_option("didl", input, "DIDL XML file")->required();
  unpack->add_option("-d,--dir", dir, "output directory")->required();
  fetch.attach(unpack);
  reg.attach(unpack);

  auto* inspect = app.add_subcommand("inspect", "print identifiers and the resource table");
  inspect->add_option("didl", input, "DIDL XML file")->required();
  reg.attach(inspect);

  auto* embed = app.add_subcommand("embed", "convert every resource to By Value");
  embed->add_option("didl", input, "DIDL XML file")->required();
  embed->add_option("-o,--output", out_path, "write the DIDL document here (default stdout)");
  fetch.attach(embed);

  auto* externalize = app.add_subcommand("externalize", "convert every resource to By Reference");
  externalize->add_option("didl", input, "DIDL XML file")->required();
  externalize->add_option("--base-uri", base_uri, "absolute URI prefix for the rewritten refs")
      ->required();
  externalize->add_option("-d,--dir", dir, "directory receiving the resource files")->required();
  externalize->add_option("-o,--output", out_path, "write the DIDL document here (default stdout)");
  fetch.attach(externalize);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  if (build->parsed()) return run_build(manifest, out_path, fetch);
  if (validate->parsed()) return run_validate(input, lenient, report_path, reg);
  if (verify->parsed()) {
    unsigned checks = 0;
    if (check_components) checks |= DIDLPACK_VERIFY_COMPONENTS;
    if (check_package) checks |= DIDLPACK_VERIFY_PACKAGE;
    if (check_bits) checks |= DIDLPACK_VERIFY_BIT_EQUIVALENCE;
    if (checks == 0) checks = DIDLPACK_VERIFY_ALL;
    return run_verify(input, checks, fetch, reg);
  }
  if (unpack->parsed()) return run_unpack(input, dir, fetch, reg);
  if (inspect->parsed()) return run_inspect(input, reg);
  if (embed->parsed()) return run_embed(input, out_path, fetch);
  if (externalize->parsed()) return run_externalize(input, base_uri, dir, out_path, fetch);
  return kExitUsage;
}
