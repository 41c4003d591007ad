#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fixity.hpp"
#include "model.hpp"
#include "profile.hpp"
#include "resources.hpp"

namespace didlpack {

struct ManifestResource {
  std::string source;  // filesystem path (relative to the manifest) or URI
  std::string mime_type;
  bool embed = false;
  std::vector<std::string> content_encodings;
  std::optional<std::string> group;  // resources sharing a group become one component
};

struct RepInfoEntry {
  // Group key, or 1-based ordinal of the derived component.
  std::variant<std::string, std::size_t> target;
  std::string xml_file;
};

struct FixityPolicy {
  bool enabled = false;
  std::string algorithm_uri = kSha256Uri;
};

struct PackageManifest {
  std::optional<std::string> package_id;  // -> DIDLDocumentId
  std::string content_id;                 // -> DII Identifier
  std::vector<ManifestResource> resources;
  std::vector<RepInfoEntry> rep_info;
  std::vector<std::string> pdi;  // XML files attached as item-level statements
  FixityPolicy fixity;
  std::filesystem::path base_dir;  // resolves relative paths

  // Derived component grouping, in manifest order of first appearance.
  // Each element lists resource indices of one component.
  std::vector<std::vector<std::size_t>> component_groups() const;
};

// Raises Errc::manifest_syntax (bad JSON) / Errc::manifest_semantics
// (violated manifest invariant).
PackageManifest load_manifest(std::string_view bytes, std::filesystem::path base_dir = ".");
PackageManifest load_manifest_file(const std::filesystem::path& path);

// Produces a document that validates with zero errors; fetch/read
// failures carry the manifest entry index.
DidlDocument build_package(const PackageManifest& manifest, Fetcher& fetcher);

struct UnpackResult {
  struct FileEntry {
    std::string name;  // relative to the output directory
    std::string sha256_hex;
  };
  std::vector<FileEntry> files;   // resources and sidecars
  ProfileReport profile;
  DocumentVerification verification;
  std::vector<std::string> failures;  // per-resource fetch/write problems
  bool ok = false;
  bool fetch_trouble = false;
  std::string report_json;  // contents of report.json
};

// Writes resources, metadata sidecars, package.id and report.json into
// out_dir. Raises Errc::profile_blocked (nothing written) when the
// profile reports errors.
UnpackResult unpack_package(const DidlDocument& doc, Fetcher& fetcher,
                            const std::filesystem::path& out_dir,
                            const NamespaceRegistry& registry = NamespaceRegistry::builtin());

// Built-in mimeType -> filename extension table (fallback "bin").
std::string extension_for_mime_type(std::string_view mime_type);

}  // namespace didlpack
