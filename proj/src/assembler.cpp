#include "assembler.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "base64.hpp"
#include "digest.hpp"
#include "error.hpp"
#include "uri.hpp"
#include "xmlio.hpp"

namespace didlpack {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file_or(const fs::path& path, Errc errc) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(errc, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

void write_file_or(const fs::path& path, std::string_view bytes, Errc errc) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(errc, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out.good()) raise(errc, "write error on " + path.string());
}

[[noreturn]] void semantics(const std::string& what) { raise(Errc::manifest_semantics, what); }

}  // namespace

std::string extension_for_mime_type(std::string_view mime_type) {
  auto semi = mime_type.find(';');
  std::string media(mime_type.substr(0, semi));
  while (!media.empty() && std::isspace(static_cast<unsigned char>(media.back()))) media.pop_back();
  std::transform(media.begin(), media.end(), media.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (media == "image/tiff") return "tiff";
  if (media == "image/jp2") return "jp2";
  if (media == "application/xml") return "xml";
  return "bin";
}

std::vector<std::vector<std::size_t>> PackageManifest::component_groups() const {
  std::vector<std::vector<std::size_t>> groups;
  std::map<std::string, std::size_t> by_key;
  for (std::size_t i = 0; i < resources.size(); ++i) {
    // Ungrouped entries get a private key so each forms its own component.
    std::string key = resources[i].group ? "g:" + *resources[i].group : "o:" + std::to_string(i);
    auto it = by_key.find(key);
    if (it == by_key.end()) {
      by_key.emplace(key, groups.size());
      groups.push_back({i});
    } else {
      groups[it->second].push_back(i);
    }
  }
  return groups;
}

PackageManifest load_manifest(std::string_view bytes, fs::path base_dir) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::parse_error& e) {
    raise(Errc::manifest_syntax, e.what());
  }
  if (!doc.is_object()) raise(Errc::manifest_syntax, "manifest root must be a JSON object");

  PackageManifest manifest;
  manifest.base_dir = std::move(base_dir);

  auto string_field = [&](const json& obj, const char* name, bool required) -> std::string {
    if (!obj.contains(name)) {
      if (required) semantics(std::string("missing required field \"") + name + "\"");
      return "";
    }
    if (!obj[name].is_string()) semantics(std::string("field \"") + name + "\" must be a string");
    return obj[name].get<std::string>();
  };

  if (doc.contains("packageId")) {
    manifest.package_id = string_field(doc, "packageId", true);
    if (!is_absolute_uri(*manifest.package_id)) {
      semantics("packageId \"" + *manifest.package_id + "\" must be an absolute URI");
    }
  }
  manifest.content_id = string_field(doc, "contentId", true);
  if (!is_absolute_uri(manifest.content_id)) {
    semantics("contentId \"" + manifest.content_id + "\" must be an absolute URI");
  }

  if (!doc.contains("resources") || !doc["resources"].is_array()) {
    semantics("\"resources\" must be an array");
  }
  for (const auto& entry : doc["resources"]) {
    if (!entry.is_object()) semantics("resource entries must be objects");
    ManifestResource resource;
    resource.source = string_field(entry, "source", true);
    if (resource.source.empty()) semantics("resource source must be non-empty");
    resource.mime_type = string_field(entry, "mimeType", true);
    if (resource.mime_type.empty()) semantics("resource mimeType must be non-empty");
    if (entry.contains("embed")) {
      if (!entry["embed"].is_boolean()) semantics("resource embed must be a boolean");
      resource.embed = entry["embed"].get<bool>();
    }
    if (entry.contains("group")) resource.group = string_field(entry, "group", true);
    if (entry.contains("contentEncodings")) {
      if (!entry["contentEncodings"].is_array()) semantics("contentEncodings must be an array");
      for (const auto& enc : entry["contentEncodings"]) {
        if (!enc.is_string()) semantics("contentEncodings entries must be strings");
        std::string name = enc.get<std::string>();
        if (name != "gzip" && name != "identity") {
          semantics("unsupported content encoding \"" + name + "\"");
        }
        resource.content_encodings.push_back(std::move(name));
      }
    }
    manifest.resources.push_back(std::move(resource));
  }
  if (manifest.resources.empty()) semantics("a package needs \xe2\x89\xa5""1 resource");

  auto groups = manifest.component_groups();
  if (doc.contains("repInfo")) {
    if (!doc["repInfo"].is_array()) semantics("\"repInfo\" must be an array");
    for (const auto& entry : doc["repInfo"]) {
      if (!entry.is_object()) semantics("repInfo entries must be objects");
      RepInfoEntry rep;
      rep.xml_file = string_field(entry, "xmlFile", true);
      if (!entry.contains("target")) semantics("repInfo entry without target");
      const auto& target = entry["target"];
      if (target.is_string()) {
        std::string key = target.get<std::string>();
        bool exists = std::any_of(manifest.resources.begin(), manifest.resources.end(),
                                  [&](const ManifestResource& r) { return r.group == key; });
        if (!exists) semantics("repInfo targets group \"" + key + "\" but no resource declares it");
        rep.target = key;
      } else if (target.is_number_unsigned()) {
        std::size_t ordinal = target.get<std::size_t>();
        if (ordinal == 0 || ordinal > groups.size()) {
          semantics("repInfo targets component " + std::to_string(ordinal) + " but the manifest derives " +
                    std::to_string(groups.size()) + " component(s)");
        }
        rep.target = ordinal;
      } else {
        semantics("repInfo target must be a group key or a component ordinal");
      }
      manifest.rep_info.push_back(std::move(rep));
    }
  }

  if (doc.contains("pdi")) {
    if (!doc["pdi"].is_array()) semantics("\"pdi\" must be an array");
    for (const auto& entry : doc["pdi"]) {
      if (!entry.is_string()) semantics("pdi entries must be file path strings");
      manifest.pdi.push_back(entry.get<std::string>());
    }
  }

  if (doc.contains("fixity")) {
    const auto& fixity = doc["fixity"];
    if (!fixity.is_object()) semantics("\"fixity\" must be an object");
    if (fixity.contains("enabled")) {
      if (!fixity["enabled"].is_boolean()) semantics("fixity.enabled must be a boolean");
      manifest.fixity.enabled = fixity["enabled"].get<bool>();
    }
    if (fixity.contains("algorithm")) {
      manifest.fixity.algorithm_uri = string_field(fixity, "algorithm", true);
    }
    if (manifest.fixity.enabled) {
      const AlgorithmInfo* algo = find_algorithm(manifest.fixity.algorithm_uri);
      if (algo == nullptr || algo->verify_only) {
        semantics("fixity algorithm \"" + manifest.fixity.algorithm_uri + "\" cannot be written");
      }
    }
  }
  return manifest;
}

PackageManifest load_manifest_file(const fs::path& path) {
  std::string bytes = read_file_or(path, Errc::io_error);
  return load_manifest(bytes, path.parent_path());
}

namespace {

bool source_is_uri(const std::string& source) {
  std::string scheme = uri_scheme(source);
  return scheme == "file" || scheme == "http" || scheme == "https";
}

// Fragment from a standalone XML file: the exact bytes of its root
// element (declaration and surrounding comments dropped).
XmlFragment fragment_from_file(const fs::path& path) {
  std::string bytes = read_file_or(path, Errc::io_error);
  XmlDocumentTree tree;
  try {
    tree = xml_parse(bytes);
  } catch (const Error& e) {
    raise(Errc::manifest_semantics, path.string() + " does not parse as XML: " + e.what());
  }
  if (tree.root.ns.empty()) {
    raise(Errc::manifest_semantics, path.string() + ": root element must be namespaced");
  }
  XmlFragment fragment;
  fragment.raw = bytes.substr(tree.root.begin, tree.root.end - tree.root.begin);
  fragment.root_namespace = tree.root.ns;
  fragment.root_local_name = tree.root.local;
  fragment.dsig_typo = tree.root.dsig_typo;
  return fragment;
}

Statement xml_statement(XmlFragment fragment) {
  return Statement::xml("application/xml; charset=utf-8", std::move(fragment));
}

XmlFragment identifier_fragment(const std::string& content_id) {
  XmlFragment fragment;
  fragment.raw = "<dii:Identifier xmlns:dii=\"" + std::string(kDiiNs) + "\">" + xml_escape(content_id) +
                 "</dii:Identifier>";
  fragment.root_namespace = kDiiNs;
  fragment.root_local_name = "Identifier";
  return fragment;
}

}  // namespace

DidlDocument build_package(const PackageManifest& manifest, Fetcher& fetcher) {
  auto groups = manifest.component_groups();

  // Bytes per manifest resource, loaded on demand (embed or fixity).
  std::vector<std::optional<std::string>> cache(manifest.resources.size());
  auto bytes_for = [&](std::size_t index) -> const std::string& {
    if (!cache[index]) {
      const ManifestResource& entry = manifest.resources[index];
      try {
        if (source_is_uri(entry.source)) {
          cache[index] = fetcher.fetch(entry.source);
        } else {
          fs::path path(entry.source);
          if (path.is_relative()) path = manifest.base_dir / path;
          cache[index] = read_file_or(path, Errc::fetch_failed);
        }
      } catch (const Error& e) {
        raise(e.code(), "resource " + std::to_string(index + 1) + " (" + entry.source + "): " + e.what());
      }
    }
    return *cache[index];
  };

  auto built_resource = [&](std::size_t index) {
    const ManifestResource& entry = manifest.resources[index];
    if (entry.embed) {
      return Resource::by_val(entry.mime_type, base64_encode(bytes_for(index)), entry.content_encodings);
    }
    std::string ref;
    if (source_is_uri(entry.source)) {
      ref = entry.source;
    } else {
      fs::path path(entry.source);
      if (path.is_relative()) path = manifest.base_dir / path;
      ref = path_to_file_uri(fs::absolute(path).lexically_normal().string());
    }
    return Resource::by_ref(entry.mime_type, std::move(ref), entry.content_encodings);
  };

  Item item;
  item.descriptors.push_back(Descriptor{{xml_statement(identifier_fragment(manifest.content_id))}});
  for (const auto& pdi_file : manifest.pdi) {
    fs::path path(pdi_file);
    if (path.is_relative()) path = manifest.base_dir / path;
    item.descriptors.push_back(Descriptor{{xml_statement(fragment_from_file(path))}});
  }

  for (std::size_t g = 0; g < groups.size(); ++g) {
    Component component;

    for (const auto& rep : manifest.rep_info) {
      bool applies = false;
      if (const auto* key = std::get_if<std::string>(&rep.target)) {
        applies = manifest.resources[groups[g].front()].group == *key;
      } else {
        applies = std::get<std::size_t>(rep.target) == g + 1;
      }
      if (!applies) continue;
      fs::path path(rep.xml_file);
      if (path.is_relative()) path = manifest.base_dir / path;
      component.descriptors.push_back(Descriptor{{xml_statement(fragment_from_file(path))}});
    }

    std::vector<Resource> resources;
    for (std::size_t index : groups[g]) resources.push_back(built_resource(index));

    if (manifest.fixity.enabled) {
      std::vector<FixityRecord> records;
      for (std::size_t k = 0; k < groups[g].size(); ++k) {
        FixityRecord record = compute_digest(bytes_for(groups[g][k]), manifest.fixity.algorithm_uri);
        if (resources[k].by_reference()) record.reference_uri = resources[k].ref;
        records.push_back(std::move(record));
      }
      component.descriptors.push_back(Descriptor{{make_fixity_statement(records)}});
    }

    component.resources = std::move(resources);
    item.components.push_back(std::move(component));
  }

  DidlDocument doc;
  doc.document_id = manifest.package_id;
  doc.items.push_back(std::move(item));
  if (manifest.fixity.enabled) {
    doc = attach_package_fixity(doc, manifest.fixity.algorithm_uri);
  }
  return doc;
}

UnpackResult unpack_package(const DidlDocument& doc, Fetcher& fetcher, const fs::path& out_dir,
                            const NamespaceRegistry& registry) {
  UnpackResult result;
  result.profile = validate_profile(doc, registry);
  if (!result.profile.passed) {
    std::size_t errors = 0;
    for (const auto& f : result.profile.findings) {
      if (f.severity == Severity::error) ++errors;
    }
    raise(Errc::profile_blocked,
          "profile validation reported " + std::to_string(errors) + " error(s); nothing unpacked");
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) raise(Errc::io_error, "cannot create " + out_dir.string() + ": " + ec.message());

  const Item& item = doc.item();
  result.verification = verify_document(doc, fetcher, kVerifyAll, registry);
  result.fetch_trouble = result.verification.fetch_trouble;

  auto record_file = [&](const std::string& name, std::string_view bytes) {
    write_file_or(out_dir / name, bytes, Errc::write_failed);
    result.files.push_back({name, to_hex(sha256(bytes))});
  };

  for (std::size_t c = 0; c < item.components.size(); ++c) {
    const Component& component = item.components[c];
    if (component.resources.size() > 1) {
      auto it = std::find_if(result.verification.bit_equivalence.begin(),
                             result.verification.bit_equivalence.end(),
                             [&](const auto& entry) { return entry.first == c + 1; });
      if (it != result.verification.bit_equivalence.end() && !it->second.equivalent) {
        result.failures.push_back("component " + std::to_string(c + 1) +
                                  ": resources are not bit-equivalent; no file written");
        continue;
      }
    }
    std::string name = std::to_string(c + 1) + "-1." +
                       extension_for_mime_type(component.resources.front().mime_type);
    try {
      ResolvedResource resolved = resolve_resource(component.resources.front(), fetcher);
      write_file_or(out_dir / name, resolved.bytes, Errc::write_failed);
      result.files.push_back({name, to_hex(resolved.digest_sha256)});
    } catch (const Error& e) {
      result.failures.push_back("component " + std::to_string(c + 1) + ": " + e.what());
      if (e.code() == Errc::fetch_failed || e.code() == Errc::scheme_unsupported) {
        result.fetch_trouble = true;
      }
    }
  }

  IdentifierLookup lookup = get_content_identifier(item, registry);
  record_file("package.id", lookup.value + "\n");

  for (std::size_t c = 0; c < item.components.size(); ++c) {
    auto statements = find_statements(item.components[c], SemanticKind::representation_info(), registry);
    for (std::size_t k = 0; k < statements.size(); ++k) {
      std::string name = "repinfo-" + std::to_string(c + 1) + "-" + std::to_string(k + 1) + ".xml";
      record_file(name, statements[k]->fragment()->raw);
    }
  }

  std::size_t pdi_count = 0;
  for (const auto& descriptor : item.descriptors) {
    for (const auto& statement : descriptor.statements) {
      if (statement.is_xml_typed() && statement.fragment() != nullptr &&
          registry.classify_namespace(statement.fragment()->root_namespace).kind == Kind::identifier) {
        continue;  // reference information lands in package.id
      }
      std::string name = "pdi-" + std::to_string(++pdi_count) + ".xml";
      if (const XmlFragment* f = statement.fragment()) {
        record_file(name, f->raw);
      } else if (const std::string* o = statement.opaque()) {
        record_file(name, *o);
      }
    }
  }

  result.ok = result.profile.passed && result.verification.ok && result.failures.empty();

  json report = json::parse(result.profile.to_json());
  json verification = json::parse(verification_to_json(result.verification));
  report["fixity"] = {{"components", verification["components"]}};
  if (verification.contains("package")) report["fixity"]["package"] = verification["package"];
  report["bitEquivalence"] = verification["bitEquivalence"];
  report["files"] = json::array();
  for (const auto& file : result.files) {
    report["files"].push_back({{"name", file.name}, {"sha256", file.sha256_hex}});
  }
  for (const auto& failure : result.failures) report["failures"].push_back(failure);
  report["ok"] = result.ok;
  result.report_json = report.dump(2);
  write_file_or(out_dir / "report.json", result.report_json, Errc::write_failed);
  return result;
}

}  // namespace didlpack
