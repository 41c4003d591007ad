#include "profile.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>

#include "base64.hpp"
#include "error.hpp"
#include "fixity.hpp"
#include "uri.hpp"

namespace didlpack {

const char* severity_name(Severity severity) {
  switch (severity) {
    case Severity::error: return "error";
    case Severity::warning: return "warning";
    case Severity::info: return "info";
  }
  return "error";
}

bool ProfileReport::has_rule(std::string_view rule_id) const {
  return std::any_of(findings.begin(), findings.end(),
                     [&](const Finding& f) { return f.rule_id == rule_id; });
}

std::string ProfileReport::to_json() const {
  nlohmann::json doc;
  doc["passed"] = passed;
  doc["findings"] = nlohmann::json::array();
  for (const auto& finding : findings) {
    doc["findings"].push_back({{"ruleId", finding.rule_id},
                               {"severity", severity_name(finding.severity)},
                               {"location", finding.location},
                               {"message", finding.message}});
  }
  return doc.dump(2);
}

namespace {

class ProfileChecker {
 public:
  ProfileChecker(const DidlDocument& doc, const NamespaceRegistry& registry, bool lenient)
      : doc_(doc), registry_(registry), lenient_(lenient) {}

  ProfileReport run() {
    check_document();
    for (std::size_t b = 0; b < doc_.info_blocks.size(); ++b) {
      check_fragment_typo(doc_.info_blocks[b], "/didlinfo/block[" + std::to_string(b + 1) + "]");
    }
    for (std::size_t i = 0; i < doc_.items.size(); ++i) {
      std::string base = doc_.items.size() == 1 ? "/item" : "/item[" + std::to_string(i + 1) + "]";
      check_item(doc_.items[i], base);
    }
    ProfileReport report;
    report.findings = std::move(findings_);
    report.passed = std::none_of(report.findings.begin(), report.findings.end(),
                                 [](const Finding& f) { return f.severity == Severity::error; });
    return report;
  }

 private:
  void add(const char* rule, Severity severity, std::string location, std::string message) {
    findings_.push_back({rule, severity, std::move(location), std::move(message)});
  }

  void check_document() {
    if (doc_.items.size() != 1) {
      add("PR-01", Severity::error, "/",
          "document has " + std::to_string(doc_.items.size()) + " top-level items, expected exactly 1");
    }
    if (doc_.document_id && !is_absolute_uri(*doc_.document_id)) {
      add("PR-11", Severity::error, "/",
          "DIDLDocumentId \"" + *doc_.document_id + "\" is not an absolute URI");
    }
  }

  void check_fragment_typo(const XmlFragment& fragment, const std::string& location) {
    if (fragment.dsig_typo) {
      add("PR-15", Severity::warning, location,
          "fragment binds the misspelled dsig namespace \"" + std::string(kDsigNsTypo) + "\"");
    }
  }

  void note_id(const std::optional<std::string>& id, const std::string& location) {
    if (!id) return;
    auto [it, inserted] = first_id_sites_.emplace(*id, location);
    if (!inserted) {
      add("PR-12", Severity::error, location,
          "id \"" + *id + "\" already used at " + it->second);
    }
  }

  void check_item(const Item& item, const std::string& base) {
    note_id(item.id, base);

    // PR-03: DII identifier present, non-blank, absolute.
    Severity pr03 = lenient_ ? Severity::warning : Severity::error;
    try {
      IdentifierLookup lookup = get_content_identifier(item, registry_);
      if (!is_absolute_uri(lookup.value)) {
        add("PR-03", pr03, base,
            "content identifier \"" + lookup.value + "\" is not an absolute URI");
      }
    } catch (const Error& e) {
      if (e.code() == Errc::missing_identifier) {
        add("PR-03", pr03, base, "item carries no dii:Identifier statement");
      } else if (e.code() == Errc::empty_identifier) {
        add("PR-03", pr03, base, "dii:Identifier value is blank");
      } else {
        throw;
      }
    }

    for (std::size_t d = 0; d < item.descriptors.size(); ++d) {
      const std::string dpath = base + "/descriptor[" + std::to_string(d + 1) + "]";
      check_descriptor(item.descriptors[d], dpath, /*item_level=*/true);
    }
    for (std::size_t c = 0; c < item.components.size(); ++c) {
      check_component(item.components[c], base + "/component[" + std::to_string(c + 1) + "]");
    }
    for (std::size_t n = 0; n < item.nested_items.size(); ++n) {
      std::string npath = base + "/item[" + std::to_string(n + 1) + "]";
      add("PR-02", Severity::error, npath, "nested items are not used by this profile");
      check_nested(item.nested_items[n], npath);
    }
  }

  // Nested items are already invalid; still surface deeper nesting and ids.
  void check_nested(const Item& item, const std::string& base) {
    note_id(item.id, base);
    for (std::size_t n = 0; n < item.nested_items.size(); ++n) {
      std::string npath = base + "/item[" + std::to_string(n + 1) + "]";
      add("PR-02", Severity::error, npath, "nested items are not used by this profile");
      check_nested(item.nested_items[n], npath);
    }
  }

  void check_descriptor(const Descriptor& descriptor, const std::string& base, bool item_level) {
    if (descriptor.contains_component) {
      add("PR-08", Severity::error, base,
          "descriptor contains a component; this profile allows statements only");
    }
    for (std::size_t s = 0; s < descriptor.statements.size(); ++s) {
      check_statement(descriptor.statements[s], base + "/statement[" + std::to_string(s + 1) + "]",
                      item_level);
    }
  }

  void check_statement(const Statement& statement, const std::string& base, bool item_level) {
    if (statement.is_xml_typed()) {
      const XmlFragment* fragment = statement.fragment();
      if (fragment == nullptr) {
        add("PR-08", Severity::error, base,
            "XML-typed statement content is not exactly one element");
      } else {
        if (fragment->root_namespace.empty()) {
          add("PR-08", Severity::error, base, "statement root element has no namespace");
        } else if (item_level &&
                   registry_.classify_namespace(fragment->root_namespace).kind ==
                       Kind::representation_info) {
          add("PR-09", Severity::warning, base,
              "representation information belongs at the component level");
        }
        check_fragment_typo(*fragment, base);
      }
    }
  }

  void check_component(const Component& component, const std::string& base) {
    note_id(component.id, base);
    if (component.resources.empty()) {
      add("PR-04", Severity::error, base, "component carries no resource");
    }
    for (std::size_t d = 0; d < component.descriptors.size(); ++d) {
      const Descriptor& descriptor = component.descriptors[d];
      const std::string dpath = base + "/descriptor[" + std::to_string(d + 1) + "]";
      check_descriptor(descriptor, dpath, /*item_level=*/false);
      for (std::size_t s = 0; s < descriptor.statements.size(); ++s) {
        const Statement& statement = descriptor.statements[s];
        if (statement.is_xml_typed() && statement.fragment() != nullptr &&
            registry_.classify_namespace(statement.fragment()->root_namespace).kind == Kind::fixity) {
          check_fixity_statement(statement, component,
                                 dpath + "/statement[" + std::to_string(s + 1) + "]");
        }
      }
    }
    if (component.resources.size() > 1) {
      add("PR-14", Severity::info, base,
          "component groups " + std::to_string(component.resources.size()) +
              " resources as bit-equivalent copies; run the dynamic bit-equivalence check");
    }
    for (std::size_t r = 0; r < component.resources.size(); ++r) {
      check_resource(component.resources[r], base + "/resource[" + std::to_string(r + 1) + "]");
    }
  }

  // PR-10: the minimal dsig subset plus reference/resource count equality.
  void check_fixity_statement(const Statement& statement, const Component& component,
                              const std::string& base) {
    SignatureInfo info;
    try {
      info = parse_signature(*statement.fragment());
    } catch (const Error& e) {
      add("PR-10", Severity::error, base, e.what());
      return;
    }
    if (!info.ignored_elements.empty()) {
      std::string names;
      for (const auto& name : info.ignored_elements) {
        if (!names.empty()) names += ", ";
        names += name;
      }
      add("PR-10", Severity::info, base,
          "signature elements outside the digest subset were ignored: " + names);
    }
    if (info.references.size() != component.resources.size()) {
      add("PR-10", Severity::error, base,
          "fixity statement has " + std::to_string(info.references.size()) +
              " reference(s) for " + std::to_string(component.resources.size()) + " resource(s)");
    }
    for (const auto& reference : info.references) {
      const AlgorithmInfo* algo = find_algorithm(reference.algorithm_uri);
      if (algo == nullptr) {
        add("PR-10", Severity::error, base,
            "digest algorithm \"" + reference.algorithm_uri + "\" is not in the registry");
        continue;
      }
      if (algo->verify_only) {
        add("PR-10", Severity::warning, base,
            "digest algorithm \"" + reference.algorithm_uri + "\" is deprecated (read-only)");
      }
      bool ok_b64 = base64_valid(reference.digest_b64);
      if (!ok_b64) {
        add("PR-10", Severity::error, base, "DigestValue is not valid base64");
      } else if (base64_decode(reference.digest_b64).size() != algo->digest_len) {
        add("PR-10", Severity::error, base,
            "DigestValue length does not match " + reference.algorithm_uri);
      }
    }
  }

  void check_resource(const Resource& resource, const std::string& base) {
    if (resource.mime_type.empty()) {
      add("PR-05", Severity::error, base, "resource without the mandatory mimeType");
    }
    bool has_ref = resource.ref.has_value();
    bool has_payload = resource.payload.has_value();
    if (has_ref == has_payload) {
      add("PR-06", Severity::error, base,
          has_ref ? "resource is both By Value and By Reference"
                  : "resource is neither By Value nor By Reference");
    }
    if (has_ref && !has_payload) {
      std::string scheme = uri_scheme(*resource.ref);
      if (scheme != "http" && scheme != "https" && scheme != "file") {
        add("PR-07", Severity::warning, base,
            "ref scheme \"" + scheme + "\" is outside http/https/file");
      }
    }
    if (has_payload && !base64_valid(*resource.payload)) {
      add("PR-13", Severity::error, base, "By Value payload does not decode as base64");
    }
  }

  const DidlDocument& doc_;
  const NamespaceRegistry& registry_;
  bool lenient_;
  std::vector<Finding> findings_;
  std::map<std::string, std::string> first_id_sites_;
};

}  // namespace

ProfileReport validate_profile(const DidlDocument& doc, const NamespaceRegistry& registry, bool lenient) {
  return ProfileChecker(doc, registry, lenient).run();
}

// ---------------------------------------------------------------------------
// Location paths

namespace {

struct PathSegment {
  std::string name;
  std::size_t index = 1;  // 1-based; default when no [i] is given
  bool indexed = false;
};

bool parse_path(const std::string& path, std::vector<PathSegment>& out) {
  if (path.empty() || path[0] != '/') return false;
  if (path == "/") return true;
  std::size_t pos = 1;
  while (pos < path.size()) {
    auto next = path.find('/', pos);
    std::string token = path.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    if (token.empty()) return false;
    PathSegment segment;
    auto bracket = token.find('[');
    if (bracket == std::string::npos) {
      segment.name = token;
    } else {
      if (token.back() != ']') return false;
      segment.name = token.substr(0, bracket);
      std::string digits = token.substr(bracket + 1, token.size() - bracket - 2);
      if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) return false;
      segment.index = std::stoul(digits);
      segment.indexed = true;
      if (segment.index == 0) return false;
    }
    out.push_back(std::move(segment));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return true;
}

}  // namespace

bool location_resolves(const DidlDocument& doc, const std::string& path) {
  std::vector<PathSegment> segments;
  if (!parse_path(path, segments)) return false;
  if (segments.empty()) return true;  // "/"

  std::size_t at = 0;
  if (segments[0].name == "didlinfo") {
    ++at;
    if (at == segments.size()) return true;
    if (segments[at].name != "block") return false;
    return segments[at].index <= doc.info_blocks.size() && at + 1 == segments.size();
  }

  if (segments[0].name != "item") return false;
  if (segments[0].index > doc.items.size()) return false;
  const Item* item = &doc.items[segments[0].index - 1];
  const Component* component = nullptr;
  const Descriptor* descriptor = nullptr;
  ++at;

  for (; at < segments.size(); ++at) {
    const PathSegment& seg = segments[at];
    bool last = at + 1 == segments.size();
    if (seg.name == "descriptor") {
      if (descriptor != nullptr) return false;
      const auto& descriptors = component ? component->descriptors : item->descriptors;
      if (seg.index > descriptors.size()) return false;
      descriptor = &descriptors[seg.index - 1];
    } else if (seg.name == "statement") {
      if (descriptor == nullptr || seg.index > descriptor->statements.size()) return false;
      return last;
    } else if (seg.name == "component") {
      if (component != nullptr || descriptor != nullptr) return false;
      if (seg.index > item->components.size()) return false;
      component = &item->components[seg.index - 1];
    } else if (seg.name == "resource") {
      if (component == nullptr || descriptor != nullptr) return false;
      if (seg.index > component->resources.size()) return false;
      return last;
    } else if (seg.name == "item") {
      if (component != nullptr || descriptor != nullptr) return false;
      if (seg.index > item->nested_items.size()) return false;
      item = &item->nested_items[seg.index - 1];
    } else {
      return false;
    }
  }
  return true;
}

}  // namespace didlpack
