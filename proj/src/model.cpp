#include "model.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "base64.hpp"
#include "error.hpp"
#include "uri.hpp"

namespace didlpack {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

bool is_xml_mime_type(std::string_view mime_type) {
  auto semi = mime_type.find(';');
  std::string media = lowercase(trim(mime_type.substr(0, semi)));
  return media == "application/xml" || media == "text/xml";
}

std::string xml_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    unsigned char u = static_cast<unsigned char>(c);
    switch (c) {
      case '&': out += "&#38;"; break;
      case '<': out += "&#60;"; break;
      case '>': out += "&#62;"; break;
      case '"': out += "&#34;"; break;
      default:
        if (u < 0x20) {
          out += "&#" + std::to_string(u) + ";";
        } else {
          out += c;
        }
    }
  }
  return out;
}

bool Statement::is_xml_typed() const { return is_xml_mime_type(mime_type); }

Statement Statement::xml(std::string mime_type, XmlFragment fragment) {
  return Statement{std::move(mime_type), std::move(fragment)};
}

Statement Statement::opaque_text(std::string mime_type, std::string_view text) {
  return Statement{std::move(mime_type), xml_escape(text)};
}

Resource Resource::by_ref(std::string mime_type, std::string uri, std::vector<std::string> encodings) {
  Resource r;
  r.mime_type = std::move(mime_type);
  r.ref = std::move(uri);
  r.content_encodings = std::move(encodings);
  return r;
}

Resource Resource::by_val(std::string mime_type, std::string payload_b64, std::vector<std::string> encodings) {
  Resource r;
  r.mime_type = std::move(mime_type);
  r.payload = std::move(payload_b64);
  r.content_encodings = std::move(encodings);
  return r;
}

Item& DidlDocument::item() {
  if (items.empty()) raise(Errc::invariant_violation, "document has no top-level item");
  return items.front();
}

const Item& DidlDocument::item() const {
  if (items.empty()) raise(Errc::invariant_violation, "document has no top-level item");
  return items.front();
}

const char* kind_name(Kind kind) {
  switch (kind) {
    case Kind::identifier: return "identifier";
    case Kind::representation_info: return "representation";
    case Kind::fixity: return "fixity";
    case Kind::preservation: return "preservation";
    case Kind::other: return "other";
  }
  return "other";
}

// ---------------------------------------------------------------------------
// NamespaceRegistry

NamespaceRegistry::NamespaceRegistry() {
  set(Kind::identifier, kDiiNs);
  set(Kind::representation_info, kJhoveNs);
  set(Kind::fixity, kDsigNs);
  add_preservation_marker("premis");
}

void NamespaceRegistry::set(Kind kind, std::string ns_uri) {
  exact_.emplace_back(std::move(ns_uri), kind);
}

void NamespaceRegistry::add_preservation_marker(std::string token) {
  preservation_markers_.push_back(lowercase(token));
}

void NamespaceRegistry::load(std::string_view text, const std::string& origin) {
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::string entry = trim(line);
    if (entry.empty() || entry[0] == '#') continue;
    std::istringstream fields(entry);
    std::string kind_token, value;
    fields >> kind_token >> value;
    if (value.empty()) {
      raise(Errc::invalid_argument,
            origin + ":" + std::to_string(line_no) + ": registry line needs `kind namespace-URI`");
    }
    if (kind_token == "identifier") {
      set(Kind::identifier, value);
    } else if (kind_token == "representation") {
      set(Kind::representation_info, value);
    } else if (kind_token == "fixity") {
      set(Kind::fixity, value);
    } else if (kind_token == "preservation") {
      set(Kind::preservation, value);
    } else if (kind_token == "other") {
      set(Kind::other, value);
    } else if (kind_token == "preservation-marker") {
      add_preservation_marker(value);
    } else {
      raise(Errc::invalid_argument,
            origin + ":" + std::to_string(line_no) + ": unknown registry kind \"" + kind_token + "\"");
    }
  }
}

void NamespaceRegistry::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io_error, "cannot open namespace registry " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  load(buf.str(), path);
}

SemanticKind NamespaceRegistry::classify_namespace(const std::string& ns) const {
  for (auto it = exact_.rbegin(); it != exact_.rend(); ++it) {
    if (it->first == ns) return {it->second, ns};
  }
  std::string lowered = lowercase(ns);
  for (const auto& marker : preservation_markers_) {
    if (lowered.find(marker) != std::string::npos) return {Kind::preservation, ns};
  }
  return {Kind::other, ns};
}

const NamespaceRegistry& NamespaceRegistry::builtin() {
  static const NamespaceRegistry instance;
  return instance;
}

// ---------------------------------------------------------------------------
// Semantic accessors

SemanticKind classify_statement(const Statement& statement, const NamespaceRegistry& registry) {
  if (!statement.is_xml_typed()) {
    raise(Errc::not_xml, "statement mime type \"" + statement.mime_type + "\" is not XML");
  }
  const XmlFragment* fragment = statement.fragment();
  if (fragment == nullptr) {
    raise(Errc::not_xml, "XML-typed statement does not hold a single well-formed element");
  }
  return registry.classify_namespace(fragment->root_namespace);
}

namespace {

// Depth-first search for the first dii:Identifier element.
const XmlElement* find_identifier_element(const XmlElement& el) {
  if (el.is(kDiiNs, "Identifier")) return &el;
  for (const auto& node : el.children) {
    if (const auto* child = std::get_if<XmlElement>(&node)) {
      if (const XmlElement* hit = find_identifier_element(*child)) return hit;
    }
  }
  return nullptr;
}

bool statement_has_kind(const Statement& statement, const SemanticKind& want,
                        const NamespaceRegistry& registry) {
  if (!statement.is_xml_typed() || statement.fragment() == nullptr) return false;
  return want.matches(registry.classify_namespace(statement.fragment()->root_namespace));
}

}  // namespace

IdentifierLookup get_content_identifier(const Item& item, const NamespaceRegistry& registry) {
  IdentifierLookup result;
  bool found = false;
  for (std::size_t d = 0; d < item.descriptors.size(); ++d) {
    const Descriptor& descriptor = item.descriptors[d];
    for (std::size_t s = 0; s < descriptor.statements.size(); ++s) {
      const Statement& statement = descriptor.statements[s];
      if (!statement_has_kind(statement, SemanticKind::identifier(), registry)) continue;
      XmlElement tree = xml_parse_fragment(statement.fragment()->raw);
      const XmlElement* id_el = find_identifier_element(tree);
      if (id_el == nullptr) continue;
      std::string value = trim(id_el->text());
      std::string location = "/item/descriptor[" + std::to_string(d + 1) + "]/statement[" +
                             std::to_string(s + 1) + "]";
      if (!found) {
        if (value.empty()) {
          raise(Errc::empty_identifier, "dii:Identifier at " + location + " is blank");
        }
        result.value = std::move(value);
        found = true;
      } else {
        result.warnings.push_back({"W-DUPLICATE-IDENTIFIER", location,
                                   "additional dii:Identifier \"" + value + "\" ignored"});
      }
    }
  }
  if (!found) raise(Errc::missing_identifier, "item carries no dii:Identifier statement");
  return result;
}

std::vector<const Statement*> find_statements(const Item& item, const SemanticKind& kind,
                                              const NamespaceRegistry& registry) {
  std::vector<const Statement*> out;
  for (const auto& descriptor : item.descriptors) {
    for (const auto& statement : descriptor.statements) {
      if (statement_has_kind(statement, kind, registry)) out.push_back(&statement);
    }
  }
  return out;
}

std::vector<const Statement*> find_statements(const Component& component, const SemanticKind& kind,
                                              const NamespaceRegistry& registry) {
  std::vector<const Statement*> out;
  for (const auto& descriptor : component.descriptors) {
    for (const auto& statement : descriptor.statements) {
      if (statement_has_kind(statement, kind, registry)) out.push_back(&statement);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Invariants

namespace {

class InvariantChecker {
 public:
  explicit InvariantChecker(const DidlDocument& doc) : doc_(doc) {}

  std::vector<InvariantFailure> run() {
    if (doc_.document_id && !is_absolute_uri(*doc_.document_id)) {
      add("document-id-absolute", "/", "DIDLDocumentId \"" + *doc_.document_id + "\" is not an absolute URI");
    }
    if (doc_.items.size() != 1) {
      add("one-top-level-item", "/",
          "document has " + std::to_string(doc_.items.size()) + " top-level items, expected 1");
    }
    for (std::size_t b = 0; b < doc_.info_blocks.size(); ++b) {
      check_fragment(doc_.info_blocks[b], "/didlinfo/block[" + std::to_string(b + 1) + "]");
    }
    for (std::size_t i = 0; i < doc_.items.size(); ++i) {
      std::string base = doc_.items.size() == 1 ? "/item" : "/item[" + std::to_string(i + 1) + "]";
      check_item(doc_.items[i], base);
    }
    return std::move(failures_);
  }

 private:
  void add(std::string invariant, std::string location, std::string message) {
    failures_.push_back({std::move(invariant), std::move(location), std::move(message)});
  }

  void note_id(const std::optional<std::string>& id, const std::string& location) {
    if (!id) return;
    if (id->empty()) {
      add("id-non-empty", location, "empty id attribute");
      return;
    }
    if (!seen_ids_.insert(*id).second) {
      add("id-unique", location, "duplicate id \"" + *id + "\"");
    }
  }

  void check_item(const Item& item, const std::string& base) {
    note_id(item.id, base);
    if (!item.nested_items.empty()) {
      add("no-nested-items", base,
          std::to_string(item.nested_items.size()) + " nested item(s) present");
    }
    for (std::size_t d = 0; d < item.descriptors.size(); ++d) {
      check_descriptor(item.descriptors[d], base + "/descriptor[" + std::to_string(d + 1) + "]");
    }
    for (std::size_t c = 0; c < item.components.size(); ++c) {
      check_component(item.components[c], base + "/component[" + std::to_string(c + 1) + "]");
    }
    for (std::size_t n = 0; n < item.nested_items.size(); ++n) {
      check_item(item.nested_items[n], base + "/item[" + std::to_string(n + 1) + "]");
    }
  }

  void check_descriptor(const Descriptor& descriptor, const std::string& base) {
    if (descriptor.statements.empty()) {
      add("descriptor-non-empty", base, "descriptor carries no statement");
    }
    if (descriptor.contains_component) {
      add("descriptor-statement-only", base, "descriptor contains a component");
    }
    for (std::size_t s = 0; s < descriptor.statements.size(); ++s) {
      check_statement(descriptor.statements[s], base + "/statement[" + std::to_string(s + 1) + "]");
    }
  }

  void check_statement(const Statement& statement, const std::string& base) {
    if (statement.mime_type.empty()) {
      add("statement-mime-type", base, "statement without mimeType");
    }
    if (statement.is_xml_typed()) {
      if (const XmlFragment* f = statement.fragment()) {
        check_fragment(*f, base);
        if (f->root_namespace.empty()) {
          add("statement-root-namespaced", base, "statement root element has no namespace");
        }
      } else {
        add("statement-xml-fragment", base, "XML-typed statement content is not a single element");
      }
    }
  }

  void check_fragment(const XmlFragment& fragment, const std::string& base) {
    try {
      XmlElement root = xml_parse_fragment(fragment.raw);
      if (root.ns != fragment.root_namespace || root.local != fragment.root_local_name) {
        add("fragment-root-consistent", base,
            "fragment bytes declare {" + root.ns + "}" + root.local + " but the value claims {" +
                fragment.root_namespace + "}" + fragment.root_local_name);
      }
    } catch (const Error& e) {
      add("fragment-well-formed", base, std::string("fragment does not parse: ") + e.what());
    }
  }

  void check_component(const Component& component, const std::string& base) {
    note_id(component.id, base);
    if (component.resources.empty()) {
      add("component-has-resource", base, "component carries no resource");
    }
    for (std::size_t d = 0; d < component.descriptors.size(); ++d) {
      check_descriptor(component.descriptors[d], base + "/descriptor[" + std::to_string(d + 1) + "]");
    }
    for (std::size_t r = 0; r < component.resources.size(); ++r) {
      check_resource(component.resources[r], base + "/resource[" + std::to_string(r + 1) + "]");
    }
  }

  void check_resource(const Resource& resource, const std::string& base) {
    if (resource.mime_type.empty()) {
      add("resource-mime-type", base, "resource without mimeType");
    }
    if (resource.ref.has_value() == resource.payload.has_value()) {
      add("resource-provision", base,
          resource.ref ? "resource is both By Value and By Reference" : "resource has no provision");
    }
    if (resource.payload && !base64_valid(*resource.payload)) {
      add("resource-payload-base64", base, "By Value payload is not valid base64");
    }
    for (const auto& enc : resource.content_encodings) {
      if (enc.empty() || enc.find(' ') != std::string::npos) {
        add("content-encoding-token", base, "malformed contentEncoding token");
      }
    }
  }

  const DidlDocument& doc_;
  std::vector<InvariantFailure> failures_;
  std::set<std::string> seen_ids_;
};

}  // namespace

std::vector<InvariantFailure> check_invariants(const DidlDocument& doc) {
  return InvariantChecker(doc).run();
}

}  // namespace didlpack
