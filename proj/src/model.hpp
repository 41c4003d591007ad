#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "xml_reader.hpp"

namespace didlpack {

// One embedded foreign-namespace element, kept byte-exact. The raw bytes
// are namespace-self-contained: every prefix the subtree uses is declared
// within it.
struct XmlFragment {
  std::string raw;
  std::string root_namespace;  // normalized (dsig typo corrected)
  std::string root_local_name;
  bool dsig_typo = false;

  bool operator==(const XmlFragment&) const = default;
};

struct Statement {
  std::string mime_type;
  // XML-typed statements hold a fragment; everything else holds the raw
  // element-content bytes, emitted verbatim on serialization.
  std::variant<XmlFragment, std::string> content;

  bool is_xml_typed() const;
  const XmlFragment* fragment() const { return std::get_if<XmlFragment>(&content); }
  const std::string* opaque() const { return std::get_if<std::string>(&content); }

  static Statement xml(std::string mime_type, XmlFragment fragment);
  // Escapes the text so that it is safe as element content.
  static Statement opaque_text(std::string mime_type, std::string_view text);

  bool operator==(const Statement&) const = default;
};

struct Descriptor {
  std::vector<Statement> statements;
  // The DID abstract model lets a descriptor carry a component; this
  // profile rejects that shape (flagged by PR-08).
  bool contains_component = false;

  bool operator==(const Descriptor&) const = default;
};

struct Resource {
  std::string mime_type;
  std::optional<std::string> ref;      // By Reference target URI
  std::optional<std::string> payload;  // By Value base64 text
  std::vector<std::string> content_encodings;  // outermost first

  bool by_reference() const { return ref.has_value() && !payload.has_value(); }
  bool by_value() const { return payload.has_value() && !ref.has_value(); }

  static Resource by_ref(std::string mime_type, std::string uri,
                         std::vector<std::string> encodings = {});
  static Resource by_val(std::string mime_type, std::string payload_b64,
                         std::vector<std::string> encodings = {});

  bool operator==(const Resource&) const = default;
};

struct Component {
  std::optional<std::string> id;
  std::vector<Descriptor> descriptors;
  std::vector<Resource> resources;

  bool operator==(const Component&) const = default;
};

struct Item {
  std::optional<std::string> id;
  std::vector<Descriptor> descriptors;
  std::vector<Component> components;
  // Nested items violate the profile (PR-02) but stay representable so
  // validation can point at them.
  std::vector<Item> nested_items;

  bool operator==(const Item&) const = default;
};

// The Information Package. A profile-valid document has exactly one
// top-level item; the vector representation keeps shape violations
// expressible for the validator.
struct DidlDocument {
  std::optional<std::string> document_id;
  std::vector<XmlFragment> info_blocks;
  std::vector<Item> items;

  Item& item();
  const Item& item() const;

  bool operator==(const DidlDocument&) const = default;
};

// ---------------------------------------------------------------------------
// Namespace-driven semantics

enum class Kind { identifier, representation_info, fixity, preservation, other };

struct SemanticKind {
  Kind kind = Kind::other;
  std::string ns;  // the namespace that produced the classification

  static SemanticKind identifier() { return {Kind::identifier, kDiiNs}; }
  static SemanticKind representation_info() { return {Kind::representation_info, kJhoveNs}; }
  static SemanticKind fixity() { return {Kind::fixity, kDsigNs}; }
  static SemanticKind preservation(std::string ns = "") { return {Kind::preservation, std::move(ns)}; }
  static SemanticKind other(std::string ns) { return {Kind::other, std::move(ns)}; }

  // A query of kind `other` matches only its exact namespace; the named
  // kinds match regardless of the ns field.
  bool matches(const SemanticKind& classified) const {
    if (kind != classified.kind) return false;
    return kind != Kind::other || ns == classified.ns;
  }

  bool operator==(const SemanticKind&) const = default;
};

const char* kind_name(Kind kind);

// Maps statement root namespaces to semantic kinds. The built-in table
// carries the DII/JHOVE/dsig namespaces plus a substring marker for
// PREMIS; a registry file can override or extend it with lines of
// `kind<ws>namespace-URI` (kinds: identifier, representation, fixity,
// preservation, other) or `preservation-marker<ws>token`.
class NamespaceRegistry {
 public:
  NamespaceRegistry();

  void set(Kind kind, std::string ns_uri);
  void add_preservation_marker(std::string token);
  void load(std::string_view text, const std::string& origin);
  void load_file(const std::string& path);

  SemanticKind classify_namespace(const std::string& ns) const;

  static const NamespaceRegistry& builtin();

 private:
  std::vector<std::pair<std::string, Kind>> exact_;  // later entries win
  std::vector<std::string> preservation_markers_;    // case-insensitive substrings
};

// Classification is a pure function of the statement's root namespace.
// Raises Errc::not_xml when the statement is not XML-typed or carries no
// well-formed single-element fragment.
SemanticKind classify_statement(const Statement& statement,
                                const NamespaceRegistry& registry = NamespaceRegistry::builtin());

struct Warning {
  std::string code;
  std::string location;
  std::string message;

  bool operator==(const Warning&) const = default;
};

struct IdentifierLookup {
  std::string value;
  std::vector<Warning> warnings;  // W-DUPLICATE-IDENTIFIER entries
};

// First dii:Identifier value in document order among the item's
// descriptors, whitespace-trimmed. Raises Errc::missing_identifier /
// Errc::empty_identifier.
IdentifierLookup get_content_identifier(const Item& item,
                                        const NamespaceRegistry& registry = NamespaceRegistry::builtin());

// Statements of the given kind at one level, in document order; the item
// overload does not descend into components.
std::vector<const Statement*> find_statements(const Item& item, const SemanticKind& kind,
                                              const NamespaceRegistry& registry = NamespaceRegistry::builtin());
std::vector<const Statement*> find_statements(const Component& component, const SemanticKind& kind,
                                              const NamespaceRegistry& registry = NamespaceRegistry::builtin());

// ---------------------------------------------------------------------------
// Model invariants

struct InvariantFailure {
  std::string invariant;
  std::string location;
  std::string message;
};

// Pure validate pass over a constructed value; no I/O.
std::vector<InvariantFailure> check_invariants(const DidlDocument& doc);

// Escapes text for use as element content or a double-quoted attribute
// value under the canonical rules: & < > " and control characters become
// decimal character references.
std::string xml_escape(std::string_view text);

// True when the MIME media type is application/xml or text/xml.
bool is_xml_mime_type(std::string_view mime_type);

}  // namespace didlpack
