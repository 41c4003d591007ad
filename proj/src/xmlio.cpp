// DIDL byte-level parsing and deterministic serialization.
//
// Canonical form: UTF-8 without BOM; `<?xml version="1.0"
// encoding="UTF-8"?>` plus one line feed; fixed `didl` prefix declared
// once on the root; no whitespace between DIDL-level elements;
// attributes sorted by (namespace URI, local name) and double-quoted;
// & < > " and control characters as decimal character references;
// statement and DIDLInfo fragments emitted verbatim from stored bytes;
// childless elements self-closing.

#include "xmlio.hpp"

#include <algorithm>

#include "error.hpp"

namespace didlpack {

namespace {

bool ws_only(const std::string& text) {
  return std::all_of(text.begin(), text.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r';
  });
}

// ---------------------------------------------------------------------------
// Parsing

class DidlBuilder {
 public:
  DidlBuilder(std::string_view src, std::vector<Warning>& warnings)
      : src_(src), warnings_(warnings) {}

  DidlDocument build(const XmlElement& root) {
    if (!root.is(kDidlNs, "DIDL")) {
      raise(Errc::not_didl,
            "root element is {" + root.ns + "}" + root.local + ", expected {" +
                std::string(kDidlNs) + "}DIDL",
            xml_position(src_, root.begin));
    }
    DidlDocument doc;
    for (const auto& attr : root.attributes) {
      if (attr.ns.empty() && attr.local == "DIDLDocumentId") {
        doc.document_id = attr.value;
      } else {
        ignored_attr(attr, "/");
      }
    }
    bool seen_item = false;
    bool seen_info = false;
    for (const auto& node : root.children) {
      if (const auto* text = std::get_if<XmlText>(&node)) {
        require_ws(*text, root, "DIDL");
        continue;
      }
      const auto& el = std::get<XmlElement>(node);
      if (el.is(kDidlNs, "DIDLInfo")) {
        if (seen_info) shape_error(el, "multiple DIDLInfo elements");
        if (seen_item) shape_error(el, "DIDLInfo must precede the Item");
        seen_info = true;
        build_info_blocks(el, doc);
      } else if (el.is(kDidlNs, "Item")) {
        seen_item = true;
        std::string path =
            root_item_count(root) > 1 ? "/item[" + std::to_string(doc.items.size() + 1) + "]" : "/item";
        doc.items.push_back(build_item(el, path));
      } else {
        shape_error(el, "unsupported document-level element {" + el.ns + "}" + el.local);
      }
    }
    if (doc.items.size() != 1) {
      raise(Errc::profile_shape,
            "document declares " + std::to_string(doc.items.size()) + " top-level Items, expected exactly 1",
            xml_position(src_, root.begin));
    }
    return doc;
  }

 private:
  static std::size_t root_item_count(const XmlElement& root) {
    std::size_t n = 0;
    for (const auto& node : root.children) {
      if (const auto* el = std::get_if<XmlElement>(&node)) {
        if (el->is(kDidlNs, "Item")) ++n;
      }
    }
    return n;
  }

  [[noreturn]] void shape_error(const XmlElement& el, const std::string& what) {
    raise(Errc::profile_shape, what, xml_position(src_, el.begin));
  }

  void require_ws(const XmlText& text, const XmlElement& parent, const char* where) {
    if (!ws_only(text.value)) {
      raise(Errc::profile_shape, std::string("unexpected text content inside ") + where,
            xml_position(src_, parent.begin));
    }
  }

  void ignored_attr(const XmlAttr& attr, const std::string& path) {
    warnings_.push_back({"W-IGNORED-ATTR", path,
                         "attribute " + (attr.prefix.empty() ? attr.local : attr.prefix + ":" + attr.local) +
                             " is not part of the profile and was dropped"});
  }

  void build_info_blocks(const XmlElement& info, DidlDocument& doc) {
    for (const auto& attr : info.attributes) ignored_attr(attr, "/didlinfo");
    for (const auto& node : info.children) {
      if (const auto* text = std::get_if<XmlText>(&node)) {
        require_ws(*text, info, "DIDLInfo");
        continue;
      }
      const auto& el = std::get<XmlElement>(node);
      std::string path = "/didlinfo/block[" + std::to_string(doc.info_blocks.size() + 1) + "]";
      doc.info_blocks.push_back(make_fragment(el, path));
    }
  }

  Item build_item(const XmlElement& item_el, const std::string& path) {
    Item item;
    for (const auto& attr : item_el.attributes) {
      if (attr.ns.empty() && attr.local == "id") {
        item.id = attr.value;
      } else {
        ignored_attr(attr, path);
      }
    }
    for (const auto& node : item_el.children) {
      if (const auto* text = std::get_if<XmlText>(&node)) {
        require_ws(*text, item_el, "Item");
        continue;
      }
      const auto& el = std::get<XmlElement>(node);
      if (el.is(kDidlNs, "Descriptor")) {
        item.descriptors.push_back(
            build_descriptor(el, path + "/descriptor[" + std::to_string(item.descriptors.size() + 1) + "]"));
      } else if (el.is(kDidlNs, "Component")) {
        item.components.push_back(
            build_component(el, path + "/component[" + std::to_string(item.components.size() + 1) + "]"));
      } else if (el.is(kDidlNs, "Item")) {
        item.nested_items.push_back(
            build_item(el, path + "/item[" + std::to_string(item.nested_items.size() + 1) + "]"));
      } else {
        shape_error(el, "unsupported element {" + el.ns + "}" + el.local + " inside Item");
      }
    }
    return item;
  }

  Descriptor build_descriptor(const XmlElement& desc_el, const std::string& path) {
    Descriptor descriptor;
    for (const auto& attr : desc_el.attributes) ignored_attr(attr, path);
    for (const auto& node : desc_el.children) {
      if (const auto* text = std::get_if<XmlText>(&node)) {
        require_ws(*text, desc_el, "Descriptor");
        continue;
      }
      const auto& el = std::get<XmlElement>(node);
      if (el.is(kDidlNs, "Statement")) {
        descriptor.statements.push_back(
            build_statement(el, path + "/statement[" + std::to_string(descriptor.statements.size() + 1) + "]"));
      } else if (el.is(kDidlNs, "Component")) {
        descriptor.contains_component = true;
      } else {
        shape_error(el, "unsupported element {" + el.ns + "}" + el.local + " inside Descriptor");
      }
    }
    return descriptor;
  }

  Statement build_statement(const XmlElement& stmt_el, const std::string& path) {
    Statement statement;
    for (const auto& attr : stmt_el.attributes) {
      if (attr.ns.empty() && attr.local == "mimeType") {
        statement.mime_type = attr.value;
      } else {
        ignored_attr(attr, path);
      }
    }
    const XmlElement* only_element = nullptr;
    bool extra_content = false;
    for (const auto& node : stmt_el.children) {
      if (const auto* text = std::get_if<XmlText>(&node)) {
        if (!ws_only(text->value)) extra_content = true;
        continue;
      }
      const auto& el = std::get<XmlElement>(node);
      if (only_element == nullptr) {
        only_element = &el;
      } else {
        extra_content = true;
      }
    }
    if (statement.is_xml_typed() && only_element != nullptr && !extra_content) {
      statement.content = make_fragment(*only_element, path);
    } else {
      // Verbatim element content; for XML-typed statements this shape is
      // what PR-08 reports.
      for (const auto& node : stmt_el.children) {
        if (const auto* el = std::get_if<XmlElement>(&node)) {
          check_opaque_markup(*el, path);
        }
      }
      statement.content =
          std::string(src_.substr(stmt_el.inner_begin, stmt_el.inner_end - stmt_el.inner_begin));
    }
    return statement;
  }

  // Opaque statement content is re-emitted verbatim, so any namespace it
  // needs from outside the statement would go missing on reparse. The
  // root `didl` binding is the one canonical serialization guarantees.
  void check_opaque_markup(const XmlElement& el, const std::string& path) {
    for (const auto& nb : el.inherited) {
      if (nb.prefix == "didl" && nb.source_uri == kDidlNs) continue;
      raise(Errc::profile_shape,
            "statement content at " + path + " uses namespace declarations from outside the statement",
            xml_position(src_, el.begin));
    }
  }

  Component build_component(const XmlElement& comp_el, const std::string& path) {
    Component component;
    for (const auto& attr : comp_el.attributes) {
      if (attr.ns.empty() && attr.local == "id") {
        component.id = attr.value;
      } else {
        ignored_attr(attr, path);
      }
    }
    for (const auto& node : comp_el.children) {
      if (const auto* text = std::get_if<XmlText>(&node)) {
        require_ws(*text, comp_el, "Component");
        continue;
      }
      const auto& el = std::get<XmlElement>(node);
      if (el.is(kDidlNs, "Descriptor")) {
        component.descriptors.push_back(build_descriptor(
            el, path + "/descriptor[" + std::to_string(component.descriptors.size() + 1) + "]"));
      } else if (el.is(kDidlNs, "Resource")) {
        component.resources.push_back(build_resource(
            el, path + "/resource[" + std::to_string(component.resources.size() + 1) + "]"));
      } else {
        shape_error(el, "unsupported element {" + el.ns + "}" + el.local + " inside Component");
      }
    }
    return component;
  }

  Resource build_resource(const XmlElement& res_el, const std::string& path) {
    Resource resource;
    bool by_value = false;
    for (const auto& attr : res_el.attributes) {
      if (!attr.ns.empty()) {
        ignored_attr(attr, path);
      } else if (attr.local == "mimeType") {
        resource.mime_type = attr.value;
      } else if (attr.local == "ref") {
        resource.ref = attr.value;
      } else if (attr.local == "encoding") {
        if (attr.value != "base64") {
          shape_error(res_el, "unsupported resource encoding \"" + attr.value + "\"");
        }
        by_value = true;
      } else if (attr.local == "contentEncoding") {
        std::size_t start = 0;
        while (start <= attr.value.size()) {
          auto space = attr.value.find(' ', start);
          std::string token = attr.value.substr(start, space - start);
          if (!token.empty()) resource.content_encodings.push_back(token);
          if (space == std::string::npos) break;
          start = space + 1;
        }
      } else {
        ignored_attr(attr, path);
      }
    }
    std::string text;
    for (const auto& node : res_el.children) {
      if (const auto* t = std::get_if<XmlText>(&node)) {
        text += t->value;
      } else {
        shape_error(res_el, "Resource content must be character data");
      }
    }
    if (by_value) {
      resource.payload = std::move(text);
    } else if (!ws_only(text)) {
      shape_error(res_el, "Resource text content requires encoding=\"base64\"");
    }
    return resource;
  }

  XmlFragment make_fragment(const XmlElement& el, const std::string& path) {
    XmlFragment fragment;
    fragment.root_namespace = el.ns;
    fragment.root_local_name = el.local;
    fragment.dsig_typo = el.dsig_typo;
    if (el.inherited.empty()) {
      fragment.raw = std::string(src_.substr(el.begin, el.end - el.begin));
    } else {
      auto needs = el.inherited;
      std::sort(needs.begin(), needs.end(),
                [](const InheritedBinding& a, const InheritedBinding& b) { return a.prefix < b.prefix; });
      std::string decls;
      std::string names;
      for (const auto& nb : needs) {
        decls += " xmlns";
        if (!nb.prefix.empty()) decls += ":" + nb.prefix;
        decls += "=\"" + xml_escape(nb.source_uri) + "\"";
        if (!names.empty()) names += ", ";
        names += nb.prefix.empty() ? "(default)" : nb.prefix;
      }
      std::size_t insert_at = el.self_closing ? el.open_end - 2 : el.open_end - 1;
      fragment.raw = std::string(src_.substr(el.begin, insert_at - el.begin)) + decls +
                     std::string(src_.substr(insert_at, el.end - insert_at));
      warnings_.push_back({"W-NS-INHERITED", path,
                           "namespace declaration(s) for " + names +
                               " copied onto the fragment root to keep it self-contained"});
    }
    if (fragment.dsig_typo) {
      warnings_.push_back({"W-DSIG-TYPO", path,
                           "misspelled dsig namespace \"" + std::string(kDsigNsTypo) +
                               "\" accepted as \"" + std::string(kDsigNs) + "\""});
    }
    return fragment;
  }

  std::string_view src_;
  std::vector<Warning>& warnings_;
};

// ---------------------------------------------------------------------------
// Serialization

class Canonicalizer {
 public:
  explicit Canonicalizer(const DidlDocument& doc, bool exclude_info) : doc_(doc), exclude_info_(exclude_info) {}

  std::string run() {
    out_ = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    std::vector<Attr> attrs;
    if (doc_.document_id) attrs.push_back({"", "DIDLDocumentId", "DIDLDocumentId", *doc_.document_id});
    attrs.push_back({"http://www.w3.org/2000/xmlns/", "didl", "xmlns:didl", kDidlNs});
    open("didl:DIDL", attrs);
    if (!exclude_info_ && !doc_.info_blocks.empty()) {
      open("didl:DIDLInfo", {});
      for (const auto& block : doc_.info_blocks) out_ += block.raw;
      close("didl:DIDLInfo");
    }
    for (const auto& item : doc_.items) emit_item(item);
    close("didl:DIDL");
    return std::move(out_);
  }

 private:
  struct Attr {
    std::string ns;
    std::string local;
    std::string qname;
    std::string value;
  };

  void open(const std::string& qname, std::vector<Attr> attrs) {
    content();
    std::stable_sort(attrs.begin(), attrs.end(), [](const Attr& a, const Attr& b) {
      return std::tie(a.ns, a.local) < std::tie(b.ns, b.local);
    });
    out_ += "<" + qname;
    for (const auto& attr : attrs) {
      out_ += " " + attr.qname + "=\"" + xml_escape(attr.value) + "\"";
    }
    open_pending_ = true;
    pending_qname_ = qname;
  }

  // Content writers call this to force the '>' of a pending open tag.
  void content() {
    if (open_pending_) {
      out_ += ">";
      open_pending_ = false;
    }
  }

  void close(const std::string& qname) {
    if (open_pending_ && pending_qname_ == qname) {
      out_ += "/>";
      open_pending_ = false;
      return;
    }
    content();
    out_ += "</" + qname + ">";
  }

  void raw(const std::string& bytes) {
    content();
    out_ += bytes;
  }

  void emit_item(const Item& item) {
    std::vector<Attr> attrs;
    if (item.id) attrs.push_back({"", "id", "id", *item.id});
    open("didl:Item", attrs);
    for (const auto& d : item.descriptors) emit_descriptor(d);
    for (const auto& c : item.components) emit_component(c);
    close("didl:Item");
  }

  void emit_descriptor(const Descriptor& descriptor) {
    open("didl:Descriptor", {});
    for (const auto& s : descriptor.statements) emit_statement(s);
    close("didl:Descriptor");
  }

  void emit_statement(const Statement& statement) {
    open("didl:Statement", {{"", "mimeType", "mimeType", statement.mime_type}});
    if (const XmlFragment* f = statement.fragment()) {
      raw(f->raw);
    } else if (const std::string* o = statement.opaque(); o != nullptr && !o->empty()) {
      raw(*o);
    }
    close("didl:Statement");
  }

  void emit_component(const Component& component) {
    std::vector<Attr> attrs;
    if (component.id) attrs.push_back({"", "id", "id", *component.id});
    open("didl:Component", attrs);
    for (const auto& d : component.descriptors) emit_descriptor(d);
    for (const auto& r : component.resources) emit_resource(r);
    close("didl:Component");
  }

  void emit_resource(const Resource& resource) {
    std::vector<Attr> attrs;
    attrs.push_back({"", "mimeType", "mimeType", resource.mime_type});
    if (!resource.content_encodings.empty()) {
      std::string joined;
      for (const auto& enc : resource.content_encodings) {
        if (!joined.empty()) joined += ' ';
        joined += enc;
      }
      attrs.push_back({"", "contentEncoding", "contentEncoding", joined});
    }
    if (resource.payload) attrs.push_back({"", "encoding", "encoding", "base64"});
    if (resource.ref) attrs.push_back({"", "ref", "ref", *resource.ref});
    open("didl:Resource", attrs);
    if (resource.payload && !resource.payload->empty()) raw(xml_escape(*resource.payload));
    close("didl:Resource");
  }

  const DidlDocument& doc_;
  bool exclude_info_;
  std::string out_;
  bool open_pending_ = false;
  std::string pending_qname_;
};

std::string canonical_bytes(const DidlDocument& doc, bool exclude_info) {
  auto failures = check_invariants(doc);
  if (!failures.empty()) {
    const auto& f = failures.front();
    raise(Errc::invariant_violation, f.invariant + " at " + f.location + ": " + f.message);
  }
  return Canonicalizer(doc, exclude_info).run();
}

}  // namespace

ParseOutcome parse_didl(std::string_view bytes) {
  XmlDocumentTree tree = xml_parse(bytes);
  ParseOutcome outcome;
  DidlBuilder builder(bytes, outcome.warnings);
  outcome.document = builder.build(tree.root);
  return outcome;
}

std::string serialize_didl(const DidlDocument& doc) { return canonical_bytes(doc, false); }

std::string canonicalize(const DidlDocument& doc, bool exclude_info_blocks) {
  return canonical_bytes(doc, exclude_info_blocks);
}

}  // namespace didlpack
