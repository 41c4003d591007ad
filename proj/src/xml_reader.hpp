#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "error.hpp"

namespace didlpack {

// Well-known namespace URIs (exact strings from the DIDL fixtures).
inline constexpr const char* kDidlNs = "urn:mpeg:mpeg21:2002:02-DIDL-NS";
inline constexpr const char* kDiiNs = "urn:mpeg:mpeg21:2002:01-DII-NS";
inline constexpr const char* kDsigNs = "http://www.w3.org/2000/09/xmldsig#";
inline constexpr const char* kDsigNsTypo = "http://www.w3.org/2000/09/xmlsig#";
inline constexpr const char* kJhoveNs = "http://hul.harvard.edu/ois/xml/ns/jhove";
inline constexpr const char* kXmlNs = "http://www.w3.org/XML/1998/namespace";

struct XmlAttr {
  std::string prefix;  // source prefix, "" when none
  std::string ns;      // resolved namespace URI, "" when none
  std::string local;
  std::string value;   // entity-decoded, attribute-value normalized
};

struct XmlText {
  std::string value;  // entity-decoded character data
};

struct XmlElement;
using XmlNode = std::variant<XmlElement, XmlText>;

// A namespace binding an element's subtree resolves from outside itself.
struct InheritedBinding {
  std::string prefix;      // "" for the default namespace
  std::string source_uri;  // as spelled in the source document
  bool typo = false;       // source spelled the misspelled dsig namespace
};

struct XmlElement {
  std::string prefix;
  std::string ns;  // resolved; the dsig typo is corrected here
  std::string local;
  std::vector<XmlAttr> attributes;  // xmlns declarations excluded
  std::vector<XmlNode> children;

  // Byte spans into the parsed buffer.
  std::size_t begin = 0;        // offset of '<'
  std::size_t open_end = 0;     // offset just past the opening tag's '>'
  std::size_t inner_begin = 0;  // first content byte (== open_end)
  std::size_t inner_end = 0;    // offset of the closing "</" (== inner_begin when empty)
  std::size_t end = 0;          // offset just past the final '>'
  bool self_closing = false;

  bool dsig_typo = false;  // subtree binds or uses the misspelled dsig namespace
  std::vector<InheritedBinding> inherited;  // bindings needed from outside this element

  bool is(std::string_view want_ns, std::string_view want_local) const {
    return ns == want_ns && local == want_local;
  }
  const XmlAttr* find_attr(std::string_view want_ns, std::string_view want_local) const;
  // Concatenated decoded text of the direct children.
  std::string text() const;
};

struct XmlDocumentTree {
  XmlElement root;
  std::vector<std::size_t> dsig_typo_offsets;  // byte offsets of typo'd bindings
};

// Parses a complete document: optional BOM, optional XML declaration,
// comments/PIs around exactly one root element. DOCTYPE is rejected.
XmlDocumentTree xml_parse(std::string_view src);

// Parses exactly one element (optionally surrounded by whitespace).
XmlElement xml_parse_fragment(std::string_view src);

// 1-based line/column of a byte offset.
SourcePos xml_position(std::string_view src, std::size_t offset);

}  // namespace didlpack
