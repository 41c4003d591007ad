#include "xml_reader.hpp"

#include <algorithm>
#include <cstdint>

namespace didlpack {

const XmlAttr* XmlElement::find_attr(std::string_view want_ns, std::string_view want_local) const {
  for (const auto& a : attributes) {
    if (a.ns == want_ns && a.local == want_local) return &a;
  }
  return nullptr;
}

std::string XmlElement::text() const {
  std::string out;
  for (const auto& node : children) {
    if (const auto* t = std::get_if<XmlText>(&node)) out += t->value;
  }
  return out;
}

SourcePos xml_position(std::string_view src, std::size_t offset) {
  SourcePos pos{1, 1};
  offset = std::min(offset, src.size());
  for (std::size_t i = 0; i < offset; ++i) {
    if (src[i] == '\n') {
      ++pos.line;
      pos.column = 1;
    } else {
      ++pos.column;
    }
  }
  return pos;
}

namespace {

constexpr std::size_t kMaxDepth = 512;

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

bool is_name_start(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_' ||
         static_cast<unsigned char>(c) >= 0x80;
}

bool is_name_char(char c) {
  return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
}

bool valid_xml_codepoint(std::uint32_t cp) {
  return cp == 0x9 || cp == 0xA || cp == 0xD || (cp >= 0x20 && cp <= 0xD7FF) ||
         (cp >= 0xE000 && cp <= 0xFFFD) || (cp >= 0x10000 && cp <= 0x10FFFF);
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

struct Binding {
  std::string prefix;
  std::string uri;         // resolved (typo corrected)
  std::string source_uri;  // as spelled
  bool typo = false;
};

class Reader {
 public:
  explicit Reader(std::string_view src) : src_(src) {
    scope_.push_back({"xml", kXmlNs, kXmlNs, false});
  }

  XmlElement parse_document() {
    validate_utf8();
    skip_bom();
    parse_declaration();
    skip_misc();
    if (at_end() || peek() != '<') fail("expected document element");
    XmlElement root = parse_element(0);
    skip_misc();
    if (!at_end()) fail("content after document element");
    return root;
  }

  XmlElement parse_fragment() {
    validate_utf8();
    skip_ws();
    if (at_end() || peek() != '<') fail("expected an element");
    XmlElement root = parse_element(0);
    skip_ws();
    if (!at_end()) fail("content after fragment element");
    return root;
  }

  std::vector<std::size_t> typo_offsets;

 private:
  std::string_view src_;
  std::size_t pos_ = 0;
  std::vector<Binding> scope_;

  [[noreturn]] void fail(const std::string& what, std::size_t at = static_cast<std::size_t>(-1)) {
    std::size_t offset = (at == static_cast<std::size_t>(-1)) ? pos_ : at;
    raise(Errc::malformed_xml, what, xml_position(src_, offset));
  }

  bool at_end() const { return pos_ >= src_.size(); }
  char peek() const { return src_[pos_]; }
  bool starts_with(std::string_view s) const { return src_.substr(pos_, s.size()) == s; }

  void validate_utf8() {
    const auto* p = reinterpret_cast<const unsigned char*>(src_.data());
    std::size_t n = src_.size();
    std::size_t i = 0;
    while (i < n) {
      unsigned char b = p[i];
      std::size_t len;
      std::uint32_t cp;
      if (b < 0x80) {
        if (b == 0) raise(Errc::malformed_xml, "NUL byte in input", xml_position(src_, i));
        ++i;
        continue;
      } else if ((b & 0xE0) == 0xC0) {
        len = 2;
        cp = b & 0x1F;
      } else if ((b & 0xF0) == 0xE0) {
        len = 3;
        cp = b & 0x0F;
      } else if ((b & 0xF8) == 0xF0) {
        len = 4;
        cp = b & 0x07;
      } else {
        raise(Errc::malformed_xml, "invalid UTF-8 lead byte", xml_position(src_, i));
      }
      if (i + len > n) raise(Errc::malformed_xml, "truncated UTF-8 sequence", xml_position(src_, i));
      for (std::size_t k = 1; k < len; ++k) {
        if ((p[i + k] & 0xC0) != 0x80) {
          raise(Errc::malformed_xml, "invalid UTF-8 continuation byte", xml_position(src_, i));
        }
        cp = (cp << 6) | (p[i + k] & 0x3F);
      }
      bool overlong = (len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000);
      if (overlong || !valid_xml_codepoint(cp)) {
        raise(Errc::malformed_xml, "invalid character in input", xml_position(src_, i));
      }
      i += len;
    }
  }

  void skip_bom() {
    if (src_.substr(0, 3) == "\xEF\xBB\xBF") pos_ = 3;
  }

  void skip_ws() {
    while (!at_end() && is_ws(peek())) ++pos_;
  }

  void parse_declaration() {
    if (!starts_with("<?xml")) return;
    char after = pos_ + 5 < src_.size() ? src_[pos_ + 5] : '\0';
    if (!is_ws(after) && after != '?') return;  // a PI whose target merely starts with "xml"
    std::size_t open = pos_;
    pos_ += 5;
    auto close = src_.find("?>", pos_);
    if (close == std::string_view::npos) fail("unterminated XML declaration", open);
    std::string_view decl = src_.substr(pos_, close - pos_);
    pos_ = close + 2;
    auto enc = decl.find("encoding");
    if (enc != std::string_view::npos) {
      auto q1 = decl.find_first_of("'\"", enc);
      if (q1 != std::string_view::npos) {
        auto q2 = decl.find(decl[q1], q1 + 1);
        if (q2 != std::string_view::npos) {
          std::string name(decl.substr(q1 + 1, q2 - q1 - 1));
          std::transform(name.begin(), name.end(), name.begin(),
                         [](unsigned char c) { return std::tolower(c); });
          if (name != "utf-8") fail("unsupported encoding \"" + name + "\"", open);
        }
      }
    }
    if (decl.find("1.0") == std::string_view::npos) fail("unsupported XML version", open);
  }

  // Comments and processing instructions between markup; DOCTYPE rejected.
  void skip_misc() {
    while (true) {
      skip_ws();
      if (starts_with("<!--")) {
        skip_comment();
      } else if (starts_with("<?")) {
        skip_pi();
      } else if (starts_with("<!DOCTYPE")) {
        fail("document type declarations are not supported");
      } else {
        return;
      }
    }
  }

  void skip_comment() {
    std::size_t open = pos_;
    auto close = src_.find("-->", pos_ + 4);
    if (close == std::string_view::npos) fail("unterminated comment", open);
    pos_ = close + 3;
  }

  void skip_pi() {
    std::size_t open = pos_;
    auto close = src_.find("?>", pos_ + 2);
    if (close == std::string_view::npos) fail("unterminated processing instruction", open);
    pos_ = close + 2;
  }

  std::string read_name() {
    if (at_end() || !is_name_start(peek())) fail("expected a name");
    std::size_t start = pos_;
    while (!at_end() && is_name_char(peek())) ++pos_;
    return std::string(src_.substr(start, pos_ - start));
  }

  // QName -> (prefix, local); at most one colon.
  std::pair<std::string, std::string> read_qname() {
    std::string first = read_name();
    if (!at_end() && peek() == ':') {
      ++pos_;
      std::string second = read_name();
      if (second.find(':') != std::string::npos) fail("malformed qualified name");
      return {first, second};
    }
    return {"", first};
  }

  std::uint32_t read_char_ref() {
    // pos_ sits just past "&#".
    std::uint32_t cp = 0;
    bool hex = false;
    bool any = false;
    if (!at_end() && (peek() == 'x' || peek() == 'X')) {
      hex = true;
      ++pos_;
    }
    while (!at_end() && peek() != ';') {
      char c = peek();
      std::uint32_t digit;
      if (c >= '0' && c <= '9') {
        digit = static_cast<std::uint32_t>(c - '0');
      } else if (hex && c >= 'a' && c <= 'f') {
        digit = static_cast<std::uint32_t>(c - 'a' + 10);
      } else if (hex && c >= 'A' && c <= 'F') {
        digit = static_cast<std::uint32_t>(c - 'A' + 10);
      } else {
        fail("malformed character reference");
      }
      cp = cp * (hex ? 16u : 10u) + digit;
      if (cp > 0x10FFFF) fail("character reference out of range");
      any = true;
      ++pos_;
    }
    if (!any || at_end()) fail("malformed character reference");
    ++pos_;  // ';'
    if (!valid_xml_codepoint(cp)) fail("character reference to invalid character");
    return cp;
  }

  void decode_entity(std::string& out) {
    std::size_t amp = pos_;
    ++pos_;  // '&'
    if (!at_end() && peek() == '#') {
      ++pos_;
      append_utf8(out, read_char_ref());
      return;
    }
    auto semi = src_.find(';', pos_);
    if (semi == std::string_view::npos || semi - pos_ > 8) fail("unterminated entity reference", amp);
    std::string_view name = src_.substr(pos_, semi - pos_);
    pos_ = semi + 1;
    if (name == "amp") {
      out += '&';
    } else if (name == "lt") {
      out += '<';
    } else if (name == "gt") {
      out += '>';
    } else if (name == "quot") {
      out += '"';
    } else if (name == "apos") {
      out += '\'';
    } else {
      fail("unknown entity \"&" + std::string(name) + ";\"", amp);
    }
  }

  std::string read_attr_value() {
    if (at_end() || (peek() != '"' && peek() != '\'')) fail("expected quoted attribute value");
    char quote = peek();
    ++pos_;
    std::string out;
    while (true) {
      if (at_end()) fail("unterminated attribute value");
      char c = peek();
      if (c == quote) {
        ++pos_;
        return out;
      }
      if (c == '<') fail("'<' in attribute value");
      if (c == '&') {
        decode_entity(out);
        continue;
      }
      // Attribute-value normalization: literal whitespace becomes a space.
      out += (c == '\t' || c == '\n' || c == '\r') ? ' ' : c;
      ++pos_;
    }
  }

  const Binding* resolve(const std::string& prefix, std::size_t error_at) {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it) {
      if (it->prefix == prefix) return &*it;
    }
    if (prefix.empty()) return nullptr;  // no default namespace in scope
    fail("undeclared namespace prefix \"" + prefix + "\"", error_at);
  }

  XmlElement parse_element(std::size_t depth) {
    if (depth > kMaxDepth) fail("element nesting too deep");
    XmlElement el;
    el.begin = pos_;
    ++pos_;  // '<'
    std::size_t name_at = pos_;
    auto [prefix, local] = read_qname();
    el.prefix = prefix;
    el.local = local;

    std::size_t scope_base = scope_.size();
    struct PendingAttr {
      std::string prefix, local, value;
      std::size_t at;
    };
    std::vector<PendingAttr> pending;

    while (true) {
      bool had_ws = !at_end() && is_ws(peek());
      skip_ws();
      if (at_end()) fail("unterminated start tag", el.begin);
      if (peek() == '>') {
        ++pos_;
        break;
      }
      if (peek() == '/') {
        if (!starts_with("/>")) fail("malformed start tag");
        pos_ += 2;
        el.self_closing = true;
        break;
      }
      if (!had_ws) fail("expected whitespace before attribute");
      std::size_t attr_at = pos_;
      auto [aprefix, alocal] = read_qname();
      skip_ws();
      if (at_end() || peek() != '=') fail("expected '=' after attribute name", attr_at);
      ++pos_;
      skip_ws();
      std::string value = read_attr_value();
      if (aprefix.empty() && alocal == "xmlns") {
        push_binding("", value, attr_at, scope_base);
      } else if (aprefix == "xmlns") {
        if (value.empty()) fail("cannot unbind a namespace prefix", attr_at);
        push_binding(alocal, value, attr_at, scope_base);
      } else {
        pending.push_back({std::move(aprefix), std::move(alocal), std::move(value), attr_at});
      }
    }
    el.open_end = pos_;
    el.inner_begin = pos_;

    bool local_typo = false;
    for (std::size_t i = scope_base; i < scope_.size(); ++i) {
      if (scope_[i].typo) local_typo = true;
    }

    std::vector<InheritedBinding> needs;
    auto use_binding = [&](const std::string& p, std::size_t at) -> const Binding* {
      const Binding* b = resolve(p, at);
      if (b == nullptr) return nullptr;
      bool is_local = false;
      for (std::size_t i = scope_base; i < scope_.size(); ++i) {
        if (&scope_[i] == b) is_local = true;
      }
      if (!is_local && !(p == "xml")) {
        bool seen = false;
        for (const auto& nb : needs) {
          if (nb.prefix == p) seen = true;
        }
        if (!seen) needs.push_back({p, b->source_uri, b->typo});
      }
      return b;
    };

    if (const Binding* b = use_binding(el.prefix, name_at)) {
      el.ns = b->uri;
      if (b->typo) el.dsig_typo = true;
    }
    for (auto& pa : pending) {
      XmlAttr attr;
      attr.prefix = pa.prefix;
      attr.local = pa.local;
      attr.value = std::move(pa.value);
      if (!pa.prefix.empty()) {
        const Binding* b = use_binding(pa.prefix, pa.at);
        attr.ns = b->uri;
        if (b->typo) el.dsig_typo = true;
      }
      for (const auto& existing : el.attributes) {
        bool same_qname = existing.local == attr.local && existing.prefix == attr.prefix;
        bool same_expanded = existing.local == attr.local && !attr.ns.empty() && existing.ns == attr.ns;
        if (same_qname || same_expanded) {
          fail("duplicate attribute \"" + attr.local + "\"", pa.at);
        }
      }
      el.attributes.push_back(std::move(attr));
    }

    if (!el.self_closing) {
      parse_content(el, depth, needs, scope_base);
    } else {
      el.inner_end = el.inner_begin;
      el.end = pos_;
    }

    el.dsig_typo = el.dsig_typo || local_typo;
    for (auto& nb : needs) {
      if (nb.typo) el.dsig_typo = true;
    }
    el.inherited = std::move(needs);
    scope_.resize(scope_base);
    return el;
  }

  void push_binding(const std::string& prefix, const std::string& uri, std::size_t at,
                    std::size_t scope_base) {
    for (std::size_t i = scope_base; i < scope_.size(); ++i) {
      if (scope_[i].prefix == prefix) fail("duplicate namespace declaration", at);
    }
    Binding b{prefix, uri, uri, false};
    if (uri == kDsigNsTypo) {
      b.uri = kDsigNs;
      b.typo = true;
      typo_offsets.push_back(at);
    }
    scope_.push_back(std::move(b));
  }

  void parse_content(XmlElement& el, std::size_t depth, std::vector<InheritedBinding>& needs,
                     std::size_t scope_base) {
    std::string text_run;
    auto flush_text = [&]() {
      if (!text_run.empty()) {
        el.children.push_back(XmlText{std::move(text_run)});
        text_run.clear();
      }
    };
    while (true) {
      if (at_end()) fail("unterminated element <" + qname(el) + ">", el.begin);
      char c = peek();
      if (c == '<') {
        if (starts_with("</")) {
          flush_text();
          el.inner_end = pos_;
          pos_ += 2;
          auto [eprefix, elocal] = read_qname();
          skip_ws();
          if (at_end() || peek() != '>') fail("malformed end tag");
          ++pos_;
          if (eprefix != el.prefix || elocal != el.local) {
            fail("mismatched end tag </" + (eprefix.empty() ? elocal : eprefix + ":" + elocal) +
                     "> for <" + qname(el) + ">",
                 el.inner_end);
          }
          el.end = pos_;
          return;
        }
        if (starts_with("<!--")) {
          flush_text();
          skip_comment();
          continue;
        }
        if (starts_with("<![CDATA[")) {
          std::size_t open = pos_;
          auto close = src_.find("]]>", pos_ + 9);
          if (close == std::string_view::npos) fail("unterminated CDATA section", open);
          text_run.append(src_.substr(pos_ + 9, close - pos_ - 9));
          pos_ = close + 3;
          continue;
        }
        if (starts_with("<?")) {
          flush_text();
          skip_pi();
          continue;
        }
        if (starts_with("<!")) fail("unsupported markup declaration");
        flush_text();
        XmlElement child = parse_element(depth + 1);
        // Propagate the child's external needs through this element.
        for (const auto& nb : child.inherited) {
          bool satisfied = false;
          for (std::size_t i = scope_base; i < scope_.size(); ++i) {
            if (scope_[i].prefix == nb.prefix) satisfied = true;
          }
          if (!satisfied) {
            bool seen = false;
            for (const auto& own : needs) {
              if (own.prefix == nb.prefix) seen = true;
            }
            if (!seen) needs.push_back(nb);
          }
        }
        if (child.dsig_typo) el.dsig_typo = true;
        el.children.push_back(std::move(child));
        continue;
      }
      if (c == '&') {
        decode_entity(text_run);
        continue;
      }
      text_run += c;
      ++pos_;
    }
  }

  static std::string qname(const XmlElement& el) {
    return el.prefix.empty() ? el.local : el.prefix + ":" + el.local;
  }
};

}  // namespace

XmlDocumentTree xml_parse(std::string_view src) {
  Reader reader(src);
  XmlDocumentTree tree;
  tree.root = reader.parse_document();
  tree.dsig_typo_offsets = std::move(reader.typo_offsets);
  return tree;
}

XmlElement xml_parse_fragment(std::string_view src) {
  Reader reader(src);
  return reader.parse_fragment();
}

}  // namespace didlpack
