#include "uri.hpp"

#include <cctype>

#include "error.hpp"

namespace didlpack {

std::string uri_scheme(std::string_view uri) {
  if (uri.empty() || !std::isalpha(static_cast<unsigned char>(uri[0]))) return "";
  std::string scheme;
  for (char c : uri) {
    if (c == ':') return scheme;
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.') {
      scheme += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else {
      return "";
    }
  }
  return "";
}

bool is_absolute_uri(std::string_view uri) {
  if (uri_scheme(uri).empty()) return false;
  for (char c : uri) {
    unsigned char u = static_cast<unsigned char>(c);
    if (u <= 0x20 || u == 0x7f) return false;
  }
  return true;
}

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string percent_decode(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size()) {
      int hi = hex_value(s[i + 1]);
      int lo = hex_value(s[i + 2]);
      if (hi >= 0 && lo >= 0) {
        out += static_cast<char>(hi * 16 + lo);
        i += 2;
        continue;
      }
    }
    out += s[i];
  }
  return out;
}

}  // namespace

std::string file_uri_to_path(std::string_view uri) {
  if (uri_scheme(uri) != "file") raise(Errc::invalid_argument, "not a file URI: " + std::string(uri));
  std::string_view rest = uri.substr(5);  // past "file:"
  if (rest.substr(0, 2) == "//") {
    rest.remove_prefix(2);
    auto slash = rest.find('/');
    if (slash == std::string_view::npos) raise(Errc::invalid_argument, "file URI without path: " + std::string(uri));
    std::string_view host = rest.substr(0, slash);
    if (!host.empty() && host != "localhost") {
      raise(Errc::scheme_unsupported, "file URI with remote host not supported: " + std::string(uri));
    }
    rest = rest.substr(slash);
  }
  if (rest.empty() || rest[0] != '/') {
    raise(Errc::invalid_argument, "file URI must carry an absolute path: " + std::string(uri));
  }
  return percent_decode(rest);
}

std::string path_to_file_uri(std::string_view path) {
  static const char* hex = "0123456789ABCDEF";
  std::string out = "file://";
  for (char c : path) {
    unsigned char u = static_cast<unsigned char>(c);
    bool safe = std::isalnum(u) || c == '/' || c == '-' || c == '_' || c == '.' || c == '~';
    if (safe) {
      out += c;
    } else {
      out += '%';
      out += hex[u >> 4];
      out += hex[u & 0xf];
    }
  }
  return out;
}

std::string join_uri(std::string_view base, std::string_view name) {
  std::string out(base);
  if (!out.empty() && out.back() != '/') out += '/';
  out += name;
  return out;
}

}  // namespace didlpack
