#pragma once

#include <string>
#include <string_view>

namespace didlpack {

// Lowercased scheme if the string starts with a RFC 3986 scheme
// production followed by ':', otherwise "".
std::string uri_scheme(std::string_view uri);

// Absolute here means: has a scheme and no embedded whitespace or
// control characters.
bool is_absolute_uri(std::string_view uri);

// file:///path or file://localhost/path -> filesystem path
// (percent-escapes decoded). Raises Errc::scheme_unsupported for other
// hosts and Errc::invalid_argument for malformed input.
std::string file_uri_to_path(std::string_view uri);

// Absolute filesystem path -> file:// URI with minimal percent-encoding.
std::string path_to_file_uri(std::string_view path);

// base + "/" + name (no extra slash when base already ends with one).
std::string join_uri(std::string_view base, std::string_view name);

}  // namespace didlpack
