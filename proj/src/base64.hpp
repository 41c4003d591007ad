#pragma once

#include <string>
#include <string_view>

namespace didlpack {

// RFC 4648 base64, standard alphabet, padded, no line wrapping.
std::string base64_encode(std::string_view bytes);

// Decodes padded base64. ASCII whitespace between symbols is ignored;
// anything else outside the alphabet raises Errc::invalid_base64.
std::string base64_decode(std::string_view text);

// Validation without materializing the decoded bytes.
bool base64_valid(std::string_view text);

}  // namespace didlpack
