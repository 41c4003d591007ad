#pragma once

#include <array>
#include <string>
#include <string_view>

namespace didlpack {

std::array<unsigned char, 32> sha256(std::string_view bytes);
std::array<unsigned char, 20> sha1(std::string_view bytes);

std::string to_hex(const unsigned char* data, std::size_t len);

template <std::size_t N>
std::string to_hex(const std::array<unsigned char, N>& digest) {
  return to_hex(digest.data(), digest.size());
}

}  // namespace didlpack
