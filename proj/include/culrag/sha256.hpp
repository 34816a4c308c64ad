#ifndef CULRAG_SHA256_HPP
#define CULRAG_SHA256_HPP

#include <string>
#include <string_view>

#include <openssl/evp.h>

#include "culrag/errors.hpp"

namespace culrag {

/// Hex-encoded SHA-256 digest.
inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0x0F]);
  }
  return out;
}

}  // namespace culrag

#endif  // CULRAG_SHA256_HPP
