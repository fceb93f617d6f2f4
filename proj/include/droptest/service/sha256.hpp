#pragma once

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <memory>
#include <string>
#include <string_view>

#include "droptest/error.hpp"

namespace droptest::service {

/// Lowercase hex SHA-256 of the concatenated parts.
inline std::string sha256_hex(std::initializer_list<std::string_view> parts) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) fail(ErrorKind::Io, "sha256 init failed");
  for (const auto part : parts)
    if (EVP_DigestUpdate(ctx.get(), part.data(), part.size()) != 1) fail(ErrorKind::Io, "sha256 update failed");
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) fail(ErrorKind::Io, "sha256 final failed");
  std::string hex;
  hex.reserve(len * 2);
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

}  // namespace droptest::service
