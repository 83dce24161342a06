#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gegcn {

// SHA-256 of a byte buffer as lowercase hex (OpenSSL-backed).
std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_hex(const std::vector<unsigned char>& buf);

// Fast 64-bit fingerprint used as a staleness token for weight vectors.
inline std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t seed = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace gegcn
