#include "gegcn/hash.hpp"

#include <openssl/evp.h>

#include <array>
#include <stdexcept>

namespace gegcn {

std::string sha256_hex(const void* data, std::size_t len) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int digest_len = 0;
    if (EVP_Digest(data, len, digest.data(), &digest_len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256: digest computation failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(digest_len * 2);
    for (unsigned int i = 0; i < digest_len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string sha256_hex(const std::vector<unsigned char>& buf) { return sha256_hex(buf.data(), buf.size()); }

}  // namespace gegcn
