#include "ssrisk/sha256.hpp"

#include <openssl/evp.h>

#include <array>
#include <stdexcept>

#include "ssrisk/util.hpp"

namespace ssrisk {

std::string sha256_hex(std::span<const std::uint8_t> data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 digest failed");
    return hex_encode(std::span<const std::uint8_t>(digest.data(), len));
}

}  // namespace ssrisk
