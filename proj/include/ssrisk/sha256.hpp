#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace ssrisk {

// Lowercase hex SHA-256 of the given bytes.
std::string sha256_hex(std::span<const std::uint8_t> data);

}  // namespace ssrisk
