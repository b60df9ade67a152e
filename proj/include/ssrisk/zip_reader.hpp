#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ssrisk/util.hpp"

namespace ssrisk::zip {

struct ZipError {
    enum class Kind { corrupt, budget_exceeded };
    Kind kind;
    std::string detail;
};

struct Entry {
    std::string name;
    std::uint16_t method = 0;  // 0 = stored, 8 = deflate
    std::uint32_t crc32 = 0;
    std::uint64_t compressed_size = 0;
    std::uint64_t uncompressed_size = 0;
    std::uint64_t local_header_offset = 0;
    std::uint16_t dos_time = 0;
    std::uint16_t dos_date = 0;

    bool is_directory() const { return !name.empty() && name.back() == '/'; }
    std::int64_t modified_unix() const;  // DOS time converted to UTC unix seconds
};

// Read-only view over a ZIP held fully in memory, driven by the central
// directory. open() answers nullopt when the bytes are not a ZIP at all
// (no local-file signature or no end-of-central-directory record).
class Archive {
public:
    static std::optional<Archive> open(std::span<const std::uint8_t> bytes);

    const std::vector<Entry>& entries() const { return entries_; }
    const Entry* find(std::string_view name) const;

    // Decompresses one entry. `budget` caps the produced byte count; blowing
    // through it reports ZipError::budget_exceeded. CRC mismatches, bad local
    // headers and truncated streams report ZipError::corrupt.
    Bytes extract(const Entry& e, std::uint64_t budget) const;

private:
    std::span<const std::uint8_t> bytes_;
    std::vector<Entry> entries_;
};

// True when the buffer begins with the ZIP local-file signature 50 4B 03 04.
bool has_zip_signature(std::span<const std::uint8_t> bytes);

}  // namespace ssrisk::zip
