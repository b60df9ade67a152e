#include "ssrisk/cfb.hpp"

#include <cstring>

namespace ssrisk::cfb {

namespace {

constexpr std::uint8_t kSig[8] = {0xd0, 0xcf, 0x11, 0xe0, 0xa1, 0xb1, 0x1a, 0xe1};
constexpr std::uint32_t kEndOfChain = 0xfffffffe;
constexpr std::uint32_t kFreeSect = 0xffffffff;

std::uint16_t rd16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
std::uint32_t rd32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

// UTF-16LE to UTF-8, BMP only; names outside the BMP are not used by any
// workbook stream we care about.
std::string utf16le_to_utf8(const std::uint8_t* p, size_t code_units) {
    std::string out;
    for (size_t i = 0; i < code_units; ++i) {
        std::uint16_t c = rd16(p + i * 2);
        if (c == 0) break;
        if (c < 0x80) {
            out += static_cast<char>(c);
        } else if (c < 0x800) {
            out += static_cast<char>(0xc0 | (c >> 6));
            out += static_cast<char>(0x80 | (c & 0x3f));
        } else {
            out += static_cast<char>(0xe0 | (c >> 12));
            out += static_cast<char>(0x80 | ((c >> 6) & 0x3f));
            out += static_cast<char>(0x80 | (c & 0x3f));
        }
    }
    return out;
}

}  // namespace

bool has_cfb_signature(std::span<const std::uint8_t> bytes) {
    return bytes.size() >= 8 && std::memcmp(bytes.data(), kSig, 8) == 0;
}

std::optional<std::vector<std::string>> list_stream_names(std::span<const std::uint8_t> bytes) {
    if (!has_cfb_signature(bytes) || bytes.size() < 512) return std::nullopt;
    const std::uint8_t* h = bytes.data();
    std::uint16_t sector_shift = rd16(h + 30);
    if (sector_shift != 9 && sector_shift != 12) return std::nullopt;
    size_t sector_size = size_t{1} << sector_shift;
    std::uint32_t fat_sector_count = rd32(h + 44);
    std::uint32_t dir_start = rd32(h + 48);
    std::uint32_t difat_start = rd32(h + 68);
    std::uint32_t difat_count = rd32(h + 72);

    auto sector_offset = [&](std::uint32_t sect) -> size_t {
        return 512 + static_cast<size_t>(sect) * sector_size;
    };
    auto sector_ok = [&](std::uint32_t sect) {
        return sect < kEndOfChain && sector_offset(sect) + sector_size <= bytes.size();
    };

    // FAT sector list: 109 header DIFAT slots, then chained DIFAT sectors.
    std::vector<std::uint32_t> fat_sectors;
    for (int i = 0; i < 109 && fat_sectors.size() < fat_sector_count; ++i) {
        std::uint32_t s = rd32(h + 76 + i * 4);
        if (s == kFreeSect || s >= kEndOfChain) break;
        fat_sectors.push_back(s);
    }
    std::uint32_t difat = difat_start;
    for (std::uint32_t n = 0; n < difat_count && difat < kEndOfChain; ++n) {
        if (!sector_ok(difat)) return std::nullopt;
        const std::uint8_t* ds = bytes.data() + sector_offset(difat);
        size_t slots = sector_size / 4 - 1;
        for (size_t i = 0; i < slots && fat_sectors.size() < fat_sector_count; ++i) {
            std::uint32_t s = rd32(ds + i * 4);
            if (s == kFreeSect || s >= kEndOfChain) break;
            fat_sectors.push_back(s);
        }
        difat = rd32(ds + sector_size - 4);
    }

    auto fat_next = [&](std::uint32_t sect) -> std::uint32_t {
        size_t per = sector_size / 4;
        size_t idx = sect / per;
        if (idx >= fat_sectors.size()) return kEndOfChain;
        std::uint32_t fs = fat_sectors[idx];
        if (!sector_ok(fs)) return kEndOfChain;
        return rd32(bytes.data() + sector_offset(fs) + (sect % per) * 4);
    };

    std::vector<std::string> names;
    std::uint32_t sect = dir_start;
    size_t guard = 0;
    const size_t max_dir_sectors = 4096;  // cycle guard for corrupt FAT chains
    while (sect < kEndOfChain && guard++ < max_dir_sectors) {
        if (!sector_ok(sect)) return std::nullopt;
        const std::uint8_t* ds = bytes.data() + sector_offset(sect);
        for (size_t off = 0; off + 128 <= sector_size; off += 128) {
            const std::uint8_t* de = ds + off;
            std::uint16_t name_bytes = rd16(de + 64);
            std::uint8_t object_type = de[66];
            if (object_type != 2) continue;  // streams only
            if (name_bytes < 2 || name_bytes > 64) continue;
            names.push_back(utf16le_to_utf8(de, (name_bytes - 2) / 2));
        }
        sect = fat_next(sect);
    }
    return names;
}

}  // namespace ssrisk::cfb
