#include "ssrisk/zip_reader.hpp"

#include <zlib.h>

#include <cstring>
#include <ctime>

namespace ssrisk::zip {

namespace {

constexpr std::uint32_t kLocalSig = 0x04034b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kEocdSig = 0x06054b50;
constexpr size_t kEocdMin = 22;

std::uint16_t rd16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
std::uint32_t rd32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

[[noreturn]] void fail_corrupt(const std::string& why) {
    throw ZipError{ZipError::Kind::corrupt, why};
}

}  // namespace

std::int64_t Entry::modified_unix() const {
    std::tm tm{};
    tm.tm_year = ((dos_date >> 9) & 0x7f) + 80;  // DOS epoch 1980
    tm.tm_mon = ((dos_date >> 5) & 0x0f) - 1;
    tm.tm_mday = dos_date & 0x1f;
    tm.tm_hour = (dos_time >> 11) & 0x1f;
    tm.tm_min = (dos_time >> 5) & 0x3f;
    tm.tm_sec = (dos_time & 0x1f) * 2;
    if (tm.tm_mday == 0) tm.tm_mday = 1;
    return static_cast<std::int64_t>(timegm(&tm));
}

bool has_zip_signature(std::span<const std::uint8_t> bytes) {
    return bytes.size() >= 4 && rd32(bytes.data()) == kLocalSig;
}

std::optional<Archive> Archive::open(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kEocdMin) return std::nullopt;

    // EOCD sits at the end, possibly behind a comment of up to 64 KiB.
    size_t scan_limit = std::min(bytes.size(), kEocdMin + size_t{65535});
    size_t eocd = SIZE_MAX;
    for (size_t back = kEocdMin; back <= scan_limit; ++back) {
        size_t pos = bytes.size() - back;
        if (rd32(bytes.data() + pos) == kEocdSig) {
            eocd = pos;
            break;
        }
    }
    if (eocd == SIZE_MAX) return std::nullopt;

    const std::uint8_t* e = bytes.data() + eocd;
    std::uint16_t total_entries = rd16(e + 10);
    std::uint32_t cd_size = rd32(e + 12);
    std::uint32_t cd_offset = rd32(e + 16);
    if (cd_offset == 0xffffffff || total_entries == 0xffff)
        fail_corrupt("zip64 archives unsupported");
    if (static_cast<std::uint64_t>(cd_offset) + cd_size > bytes.size())
        fail_corrupt("central directory out of bounds");

    Archive a;
    a.bytes_ = bytes;
    a.entries_.reserve(total_entries);
    size_t pos = cd_offset;
    for (std::uint16_t i = 0; i < total_entries; ++i) {
        if (pos + 46 > bytes.size() || rd32(bytes.data() + pos) != kCentralSig)
            fail_corrupt("bad central directory entry");
        const std::uint8_t* c = bytes.data() + pos;
        Entry ent;
        ent.method = rd16(c + 10);
        ent.dos_time = rd16(c + 12);
        ent.dos_date = rd16(c + 14);
        ent.crc32 = rd32(c + 16);
        ent.compressed_size = rd32(c + 20);
        ent.uncompressed_size = rd32(c + 24);
        std::uint16_t name_len = rd16(c + 28);
        std::uint16_t extra_len = rd16(c + 30);
        std::uint16_t comment_len = rd16(c + 32);
        ent.local_header_offset = rd32(c + 42);
        if (pos + 46 + name_len > bytes.size()) fail_corrupt("entry name out of bounds");
        ent.name.assign(reinterpret_cast<const char*>(c + 46), name_len);
        a.entries_.push_back(std::move(ent));
        pos += 46u + name_len + extra_len + comment_len;
    }
    return a;
}

const Entry* Archive::find(std::string_view name) const {
    for (const auto& e : entries_) {
        if (e.name == name) return &e;
    }
    return nullptr;
}

Bytes Archive::extract(const Entry& e, std::uint64_t budget) const {
    if (e.uncompressed_size > budget)
        throw ZipError{ZipError::Kind::budget_exceeded,
                       "entry " + e.name + " exceeds decompression budget"};
    if (e.local_header_offset + 30 > bytes_.size()) fail_corrupt("local header out of bounds");
    const std::uint8_t* lh = bytes_.data() + e.local_header_offset;
    if (rd32(lh) != kLocalSig) fail_corrupt("bad local header signature");
    std::uint16_t name_len = rd16(lh + 26);
    std::uint16_t extra_len = rd16(lh + 28);
    std::uint64_t data_off = e.local_header_offset + 30 + name_len + extra_len;
    if (data_off + e.compressed_size > bytes_.size()) fail_corrupt("entry data out of bounds");
    const std::uint8_t* data = bytes_.data() + data_off;

    Bytes out;
    if (e.method == 0) {
        if (e.compressed_size != e.uncompressed_size)
            fail_corrupt("stored entry size mismatch");
        out.assign(data, data + e.compressed_size);
    } else if (e.method == 8) {
        out.resize(e.uncompressed_size);
        z_stream zs{};
        if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) fail_corrupt("inflate init failed");
        zs.next_in = const_cast<Bytef*>(data);
        zs.avail_in = static_cast<uInt>(e.compressed_size);
        zs.next_out = out.data();
        zs.avail_out = static_cast<uInt>(out.size());
        int rc = inflate(&zs, Z_FINISH);
        std::uint64_t produced = zs.total_out;
        inflateEnd(&zs);
        if (rc != Z_STREAM_END || produced != e.uncompressed_size)
            fail_corrupt("deflate stream truncated or size lies");
    } else {
        fail_corrupt("unsupported compression method");
    }

    std::uint32_t crc = ::crc32(0, out.data(), static_cast<uInt>(out.size()));
    if (crc != e.crc32) fail_corrupt("crc mismatch in entry " + e.name);
    return out;
}

}  // namespace ssrisk::zip
