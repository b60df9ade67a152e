#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ssrisk {

enum class FileKind {
    ooxml_spreadsheet,
    ooxml_macro_spreadsheet,
    legacy_binary_spreadsheet,
    encrypted_spreadsheet,
    zip_archive,
    other,
};

std::string_view to_string(FileKind k);
std::optional<FileKind> file_kind_from_string(std::string_view s);

bool is_spreadsheet_kind(FileKind k);

// One discovered file. For archive members, `path` is the outermost on-disk
// file and `container_chain` the entry names at each nesting level, innermost
// last.
struct FileRecord {
    std::string path;
    std::vector<std::string> container_chain;
    std::uint64_t size_bytes = 0;
    std::int64_t modified_at = 0;
    std::optional<std::int64_t> created_at;
    std::string content_hash;  // SHA-256 hex of the (decompressed) bytes
    FileKind kind = FileKind::other;
    std::string extension;  // lowercased, no dot; empty when absent
    bool extension_mismatch = false;

    // Innermost file name: the last chain element, or the on-disk basename.
    std::string display_name() const;
    // Identity string: path, with "::"-joined chain elements when nested.
    std::string identity() const;

    bool operator==(const FileRecord&) const = default;
};

// Sort/dedup key: (path, container_chain).
struct FileIdentityLess {
    bool operator()(const FileRecord& a, const FileRecord& b) const {
        if (a.path != b.path) return a.path < b.path;
        return a.container_chain < b.container_chain;
    }
};

// Lowercased extension of a file name, empty when there is none.
std::string extension_of(std::string_view name);

// The accepted spreadsheet-extension set used by the mismatch flag.
bool is_spreadsheet_extension(std::string_view ext);

// extension_mismatch per the record invariant: a spreadsheet kind carrying a
// non-spreadsheet extension, or a spreadsheet extension on a non-spreadsheet
// kind.
bool compute_extension_mismatch(FileKind kind, std::string_view ext);

}  // namespace ssrisk
