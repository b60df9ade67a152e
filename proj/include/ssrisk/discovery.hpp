#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ssrisk/errors.hpp"
#include "ssrisk/file_record.hpp"
#include "ssrisk/util.hpp"

namespace ssrisk {

enum class RootKind { file_share, repository_export, workstation };

std::string_view to_string(RootKind k);
std::optional<RootKind> root_kind_from_string(std::string_view s);

struct ScanRoot {
    std::string path;  // absolute directory
    std::string label;
    RootKind kind = RootKind::file_share;

    bool operator==(const ScanRoot&) const = default;
};

// Time window [start, end], both inclusive, unix seconds.
struct DateWindow {
    std::int64_t start = 0;
    std::int64_t end = 0;

    bool operator==(const DateWindow&) const = default;
};

// Narrowing criteria. Categories are OR-ed: a file is admitted when it
// matches any active criterion; with no active criteria everything passes.
// max_file_size_bytes and follow_symlinks are traversal caps, not criteria.
struct ScanFilter {
    std::vector<std::string> name_patterns;  // case-insensitive glob/substring
    std::vector<DateWindow> modified_windows;
    bool since_last_scan = false;
    std::uint64_t max_file_size_bytes = 256ull << 20;
    bool follow_symlinks = false;

    bool operator==(const ScanFilter&) const = default;
};

struct ArchiveLimits {
    int max_depth = 3;                        // max container_chain length
    std::uint64_t budget_bytes = 512u << 20;  // decompressed, per outer archive

    bool operator==(const ArchiveLimits&) const = default;
};

struct DiscoveryOptions {
    ArchiveLimits archive;
    unsigned worker_threads = 0;  // 0 = hardware concurrency
};

struct WalkResult {
    std::vector<FileRecord> records;  // spreadsheet kinds and zip archives
    std::vector<ScanError> errors;
};

struct DiscoveryResult {
    std::vector<FileRecord> records;  // spreadsheet kinds only, sorted, deduped
    std::vector<ScanError> errors;
    bool no_roots_scanned = false;
};

// True when the filter admits a file with this name and mtime.
bool filter_admits(const ScanFilter& filter, std::string_view file_name,
                   std::int64_t modified_at, std::optional<std::int64_t> last_scan_at);

// Walks one root depth-first in lexicographic order, sniffing every candidate
// by content. Unreadable directories and files become error entries.
WalkResult walk(const ScanRoot& root, const ScanFilter& filter,
                std::optional<std::int64_t> last_scan_at, const DiscoveryOptions& opts = {});

// Expands a zip-archive record into the spreadsheet records nested inside it,
// recursing into inner archives while chain length stays within the depth
// cap. Spreadsheet-kind inputs yield nothing: they are ZIPs themselves but
// terminal. Budget overruns and corrupt members become error entries; sound
// members found before the failure are kept.
std::vector<FileRecord> expand_archive(const FileRecord& record,
                                       std::span<const std::uint8_t> bytes,
                                       const ArchiveLimits& limits,
                                       std::vector<ScanError>& errors);

// walk + expand over all roots; dedups on (path, container_chain) and sorts.
DiscoveryResult discover(const std::vector<ScanRoot>& roots, const ScanFilter& filter,
                         std::optional<std::int64_t> last_scan_at,
                         const DiscoveryOptions& opts = {});

}  // namespace ssrisk
