#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ssrisk {

using Bytes = std::vector<std::uint8_t>;

std::string to_lower(std::string_view s);

// Case-insensitive substring test (ASCII folding).
bool icontains(std::string_view haystack, std::string_view needle);

// Case-insensitive glob over the whole string; '*' and '?' wildcards.
bool glob_match(std::string_view text, std::string_view pattern);

// Filter-pattern semantics: glob when the pattern carries wildcards,
// case-insensitive substring otherwise.
bool matches_pattern(std::string_view text, std::string_view pattern);

// --- timestamps (unix seconds, serialized as UTC ISO-8601) ---

std::string format_iso8601(std::int64_t unix_seconds);

// Accepts "YYYY-MM-DDTHH:MM:SSZ" and bare "YYYY-MM-DD" (midnight UTC).
std::optional<std::int64_t> parse_iso8601(std::string_view text);

// --- file IO ---

Bytes read_file(const std::filesystem::path& p);

// Write via temp file + rename so readers never see a partial file.
void atomic_write_file(const std::filesystem::path& p, std::string_view content);

// mtime in unix seconds plus birth time where the filesystem tracks one.
struct FileTimes {
    std::int64_t modified_at = 0;
    std::optional<std::int64_t> created_at;
};
std::optional<FileTimes> stat_times(const std::filesystem::path& p);

// --- path normalization for link resolution ---

// Normalizes an external-reference target lexically: strips file:// schemes,
// percent-decodes, converts backslashes, resolves against base_dir when
// relative, and collapses ./ and ../ segments. Never touches the filesystem.
std::string normalize_target_path(std::string_view raw_target, std::string_view base_dir);

// Lexical ../ and ./ collapse on an absolute slash path.
std::string lexically_normalize(std::string_view path);

std::string hex_encode(std::span<const std::uint8_t> data);

}  // namespace ssrisk
