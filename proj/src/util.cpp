#include "ssrisk/util.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <sys/types.h>
#include <unistd.h>

#include <cctype>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <stdexcept>

#include "ssrisk/errors.hpp"

namespace ssrisk {

namespace {
char fold(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }
}  // namespace

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = fold(c);
    return out;
}

bool icontains(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return true;
    if (needle.size() > haystack.size()) return false;
    for (size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
        size_t j = 0;
        while (j < needle.size() && fold(haystack[i + j]) == fold(needle[j])) ++j;
        if (j == needle.size()) return true;
    }
    return false;
}

bool glob_match(std::string_view text, std::string_view pattern) {
    // Iterative wildcard match with backtracking over the last '*'.
    size_t t = 0, p = 0;
    size_t star = std::string_view::npos, match = 0;
    while (t < text.size()) {
        if (p < pattern.size() &&
            (pattern[p] == '?' || fold(pattern[p]) == fold(text[t]))) {
            ++t;
            ++p;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            match = t;
        } else if (star != std::string_view::npos) {
            p = star + 1;
            t = ++match;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

bool matches_pattern(std::string_view text, std::string_view pattern) {
    if (pattern.find('*') != std::string_view::npos ||
        pattern.find('?') != std::string_view::npos) {
        return glob_match(text, pattern);
    }
    return icontains(text, pattern);
}

std::string format_iso8601(std::int64_t unix_seconds) {
    std::time_t t = static_cast<std::time_t>(unix_seconds);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[48];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

std::optional<std::int64_t> parse_iso8601(std::string_view text) {
    std::tm tm{};
    int y, mo, d, h = 0, mi = 0, s = 0;
    if (text.size() == 10) {
        if (std::sscanf(std::string(text).c_str(), "%d-%d-%d", &y, &mo, &d) != 3)
            return std::nullopt;
    } else {
        if (std::sscanf(std::string(text).c_str(), "%d-%d-%dT%d:%d:%d", &y, &mo, &d, &h, &mi,
                        &s) != 6)
            return std::nullopt;
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60) return std::nullopt;
    tm.tm_year = y - 1900;
    tm.tm_mon = mo - 1;
    tm.tm_mday = d;
    tm.tm_hour = h;
    tm.tm_min = mi;
    tm.tm_sec = s;
    return static_cast<std::int64_t>(timegm(&tm));
}

Bytes read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(errc::access_denied, "cannot open " + p.string());
    Bytes out;
    in.seekg(0, std::ios::end);
    auto len = in.tellg();
    if (len < 0) throw Error(errc::access_denied, "cannot size " + p.string());
    out.resize(static_cast<size_t>(len));
    in.seekg(0);
    if (len > 0) in.read(reinterpret_cast<char*>(out.data()), len);
    if (!in) throw Error(errc::access_denied, "short read on " + p.string());
    return out;
}

void atomic_write_file(const std::filesystem::path& p, std::string_view content) {
    auto tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(errc::report_write_failed, "cannot open " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw Error(errc::report_write_failed, "short write on " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, p, ec);
    if (ec) throw Error(errc::report_write_failed, "rename failed for " + p.string());
}

std::optional<FileTimes> stat_times(const std::filesystem::path& p) {
    struct statx stx{};
    if (statx(AT_FDCWD, p.c_str(), AT_SYMLINK_NOFOLLOW, STATX_MTIME | STATX_BTIME, &stx) != 0)
        return std::nullopt;
    FileTimes ft;
    ft.modified_at = stx.stx_mtime.tv_sec;
    if (stx.stx_mask & STATX_BTIME) ft.created_at = stx.stx_btime.tv_sec;
    return ft;
}

std::string lexically_normalize(std::string_view path) {
    std::vector<std::string> parts;
    size_t i = 0;
    while (i < path.size()) {
        size_t j = path.find('/', i);
        if (j == std::string_view::npos) j = path.size();
        std::string_view seg = path.substr(i, j - i);
        if (seg == "..") {
            if (!parts.empty()) parts.pop_back();
        } else if (!seg.empty() && seg != ".") {
            parts.emplace_back(seg);
        }
        i = j + 1;
    }
    std::string out;
    for (const auto& s : parts) {
        out += '/';
        out += s;
    }
    return out.empty() ? "/" : out;
}

namespace {
std::string percent_decode(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size() && std::isxdigit((unsigned char)s[i + 1]) &&
            std::isxdigit((unsigned char)s[i + 2])) {
            auto hexval = [](char c) {
                return c >= 'a' ? c - 'a' + 10 : c >= 'A' ? c - 'A' + 10 : c - '0';
            };
            out += static_cast<char>(hexval(s[i + 1]) * 16 + hexval(s[i + 2]));
            i += 2;
        } else {
            out += s[i];
        }
    }
    return out;
}
}  // namespace

std::string normalize_target_path(std::string_view raw_target, std::string_view base_dir) {
    std::string t = percent_decode(raw_target);
    for (char& c : t) {
        if (c == '\\') c = '/';
    }
    if (t.rfind("file:", 0) == 0) {
        t.erase(0, 5);
        while (t.size() >= 2 && t[0] == '/' && t[1] == '/') t.erase(0, 1);
        // "file:///C:/x" leaves "/C:/x"; drive-letter paths stay as-is below.
    }
    bool absolute = !t.empty() && t[0] == '/';
    if (!absolute && t.size() >= 2 && std::isalpha((unsigned char)t[0]) && t[1] == ':') {
        absolute = true;  // windows drive path
        t.insert(t.begin(), '/');
    }
    if (!absolute) {
        std::string joined(base_dir);
        if (joined.empty() || joined.back() != '/') joined += '/';
        joined += t;
        t = std::move(joined);
    }
    return lexically_normalize(t);
}

std::string hex_encode(std::span<const std::uint8_t> data) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (auto b : data) {
        out += digits[b >> 4];
        out += digits[b & 0xf];
    }
    return out;
}

}  // namespace ssrisk
