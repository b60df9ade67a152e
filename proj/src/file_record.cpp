#include "ssrisk/file_record.hpp"

#include <array>

#include "ssrisk/util.hpp"

namespace ssrisk {

std::string_view to_string(FileKind k) {
    switch (k) {
        case FileKind::ooxml_spreadsheet: return "ooxml-spreadsheet";
        case FileKind::ooxml_macro_spreadsheet: return "ooxml-macro-spreadsheet";
        case FileKind::legacy_binary_spreadsheet: return "legacy-binary-spreadsheet";
        case FileKind::encrypted_spreadsheet: return "encrypted-spreadsheet";
        case FileKind::zip_archive: return "zip-archive";
        case FileKind::other: return "other";
    }
    return "other";
}

std::optional<FileKind> file_kind_from_string(std::string_view s) {
    for (FileKind k : {FileKind::ooxml_spreadsheet, FileKind::ooxml_macro_spreadsheet,
                       FileKind::legacy_binary_spreadsheet, FileKind::encrypted_spreadsheet,
                       FileKind::zip_archive, FileKind::other}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

bool is_spreadsheet_kind(FileKind k) {
    return k == FileKind::ooxml_spreadsheet || k == FileKind::ooxml_macro_spreadsheet ||
           k == FileKind::legacy_binary_spreadsheet || k == FileKind::encrypted_spreadsheet;
}

std::string FileRecord::display_name() const {
    const std::string& source = container_chain.empty() ? path : container_chain.back();
    auto slash = source.find_last_of('/');
    return slash == std::string::npos ? source : source.substr(slash + 1);
}

std::string FileRecord::identity() const {
    std::string out = path;
    for (const auto& c : container_chain) {
        out += "::";
        out += c;
    }
    return out;
}

std::string extension_of(std::string_view name) {
    auto slash = name.find_last_of('/');
    if (slash != std::string_view::npos) name = name.substr(slash + 1);
    auto dot = name.find_last_of('.');
    if (dot == std::string_view::npos || dot == 0 || dot + 1 == name.size()) return {};
    return to_lower(name.substr(dot + 1));
}

bool is_spreadsheet_extension(std::string_view ext) {
    static constexpr std::array<std::string_view, 10> kExts = {
        "xls", "xlt", "xla", "xlsx", "xlsm", "xltx", "xltm", "xlsb", "xlam", "xlw"};
    for (auto e : kExts) {
        if (e == ext) return true;
    }
    return false;
}

bool compute_extension_mismatch(FileKind kind, std::string_view ext) {
    bool claims = is_spreadsheet_extension(ext);
    if (is_spreadsheet_kind(kind)) return !claims;
    return claims;
}

}  // namespace ssrisk
