#include "ssrisk/sniff.hpp"

#include <algorithm>

#include "ssrisk/cfb.hpp"
#include "ssrisk/util.hpp"
#include "ssrisk/xml_dom.hpp"
#include "ssrisk/zip_reader.hpp"

namespace ssrisk {

namespace {

// Content types that mark the OPC package as a workbook.
bool is_workbook_main_type(std::string_view ct) {
    return ct.find("spreadsheetml.sheet.main") != std::string_view::npos ||
           ct.find("spreadsheetml.template.main") != std::string_view::npos ||
           ct.find("ms-excel.sheet.main") != std::string_view::npos ||
           ct.find("ms-excel.sheet.macroEnabled.main") != std::string_view::npos ||
           ct.find("ms-excel.template.macroEnabled.main") != std::string_view::npos ||
           ct.find("ms-excel.addin.macroEnabled.main") != std::string_view::npos ||
           ct.find("ms-excel.sheet.binary.macroEnabled.main") != std::string_view::npos;
}

bool is_macro_type(std::string_view ct) { return icontains(ct, "macroenabled"); }

bool is_vba_type(std::string_view ct) {
    return ct.find("ms-office.vbaProject") != std::string_view::npos;
}

FileKind sniff_zip(std::span<const std::uint8_t> bytes) {
    std::optional<zip::Archive> archive;
    try {
        archive = zip::Archive::open(bytes);
    } catch (const zip::ZipError&) {
        return FileKind::other;  // signature without readable structure
    }
    if (!archive) return FileKind::other;

    const zip::Entry* ct_entry = archive->find("[Content_Types].xml");
    if (!ct_entry) return FileKind::zip_archive;

    bool workbook = false, macro = false;
    try {
        // The content-types part is small; 16 MiB is far beyond any real one.
        Bytes ct_bytes = archive->extract(*ct_entry, 16u << 20);
        xml::Node root = xml::parse(ct_bytes);
        for (const auto& child : root.children) {
            const std::string* ct = child.attr("ContentType");
            if (!ct) continue;
            if (child.name == "Override" || child.name == "Default") {
                if (is_workbook_main_type(*ct)) {
                    workbook = true;
                    if (is_macro_type(*ct)) macro = true;
                }
                if (is_vba_type(*ct)) macro = true;
            }
        }
    } catch (const zip::ZipError&) {
        return FileKind::zip_archive;
    } catch (const xml::XmlError&) {
        return FileKind::zip_archive;
    }
    if (!workbook) {
        // A stray vbaProject content type without a workbook part: still a
        // macro container only if the workbook part exists; fall back to the
        // raw part listing for packages with minimal content types.
        return FileKind::zip_archive;
    }
    if (!macro) {
        for (const auto& e : archive->entries()) {
            if (e.name == "xl/vbaProject.bin") {
                macro = true;
                break;
            }
        }
    }
    return macro ? FileKind::ooxml_macro_spreadsheet : FileKind::ooxml_spreadsheet;
}

FileKind sniff_cfb(std::span<const std::uint8_t> bytes) {
    auto names = cfb::list_stream_names(bytes);
    if (!names) return FileKind::other;
    bool enc_info = false, enc_pkg = false, workbook_stream = false;
    for (const auto& n : *names) {
        if (n == "EncryptionInfo") enc_info = true;
        if (n == "EncryptedPackage") enc_pkg = true;
        if (n == "Workbook" || n == "Book") workbook_stream = true;
    }
    if (enc_info && enc_pkg) return FileKind::encrypted_spreadsheet;
    if (workbook_stream) return FileKind::legacy_binary_spreadsheet;
    return FileKind::other;
}

}  // namespace

FileKind sniff_kind(std::span<const std::uint8_t> bytes) {
    if (zip::has_zip_signature(bytes)) return sniff_zip(bytes);
    if (cfb::has_cfb_signature(bytes)) return sniff_cfb(bytes);
    return FileKind::other;
}

}  // namespace ssrisk
