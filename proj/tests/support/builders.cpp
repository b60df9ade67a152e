#include "support/builders.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <random>
#include <stdexcept>

namespace testsup {

Bytes bytes_of(std::string_view s) { return Bytes(s.begin(), s.end()); }
std::string string_of(const Bytes& b) { return std::string(b.begin(), b.end()); }

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

// ---- ZIP ----

namespace {

void put16(Bytes& b, std::uint16_t v) {
    b.push_back(v & 0xFF);
    b.push_back((v >> 8) & 0xFF);
}
void put32(Bytes& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back((v >> (8 * i)) & 0xFF);
}

Bytes deflate_raw(const Bytes& data) {
    z_stream zs{};
    if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, -MAX_WBITS, 8,
                     Z_DEFAULT_STRATEGY) != Z_OK)
        throw std::runtime_error("deflateInit2");
    Bytes out(deflateBound(&zs, data.size()));
    zs.next_in = const_cast<Bytef*>(data.data());
    zs.avail_in = static_cast<uInt>(data.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    if (deflate(&zs, Z_FINISH) != Z_STREAM_END) {
        deflateEnd(&zs);
        throw std::runtime_error("deflate");
    }
    out.resize(zs.total_out);
    deflateEnd(&zs);
    return out;
}

}  // namespace

Bytes build_zip(const std::vector<ZipEntrySpec>& entries) {
    Bytes out;
    struct Central {
        std::string name;
        std::uint16_t method;
        std::uint32_t crc, csize, usize, offset;
    };
    std::vector<Central> centrals;
    const std::uint16_t dos_time = 0x6000, dos_date = 0x5821;  // 2024-01-01 12:00

    for (const auto& e : entries) {
        std::uint32_t crc = static_cast<std::uint32_t>(
            crc32(0L, e.data.data(), static_cast<uInt>(e.data.size())));
        Bytes payload = e.deflate ? deflate_raw(e.data) : e.data;
        std::uint16_t method = e.deflate ? 8 : 0;
        std::uint32_t offset = static_cast<std::uint32_t>(out.size());

        put32(out, 0x04034b50);
        put16(out, 20);        // version needed
        put16(out, 0);         // flags
        put16(out, method);
        put16(out, dos_time);
        put16(out, dos_date);
        put32(out, crc);
        put32(out, static_cast<std::uint32_t>(payload.size()));
        put32(out, static_cast<std::uint32_t>(e.data.size()));
        put16(out, static_cast<std::uint16_t>(e.name.size()));
        put16(out, 0);         // extra len
        out.insert(out.end(), e.name.begin(), e.name.end());
        out.insert(out.end(), payload.begin(), payload.end());

        centrals.push_back({e.name, method, crc,
                            static_cast<std::uint32_t>(payload.size()),
                            static_cast<std::uint32_t>(e.data.size()), offset});
    }

    std::uint32_t cd_start = static_cast<std::uint32_t>(out.size());
    for (const auto& c : centrals) {
        put32(out, 0x02014b50);
        put16(out, 20);  // version made by
        put16(out, 20);  // version needed
        put16(out, 0);
        put16(out, c.method);
        put16(out, dos_time);
        put16(out, dos_date);
        put32(out, c.crc);
        put32(out, c.csize);
        put32(out, c.usize);
        put16(out, static_cast<std::uint16_t>(c.name.size()));
        put16(out, 0);  // extra
        put16(out, 0);  // comment
        put16(out, 0);  // disk
        put16(out, 0);  // internal attrs
        put32(out, 0);  // external attrs
        put32(out, c.offset);
        out.insert(out.end(), c.name.begin(), c.name.end());
    }
    std::uint32_t cd_size = static_cast<std::uint32_t>(out.size()) - cd_start;

    put32(out, 0x06054b50);
    put16(out, 0);
    put16(out, 0);
    put16(out, static_cast<std::uint16_t>(centrals.size()));
    put16(out, static_cast<std::uint16_t>(centrals.size()));
    put32(out, cd_size);
    put32(out, cd_start);
    put16(out, 0);  // comment
    return out;
}

// ---- workbook ----

namespace {

const char* kStockTheme[12] = {
    // dk1,lt1,dk2,lt2,accent1..6,hlink,folHlink — the stock Office palette
    "000000", "FFFFFF", "44546A", "E7E6E6", "4472C4", "ED7D31",
    "A5A5A5", "FFC000", "5B9BD5", "70AD47", "0563C1", "954F72",
};

std::string theme_xml(const std::vector<std::string>& colors) {
    auto slot = [&](size_t i) -> std::string {
        return i < colors.size() && !colors[i].empty() ? colors[i] : kStockTheme[i];
    };
    std::string x =
        "<?xml version=\"1.0\"?>"
        "<a:theme xmlns:a=\"http://schemas.openxmlformats.org/drawingml/2006/main\" "
        "name=\"Office\"><a:themeElements><a:clrScheme name=\"Office\">";
    const char* names[12] = {"dk1", "lt1", "dk2", "lt2", "accent1", "accent2",
                             "accent3", "accent4", "accent5", "accent6",
                             "hlink", "folHlink"};
    for (int i = 0; i < 12; ++i) {
        x += "<a:" + std::string(names[i]) + "><a:srgbClr val=\"" + slot(i) +
             "\"/></a:" + names[i] + ">";
    }
    x += "</a:clrScheme><a:fontScheme name=\"Office\"><a:majorFont><a:latin "
         "typeface=\"Calibri\"/></a:majorFont><a:minorFont><a:latin "
         "typeface=\"Calibri\"/></a:minorFont></a:fontScheme>"
         "<a:fmtScheme name=\"Office\"><a:fillStyleLst><a:solidFill><a:schemeClr "
         "val=\"phClr\"/></a:solidFill></a:fillStyleLst><a:lnStyleLst><a:ln><a:solidFill>"
         "<a:schemeClr val=\"phClr\"/></a:solidFill></a:ln></a:lnStyleLst>"
         "<a:effectStyleLst><a:effectStyle><a:effectLst/></a:effectStyle></a:effectStyleLst>"
         "<a:bgFillStyleLst><a:solidFill><a:schemeClr val=\"phClr\"/></a:solidFill>"
         "</a:bgFillStyleLst></a:fmtScheme></a:themeElements></a:theme>";
    return x;
}

}  // namespace

Bytes build_xlsx(const WorkbookSpec& spec) {
    std::vector<StyleSpec> styles = spec.styles;
    if (styles.empty()) styles.push_back(StyleSpec{});

    // Shared string table, collected from "s" cells in encounter order.
    std::vector<std::string> sst;
    auto sst_index = [&](const std::string& s) {
        for (size_t i = 0; i < sst.size(); ++i)
            if (sst[i] == s) return i;
        sst.push_back(s);
        return sst.size() - 1;
    };

    // Sheets.
    std::vector<std::pair<std::string, std::string>> sheet_parts;  // part name, xml
    for (size_t si = 0; si < spec.sheets.size(); ++si) {
        const SheetSpec& sh = spec.sheets[si];
        std::string x =
            "<?xml version=\"1.0\"?>"
            "<worksheet xmlns=\"http://schemas.openxmlformats.org/spreadsheetml/2006/main\">";
        if (!sh.hidden_cols.empty()) {
            x += "<cols>";
            for (auto [mn, mx] : sh.hidden_cols)
                x += "<col min=\"" + std::to_string(mn) + "\" max=\"" + std::to_string(mx) +
                     "\" hidden=\"1\" width=\"0\" customWidth=\"1\"/>";
            x += "</cols>";
        }
        // Group cells by row number, preserving order within a row.
        std::map<std::uint32_t, std::vector<const CellSpec*>> rows;
        for (const auto& c : sh.cells) {
            std::uint32_t row = 0;
            for (char ch : c.ref)
                if (ch >= '0' && ch <= '9') row = row * 10 + (ch - '0');
            rows[row].push_back(&c);
        }
        for (std::uint32_t hr : sh.hidden_rows) rows[hr];  // ensure row exists
        x += "<sheetData>";
        for (const auto& [rnum, cells] : rows) {
            bool hidden = std::find(sh.hidden_rows.begin(), sh.hidden_rows.end(), rnum) !=
                          sh.hidden_rows.end();
            x += "<row r=\"" + std::to_string(rnum) + "\"" +
                 (hidden ? " hidden=\"1\"" : "") + ">";
            for (const CellSpec* c : cells) {
                x += "<c r=\"" + c->ref + "\"";
                if (!c->type.empty()) x += " t=\"" + c->type + "\"";
                if (c->style >= 0) x += " s=\"" + std::to_string(c->style) + "\"";
                x += ">";
                if (!c->formula.empty()) {
                    x += "<f";
                    if (c->array_formula) x += " t=\"array\" ref=\"" + c->ref + "\"";
                    x += ">" + xml_escape(c->formula) + "</f>";
                }
                if (c->type == "s") {
                    x += "<v>" + std::to_string(sst_index(c->value)) + "</v>";
                } else if (c->type == "inlineStr") {
                    x += "<is><t>" + xml_escape(c->value) + "</t></is>";
                } else if (!c->value.empty()) {
                    x += "<v>" + xml_escape(c->value) + "</v>";
                }
                x += "</c>";
            }
            x += "</row>";
        }
        x += "</sheetData>";
        if (sh.protected_)
            x += "<sheetProtection sheet=\"1\" objects=\"1\" scenarios=\"1\"/>";
        x += "</worksheet>";
        sheet_parts.emplace_back("xl/worksheets/sheet" + std::to_string(si + 1) + ".xml", x);
    }

    // styles.xml: one font per style; fills = none, gray125, then solids.
    std::string styles_xml =
        "<?xml version=\"1.0\"?>"
        "<styleSheet xmlns=\"http://schemas.openxmlformats.org/spreadsheetml/2006/main\">";
    {
        std::string num_fmts;
        int custom_fmt = 0;
        std::vector<int> fmt_ids(styles.size(), 0);
        for (size_t i = 0; i < styles.size(); ++i) {
            if (styles[i].number_format != "General") {
                fmt_ids[i] = 164 + custom_fmt++;
                num_fmts += "<numFmt numFmtId=\"" + std::to_string(fmt_ids[i]) +
                            "\" formatCode=\"" + xml_escape(styles[i].number_format) +
                            "\"/>";
            }
        }
        if (custom_fmt)
            styles_xml += "<numFmts count=\"" + std::to_string(custom_fmt) + "\">" +
                          num_fmts + "</numFmts>";

        styles_xml += "<fonts count=\"" + std::to_string(styles.size()) + "\">";
        for (const auto& s : styles) {
            styles_xml += "<font><sz val=\"11\"/>";
            if (!s.font_rgb.empty())
                styles_xml += "<color rgb=\"FF" + s.font_rgb + "\"/>";
            else if (s.font_theme >= 0) {
                styles_xml += "<color theme=\"" + std::to_string(s.font_theme) + "\"";
                if (s.font_tint != 0.0)
                    styles_xml += " tint=\"" + std::to_string(s.font_tint) + "\"";
                styles_xml += "/>";
            }
            styles_xml += "<name val=\"Calibri\"/></font>";
        }
        styles_xml += "</fonts>";

        std::vector<int> fill_ids(styles.size(), 0);
        std::string solid_fills;
        int solids = 0;
        for (size_t i = 0; i < styles.size(); ++i) {
            if (styles[i].fill_gray125) {
                fill_ids[i] = 1;
            } else if (!styles[i].fill_rgb.empty()) {
                fill_ids[i] = 2 + solids++;
                solid_fills += "<fill><patternFill patternType=\"solid\"><fgColor rgb=\"FF" +
                               styles[i].fill_rgb +
                               "\"/><bgColor indexed=\"64\"/></patternFill></fill>";
            }
        }
        styles_xml += "<fills count=\"" + std::to_string(2 + solids) + "\">"
                      "<fill><patternFill patternType=\"none\"/></fill>"
                      "<fill><patternFill patternType=\"gray125\"/></fill>" +
                      solid_fills + "</fills>";
        styles_xml += "<borders count=\"1\"><border/></borders>"
                      "<cellStyleXfs count=\"1\"><xf numFmtId=\"0\" fontId=\"0\" "
                      "fillId=\"0\" borderId=\"0\"/></cellStyleXfs>";
        styles_xml += "<cellXfs count=\"" + std::to_string(styles.size()) + "\">";
        for (size_t i = 0; i < styles.size(); ++i) {
            styles_xml += "<xf numFmtId=\"" + std::to_string(fmt_ids[i]) + "\" fontId=\"" +
                          std::to_string(i) + "\" fillId=\"" + std::to_string(fill_ids[i]) +
                          "\" borderId=\"0\" xfId=\"0\"";
            if (fmt_ids[i]) styles_xml += " applyNumberFormat=\"1\"";
            if (fill_ids[i]) styles_xml += " applyFill=\"1\"";
            styles_xml += "/>";
        }
        styles_xml += "</cellXfs></styleSheet>";
    }

    // workbook.xml + its rels.
    std::string wb_xml =
        "<?xml version=\"1.0\"?>"
        "<workbook xmlns=\"http://schemas.openxmlformats.org/spreadsheetml/2006/main\" "
        "xmlns:r=\"http://schemas.openxmlformats.org/officeDocument/2006/relationships\">";
    if (spec.workbook_protected)
        wb_xml += "<workbookProtection lockStructure=\"1\"/>";
    wb_xml += "<sheets>";
    std::string wb_rels =
        "<?xml version=\"1.0\"?>"
        "<Relationships xmlns=\"http://schemas.openxmlformats.org/package/2006/"
        "relationships\">";
    int next_rid = 1;
    for (size_t si = 0; si < spec.sheets.size(); ++si) {
        std::string rid = "rId" + std::to_string(next_rid++);
        wb_xml += "<sheet name=\"" + xml_escape(spec.sheets[si].name) + "\" sheetId=\"" +
                  std::to_string(si + 1) + "\"";
        if (spec.sheets[si].state != "visible")
            wb_xml += " state=\"" + spec.sheets[si].state + "\"";
        wb_xml += " r:id=\"" + rid + "\"/>";
        wb_rels += "<Relationship Id=\"" + rid +
                   "\" Type=\"http://schemas.openxmlformats.org/officeDocument/2006/"
                   "relationships/worksheet\" Target=\"worksheets/sheet" +
                   std::to_string(si + 1) + ".xml\"/>";
    }
    wb_xml += "</sheets>";
    if (!spec.defined_names.empty()) {
        wb_xml += "<definedNames>";
        for (const auto& n : spec.defined_names)
            wb_xml += "<definedName name=\"" + xml_escape(n) + "\">Sheet1!$A$1</definedName>";
        wb_xml += "</definedNames>";
    }
    std::vector<std::string> ext_rids;
    if (!spec.external_targets.empty()) {
        wb_xml += "<externalReferences>";
        for (size_t i = 0; i < spec.external_targets.size(); ++i) {
            std::string rid = "rId" + std::to_string(next_rid++);
            ext_rids.push_back(rid);
            wb_xml += "<externalReference r:id=\"" + rid + "\"/>";
        }
        wb_xml += "</externalReferences>";
    }
    wb_xml += "</workbook>";

    std::string styles_rid = "rId" + std::to_string(next_rid++);
    wb_rels += "<Relationship Id=\"" + styles_rid +
               "\" Type=\"http://schemas.openxmlformats.org/officeDocument/2006/"
               "relationships/styles\" Target=\"styles.xml\"/>";
    std::string theme_rid = "rId" + std::to_string(next_rid++);
    wb_rels += "<Relationship Id=\"" + theme_rid +
               "\" Type=\"http://schemas.openxmlformats.org/officeDocument/2006/"
               "relationships/theme\" Target=\"theme/theme1.xml\"/>";
    if (!sst.empty()) {
        std::string rid = "rId" + std::to_string(next_rid++);
        wb_rels += "<Relationship Id=\"" + rid +
                   "\" Type=\"http://schemas.openxmlformats.org/officeDocument/2006/"
                   "relationships/sharedStrings\" Target=\"sharedStrings.xml\"/>";
    }
    for (size_t i = 0; i < spec.external_targets.size(); ++i) {
        wb_rels += "<Relationship Id=\"" + ext_rids[i] +
                   "\" Type=\"http://schemas.openxmlformats.org/officeDocument/2006/"
                   "relationships/externalLink\" Target=\"externalLinks/externalLink" +
                   std::to_string(i + 1) + ".xml\"/>";
    }
    if (spec.macro) {
        std::string rid = "rId" + std::to_string(next_rid++);
        wb_rels += "<Relationship Id=\"" + rid +
                   "\" Type=\"http://schemas.microsoft.com/office/2006/relationships/"
                   "vbaProject\" Target=\"vbaProject.bin\"/>";
    }
    wb_rels += "</Relationships>";

    // Content types.
    std::string ct =
        "<?xml version=\"1.0\"?>"
        "<Types xmlns=\"http://schemas.openxmlformats.org/package/2006/content-types\">"
        "<Default Extension=\"rels\" ContentType=\"application/vnd.openxmlformats-package."
        "relationships+xml\"/>"
        "<Default Extension=\"xml\" ContentType=\"application/xml\"/>";
    if (spec.macro)
        ct += "<Default Extension=\"bin\" ContentType=\"application/vnd.ms-office."
              "vbaProject\"/>";
    ct += std::string("<Override PartName=\"/xl/workbook.xml\" ContentType=\"") +
          (spec.macro
               ? "application/vnd.ms-excel.sheet.macroEnabled.main+xml"
               : "application/vnd.openxmlformats-officedocument.spreadsheetml.sheet.main+"
                 "xml") +
          "\"/>";
    for (size_t si = 0; si < spec.sheets.size(); ++si)
        ct += "<Override PartName=\"/xl/worksheets/sheet" + std::to_string(si + 1) +
              ".xml\" ContentType=\"application/vnd.openxmlformats-officedocument."
              "spreadsheetml.worksheet+xml\"/>";
    ct += "<Override PartName=\"/xl/styles.xml\" ContentType=\"application/vnd."
          "openxmlformats-officedocument.spreadsheetml.styles+xml\"/>"
          "<Override PartName=\"/xl/theme/theme1.xml\" ContentType=\"application/vnd."
          "openxmlformats-officedocument.theme+xml\"/>";
    if (!sst.empty())
        ct += "<Override PartName=\"/xl/sharedStrings.xml\" ContentType=\"application/"
              "vnd.openxmlformats-officedocument.spreadsheetml.sharedStrings+xml\"/>";
    for (size_t i = 0; i < spec.external_targets.size(); ++i)
        ct += "<Override PartName=\"/xl/externalLinks/externalLink" +
              std::to_string(i + 1) +
              ".xml\" ContentType=\"application/vnd.openxmlformats-officedocument."
              "spreadsheetml.externalLink+xml\"/>";
    ct += "<Override PartName=\"/docProps/core.xml\" ContentType=\"application/vnd."
          "openxmlformats-package.core-properties+xml\"/>"
          "<Override PartName=\"/docProps/app.xml\" ContentType=\"application/vnd."
          "openxmlformats-officedocument.extended-properties+xml\"/>";
    if (!spec.custom_props.empty())
        ct += "<Override PartName=\"/docProps/custom.xml\" ContentType=\"application/vnd."
              "openxmlformats-officedocument.custom-properties+xml\"/>";
    ct += "</Types>";

    std::string root_rels =
        "<?xml version=\"1.0\"?>"
        "<Relationships xmlns=\"http://schemas.openxmlformats.org/package/2006/"
        "relationships\">"
        "<Relationship Id=\"rId1\" Type=\"http://schemas.openxmlformats.org/"
        "officeDocument/2006/relationships/officeDocument\" Target=\"xl/workbook.xml\"/>"
        "<Relationship Id=\"rId2\" Type=\"http://schemas.openxmlformats.org/package/2006/"
        "relationships/metadata/core-properties\" Target=\"docProps/core.xml\"/>"
        "<Relationship Id=\"rId3\" Type=\"http://schemas.openxmlformats.org/"
        "officeDocument/2006/relationships/extended-properties\" "
        "Target=\"docProps/app.xml\"/>";
    if (!spec.custom_props.empty())
        root_rels +=
            "<Relationship Id=\"rId4\" Type=\"http://schemas.openxmlformats.org/"
            "officeDocument/2006/relationships/custom-properties\" "
            "Target=\"docProps/custom.xml\"/>";
    root_rels += "</Relationships>";

    // docProps.
    std::string core =
        "<?xml version=\"1.0\"?>"
        "<cp:coreProperties xmlns:cp=\"http://schemas.openxmlformats.org/package/2006/"
        "metadata/core-properties\" xmlns:dc=\"http://purl.org/dc/elements/1.1/\" "
        "xmlns:dcterms=\"http://purl.org/dc/terms/\">";
    for (const auto& [k, v] : spec.core_props) {
        std::string tag = (k == "creator" || k == "title" || k == "subject" ||
                           k == "description")
                              ? "dc:" + k
                              : "cp:" + k;
        std::string plain = tag.substr(3);
        core += "<" + tag + ">" + xml_escape(v) + "</" + tag + ">";
        (void)plain;
    }
    core += "</cp:coreProperties>";
    std::string app =
        "<?xml version=\"1.0\"?>"
        "<Properties xmlns=\"http://schemas.openxmlformats.org/officeDocument/2006/"
        "extended-properties\"><Application>calc</Application></Properties>";

    std::vector<ZipEntrySpec> entries;
    entries.push_back({"[Content_Types].xml", bytes_of(ct), true});
    entries.push_back({"_rels/.rels", bytes_of(root_rels), true});
    entries.push_back({"xl/workbook.xml", bytes_of(wb_xml), true});
    entries.push_back({"xl/_rels/workbook.xml.rels", bytes_of(wb_rels), true});
    entries.push_back({"xl/styles.xml", bytes_of(styles_xml), true});
    entries.push_back({"xl/theme/theme1.xml", bytes_of(theme_xml(spec.theme_colors)), true});
    for (auto& [name, xml] : sheet_parts) entries.push_back({name, bytes_of(xml), true});
    if (!sst.empty()) {
        std::string sst_xml =
            "<?xml version=\"1.0\"?>"
            "<sst xmlns=\"http://schemas.openxmlformats.org/spreadsheetml/2006/main\" "
            "count=\"" + std::to_string(sst.size()) + "\" uniqueCount=\"" +
            std::to_string(sst.size()) + "\">";
        for (const auto& s : sst) sst_xml += "<si><t>" + xml_escape(s) + "</t></si>";
        sst_xml += "</sst>";
        entries.push_back({"xl/sharedStrings.xml", bytes_of(sst_xml), true});
    }
    for (size_t i = 0; i < spec.external_targets.size(); ++i) {
        std::string link =
            "<?xml version=\"1.0\"?>"
            "<externalLink xmlns=\"http://schemas.openxmlformats.org/spreadsheetml/2006/"
            "main\" xmlns:r=\"http://schemas.openxmlformats.org/officeDocument/2006/"
            "relationships\"><externalBook r:id=\"rId1\"/></externalLink>";
        std::string link_rels =
            "<?xml version=\"1.0\"?>"
            "<Relationships xmlns=\"http://schemas.openxmlformats.org/package/2006/"
            "relationships\"><Relationship Id=\"rId1\" Type=\"http://schemas."
            "openxmlformats.org/officeDocument/2006/relationships/externalLinkPath\" "
            "Target=\"" + xml_escape(spec.external_targets[i]) +
            "\" TargetMode=\"External\"/></Relationships>";
        entries.push_back({"xl/externalLinks/externalLink" + std::to_string(i + 1) + ".xml",
                           bytes_of(link), true});
        entries.push_back({"xl/externalLinks/_rels/externalLink" + std::to_string(i + 1) +
                               ".xml.rels",
                           bytes_of(link_rels), true});
    }
    if (spec.macro) {
        Bytes vba = {0xD0, 0xCF, 0x11, 0xE0, 0xA1, 0xB1, 0x1A, 0xE1};
        vba.resize(64, 0);
        entries.push_back({"xl/vbaProject.bin", vba, true});
    }
    entries.push_back({"docProps/core.xml", bytes_of(core), true});
    entries.push_back({"docProps/app.xml", bytes_of(app), true});
    if (!spec.custom_props.empty()) {
        std::string custom =
            "<?xml version=\"1.0\"?>"
            "<Properties xmlns=\"http://schemas.openxmlformats.org/officeDocument/2006/"
            "custom-properties\" xmlns:vt=\"http://schemas.openxmlformats.org/"
            "officeDocument/2006/docPropsVTypes\">";
        int pid = 2;
        for (const auto& [k, v] : spec.custom_props) {
            custom += "<property fmtid=\"{D5CDD505-2E9C-101B-9397-08002B2CF9AE}\" pid=\"" +
                      std::to_string(pid++) + "\" name=\"" + xml_escape(k) +
                      "\"><vt:lpwstr>" + xml_escape(v) + "</vt:lpwstr></property>";
        }
        custom += "</Properties>";
        entries.push_back({"docProps/custom.xml", bytes_of(custom), true});
    }
    return build_zip(entries);
}

// ---- compound file ----

namespace {

void cput16(Bytes& b, size_t off, std::uint16_t v) {
    b[off] = v & 0xFF;
    b[off + 1] = (v >> 8) & 0xFF;
}
void cput32(Bytes& b, size_t off, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b[off + i] = (v >> (8 * i)) & 0xFF;
}

void write_dirent(Bytes& sector, size_t slot, const std::string& name,
                  std::uint8_t object_type, std::uint32_t left, std::uint32_t right,
                  std::uint32_t child, std::uint32_t start, std::uint32_t size) {
    size_t base = slot * 128;
    for (size_t i = 0; i < name.size() && i < 31; ++i) {
        sector[base + i * 2] = static_cast<std::uint8_t>(name[i]);
        sector[base + i * 2 + 1] = 0;
    }
    cput16(sector, base + 64, static_cast<std::uint16_t>((name.size() + 1) * 2));
    sector[base + 66] = object_type;
    sector[base + 67] = 1;  // black
    cput32(sector, base + 68, left);
    cput32(sector, base + 72, right);
    cput32(sector, base + 76, child);
    cput32(sector, base + 116, start);
    cput32(sector, base + 120, size);
    cput32(sector, base + 124, 0);  // size high dword stays 0 for v3
}

}  // namespace

Bytes build_cfb(const std::vector<std::pair<std::string, Bytes>>& streams) {
    if (streams.size() > 3) throw std::runtime_error("build_cfb: at most 3 streams");
    constexpr std::uint32_t FREESECT = 0xFFFFFFFF, ENDOFCHAIN = 0xFFFFFFFE,
                            FATSECT = 0xFFFFFFFD;
    const size_t sec = 512;

    // Pad every stream to a sector multiple, minimum 4096 so nothing needs
    // the mini stream.
    std::vector<Bytes> data;
    std::vector<std::uint32_t> sizes;
    for (const auto& [name, bytes] : streams) {
        Bytes d = bytes;
        if (d.size() < 4096) d.resize(4096, 0);
        sizes.push_back(static_cast<std::uint32_t>(d.size()));
        if (d.size() % sec) d.resize(((d.size() / sec) + 1) * sec, 0);
        data.push_back(std::move(d));
    }

    // Layout: sector 0 = FAT, sector 1 = directory, then stream chains.
    std::vector<std::uint32_t> fat(sec / 4, FREESECT);
    fat[0] = FATSECT;
    fat[1] = ENDOFCHAIN;  // directory: one sector
    std::uint32_t next_free = 2;
    std::vector<std::uint32_t> starts;
    for (const auto& d : data) {
        std::uint32_t nsec = static_cast<std::uint32_t>(d.size() / sec);
        starts.push_back(next_free);
        for (std::uint32_t i = 0; i < nsec; ++i)
            fat[next_free + i] = (i + 1 == nsec) ? ENDOFCHAIN : next_free + i + 1;
        next_free += nsec;
    }
    if (next_free > fat.size()) throw std::runtime_error("build_cfb: FAT overflow");

    Bytes header(sec, 0);
    const std::uint8_t sig[8] = {0xD0, 0xCF, 0x11, 0xE0, 0xA1, 0xB1, 0x1A, 0xE1};
    std::memcpy(header.data(), sig, 8);
    cput16(header, 24, 0x003E);  // minor
    cput16(header, 26, 0x0003);  // major: v3
    cput16(header, 28, 0xFFFE);  // little endian
    cput16(header, 30, 9);       // sector shift
    cput16(header, 32, 6);       // mini sector shift
    cput32(header, 44, 1);       // FAT sector count
    cput32(header, 48, 1);       // first directory sector
    cput32(header, 56, 4096);    // mini stream cutoff
    cput32(header, 60, ENDOFCHAIN);  // first minifat
    cput32(header, 64, 0);
    cput32(header, 68, ENDOFCHAIN);  // first DIFAT
    cput32(header, 72, 0);
    cput32(header, 76, 0);  // DIFAT[0] = FAT sector 0
    for (size_t i = 1; i < 109; ++i) cput32(header, 76 + i * 4, FREESECT);

    Bytes dir(sec, 0);
    // Sibling chain keeps the directory a valid tree: root -> first stream,
    // each stream's right sibling is the next.
    std::uint32_t root_child = streams.empty() ? FREESECT : 1;
    write_dirent(dir, 0, "Root Entry", 5, FREESECT, FREESECT, root_child, ENDOFCHAIN, 0);
    for (size_t i = 0; i < streams.size(); ++i) {
        std::uint32_t right = (i + 1 < streams.size()) ? static_cast<std::uint32_t>(i + 2)
                                                       : FREESECT;
        write_dirent(dir, i + 1, streams[i].first, 2, FREESECT, right, FREESECT,
                     starts[i], sizes[i]);
    }

    Bytes out;
    out.insert(out.end(), header.begin(), header.end());
    Bytes fat_bytes(sec, 0);
    for (size_t i = 0; i < fat.size(); ++i) cput32(fat_bytes, i * 4, fat[i]);
    out.insert(out.end(), fat_bytes.begin(), fat_bytes.end());
    out.insert(out.end(), dir.begin(), dir.end());
    for (const auto& d : data) out.insert(out.end(), d.begin(), d.end());
    return out;
}

Bytes legacy_workbook_bytes() {
    Bytes stream = {0x09, 0x08, 0x10, 0x00, 0x00, 0x06, 0x05, 0x00};  // BOF-ish
    return build_cfb({{"Workbook", stream}});
}

Bytes encrypted_package_bytes() {
    Bytes info = {0x04, 0x00, 0x04, 0x00, 0x40, 0x00, 0x00, 0x00};
    Bytes pkg = {0x50, 0x4B, 0x03, 0x04};  // ciphertext placeholder
    return build_cfb({{"EncryptionInfo", info}, {"EncryptedPackage", pkg}});
}

ssrisk::InventorySnapshot synthetic_snapshot(std::size_t record_count, std::uint32_t seed) {
    using namespace ssrisk;
    std::mt19937 rng(seed);
    std::uniform_int_distribution<std::uint64_t> size(100, 5'000'000);
    std::uniform_int_distribution<std::uint64_t> count(0, 40);
    std::uniform_int_distribution<int> coin(0, 1);
    RiskConfig cfg = default_risk_config();

    InventorySnapshot snap;
    snap.scan_id = "fixture-" + std::to_string(seed);
    snap.started_at = 1'700'000'000;
    snap.finished_at = 1'700'000'120;

    for (std::size_t i = 0; i < record_count; ++i) {
        SnapshotRecord rec;
        char name[32];
        std::snprintf(name, sizeof(name), "wb%04zu", i);
        switch (i % 5) {
            case 0:
                rec.file.path = "/corpus/" + std::string(name) + ".xlsx";
                rec.file.kind = FileKind::ooxml_spreadsheet;
                rec.file.extension = "xlsx";
                break;
            case 1:
                rec.file.path = "/corpus/" + std::string(name) + ".xlsm";
                rec.file.kind = FileKind::ooxml_macro_spreadsheet;
                rec.file.extension = "xlsm";
                break;
            case 2:
                rec.file.path = "/corpus/" + std::string(name) + ".xls";
                rec.file.kind = FileKind::legacy_binary_spreadsheet;
                rec.file.extension = "xls";
                break;
            case 3:
                rec.file.path = "/corpus/" + std::string(name) + ".xlsx";
                rec.file.kind = FileKind::encrypted_spreadsheet;
                rec.file.extension = "xlsx";
                break;
            default:
                rec.file.path = "/corpus/bundles/" + std::string(name) + ".zip";
                rec.file.container_chain = {"inner/archive.zip", std::string(name) + ".xlsx"};
                rec.file.kind = FileKind::ooxml_spreadsheet;
                rec.file.extension = "xlsx";
                break;
        }
        rec.file.size_bytes = size(rng);
        rec.file.modified_at = 1'690'000'000 + std::int64_t(i) * 3600;
        if (coin(rng)) rec.file.created_at = rec.file.modified_at - 86'400;
        std::string hash;
        std::uniform_int_distribution<int> nibble(0, 15);
        for (int n = 0; n < 64; ++n) hash += "0123456789abcdef"[nibble(rng)];
        rec.file.content_hash = hash;
        rec.file.extension_mismatch =
            compute_extension_mismatch(rec.file.kind, rec.file.extension);

        if (rec.file.kind == FileKind::encrypted_spreadsheet) {
            rec.metrics.metrics_available = false;
            rec.metrics.is_password_protected = true;
            rec.metrics.workbook_size_bytes = rec.file.size_bytes;
        } else {
            rec.metrics.worksheet_count = 1 + count(rng) % 8;
            rec.metrics.formula_count = count(rng);
            rec.metrics.formula_error_count = count(rng) % 4;
            rec.metrics.array_formula_count = count(rng) % 3;
            rec.metrics.max_if_nesting = count(rng) % 6;
            rec.metrics.external_link_count = count(rng) % 3;
            rec.metrics.has_macros = rec.file.kind == FileKind::ooxml_macro_spreadsheet;
            rec.metrics.named_item_count = count(rng) % 10;
            rec.metrics.invisible_cell_count = count(rng) % 2;
            rec.metrics.hidden_element_count = count(rng) % 7;
            rec.metrics.very_hidden_sheet_count = count(rng) % 2;
            rec.metrics.workbook_size_bytes = rec.file.size_bytes;
            rec.metrics.is_password_protected = coin(rng) == 1;
            rec.metrics.unparsed_formula_count = count(rng) % 2;
        }

        for (std::uint64_t t = 0; t < rec.metrics.external_link_count; ++t) {
            if (coin(rng)) {
                rec.targets.push_back(
                    {"../feeds/source" + std::to_string(t) + ".xlsx",
                     EdgeSource::external_part});
            } else {
                rec.targets.push_back(
                    {"[" + std::to_string(t + 1) + "]", EdgeSource::formula_ref});
            }
        }

        auto [cs, cids] = score_complexity(rec.metrics, cfg.complexity_rules);
        rec.assessment.complexity_score = cs;
        rec.assessment.matched_complexity_rule_ids = cids;
        rec.assessment.materiality_score = count(rng) * 5;
        if (rec.assessment.materiality_score >= 40) {
            rec.assessment.matched_materiality_rule_ids = {"income-cell-text"};
        }
        rec.assessment.materiality_band_index =
            band_index(rec.assessment.materiality_score, cfg.materiality_scale);
        rec.assessment.complexity_band_index = band_index(cs, cfg.complexity_scale);
        rec.assessment.materiality_band =
            cfg.materiality_scale.labels[rec.assessment.materiality_band_index];
        rec.assessment.complexity_band =
            cfg.complexity_scale.labels[rec.assessment.complexity_band_index];
        rec.assessment.risk = assess(rec.assessment.materiality_band_index,
                                     rec.assessment.complexity_band_index, cfg.matrix);
        if (rec.assessment.materiality_band_index < 2 && coin(rng)) {
            rec.assessment.inherited_critical = true;
            rec.assessment.effective_materiality_band = cfg.materiality_scale.labels[2];
            rec.assessment.risk =
                assess(2, rec.assessment.complexity_band_index, cfg.matrix);
        } else {
            rec.assessment.effective_materiality_band = rec.assessment.materiality_band;
        }
        snap.records.push_back(std::move(rec));
    }

    std::sort(snap.records.begin(), snap.records.end(),
              [](const SnapshotRecord& a, const SnapshotRecord& b) {
                  return FileIdentityLess{}(a.file, b.file);
              });

    snap.errors.push_back({"access-denied", "/corpus/locked.xlsx", {}, "permission denied"});
    snap.errors.push_back({"corrupt-archive",
                           "/corpus/bundles/dead.zip",
                           {"payload.zip"},
                           "bad central directory"});
    return snap;
}

}  // namespace testsup
