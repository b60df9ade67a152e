#include "ssrisk/workbook.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>

#include "ssrisk/util.hpp"
#include "ssrisk/xml_dom.hpp"
#include "ssrisk/zip_reader.hpp"

namespace ssrisk {

std::string_view to_string(SheetVisibility v) {
    switch (v) {
        case SheetVisibility::visible: return "visible";
        case SheetVisibility::hidden: return "hidden";
        case SheetVisibility::very_hidden: return "very-hidden";
    }
    return "visible";
}

std::optional<SheetVisibility> sheet_visibility_from_string(std::string_view s) {
    if (s == "visible") return SheetVisibility::visible;
    if (s == "hidden") return SheetVisibility::hidden;
    if (s == "very-hidden") return SheetVisibility::very_hidden;
    return std::nullopt;
}

std::string_view to_string(CellValueKind k) {
    switch (k) {
        case CellValueKind::number: return "number";
        case CellValueKind::text: return "text";
        case CellValueKind::boolean: return "boolean";
        case CellValueKind::error: return "error";
        case CellValueKind::empty: return "empty";
    }
    return "empty";
}

std::optional<CellValueKind> cell_value_kind_from_string(std::string_view s) {
    for (CellValueKind k : {CellValueKind::number, CellValueKind::text, CellValueKind::boolean,
                            CellValueKind::error, CellValueKind::empty}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

namespace {

constexpr std::uint64_t kPartBudget = 256u << 20;  // per extracted XML part

[[noreturn]] void fail(const std::string& why) { throw Error(errc::corrupt_workbook, why); }

// ---- OPC plumbing ----

std::string part_dir(const std::string& part) {
    auto slash = part.find_last_of('/');
    return slash == std::string::npos ? std::string() : part.substr(0, slash);
}

// Resolves a relationship target against the source part's directory.
std::string resolve_part_path(const std::string& base_dir, const std::string& target) {
    std::string t = target;
    for (char& c : t)
        if (c == '\\') c = '/';
    std::string joined;
    if (!t.empty() && t[0] == '/') {
        joined = t;
    } else {
        joined = "/" + base_dir + (base_dir.empty() ? "" : "/") + t;
    }
    return lexically_normalize(joined).substr(1);  // zip entry names carry no leading '/'
}

std::string rels_part_for(const std::string& part) {
    auto slash = part.find_last_of('/');
    std::string dir = slash == std::string::npos ? "" : part.substr(0, slash + 1);
    std::string name = slash == std::string::npos ? part : part.substr(slash + 1);
    return dir + "_rels/" + name + ".rels";
}

struct Relationship {
    std::string id;
    std::string type;
    std::string target;
    bool external = false;
};

std::vector<Relationship> read_rels(const zip::Archive& ar, const std::string& part) {
    std::vector<Relationship> rels;
    const zip::Entry* e = ar.find(rels_part_for(part));
    if (!e) return rels;
    xml::Node root = xml::parse(ar.extract(*e, kPartBudget));
    for (const auto& c : root.children) {
        if (c.name != "Relationship") continue;
        Relationship r;
        if (const auto* v = c.attr("Id")) r.id = *v;
        if (const auto* v = c.attr("Type")) r.type = *v;
        if (const auto* v = c.attr("Target")) r.target = *v;
        if (const auto* v = c.attr("TargetMode")) r.external = (*v == "External");
        rels.push_back(std::move(r));
    }
    return rels;
}

const Relationship* rel_by_id(const std::vector<Relationship>& rels, const std::string& id) {
    for (const auto& r : rels)
        if (r.id == id) return &r;
    return nullptr;
}

bool type_ends_with(const Relationship& r, std::string_view suffix) {
    return r.type.size() >= suffix.size() &&
           r.type.compare(r.type.size() - suffix.size(), suffix.size(), suffix) == 0;
}

xml::Node parse_part(const zip::Archive& ar, const std::string& part) {
    const zip::Entry* e = ar.find(part);
    if (!e) fail("missing part " + part);
    return xml::parse(ar.extract(*e, kPartBudget));
}

// ---- styles ----

const char* builtin_format(int id) {
    switch (id) {
        case 0: return "General";
        case 1: return "0";
        case 2: return "0.00";
        case 3: return "#,##0";
        case 4: return "#,##0.00";
        case 5: return "$#,##0_);($#,##0)";
        case 6: return "$#,##0_);[Red]($#,##0)";
        case 7: return "$#,##0.00_);($#,##0.00)";
        case 8: return "$#,##0.00_);[Red]($#,##0.00)";
        case 9: return "0%";
        case 10: return "0.00%";
        case 11: return "0.00E+00";
        case 12: return "# ?/?";
        case 13: return "# ?\?/??";  // '?\?' keeps the '??/' out of trigraph reach
        case 14: return "m/d/yyyy";
        case 15: return "d-mmm-yy";
        case 16: return "d-mmm";
        case 17: return "mmm-yy";
        case 18: return "h:mm AM/PM";
        case 19: return "h:mm:ss AM/PM";
        case 20: return "h:mm";
        case 21: return "h:mm:ss";
        case 22: return "m/d/yyyy h:mm";
        case 37: return "#,##0_);(#,##0)";
        case 38: return "#,##0_);[Red](#,##0)";
        case 39: return "#,##0.00_);(#,##0.00)";
        case 40: return "#,##0.00_);[Red](#,##0.00)";
        case 41: return "_(* #,##0_);_(* (#,##0);_(* \"-\"_);_(@_)";
        case 42: return "_($* #,##0_);_($* (#,##0);_($* \"-\"_);_(@_)";
        case 43: return "_(* #,##0.00_);_(* (#,##0.00);_(* \"-\"??_);_(@_)";
        case 44: return "_($* #,##0.00_);_($* (#,##0.00);_($* \"-\"??_);_(@_)";
        case 45: return "mm:ss";
        case 46: return "[h]:mm:ss";
        case 47: return "mm:ss.0";
        case 48: return "##0.0E+0";
        case 49: return "@";
        default: return "General";
    }
}

// Legacy indexed palette (the default 64-color table).
std::optional<std::string> indexed_color(int idx) {
    static const char* table[] = {
        "000000", "FFFFFF", "FF0000", "00FF00", "0000FF", "FFFF00", "FF00FF", "00FFFF",
        "000000", "FFFFFF", "FF0000", "00FF00", "0000FF", "FFFF00", "FF00FF", "00FFFF",
        "800000", "008000", "000080", "808000", "800080", "008080", "C0C0C0", "808080",
        "9999FF", "993366", "FFFFCC", "CCFFFF", "660066", "FF8080", "0066CC", "CCCCFF",
        "000080", "FF00FF", "FFFF00", "00FFFF", "800080", "800000", "008080", "0000FF",
        "00CCFF", "CCFFFF", "CCFFCC", "FFFF99", "99CCFF", "FF99CC", "CC99FF", "FFCC99",
        "3366FF", "33CCCC", "99CC00", "FFCC00", "FF9900", "FF6600", "666699", "969696",
        "003366", "339966", "003300", "333300", "993300", "993366", "333399", "333333",
    };
    if (idx >= 0 && idx < 64) return table[idx];
    if (idx == 64) return "000000";  // system foreground
    if (idx == 65) return "FFFFFF";  // system background
    return std::nullopt;
}

std::string to_upper_hex(const std::string& s) {
    std::string out = s;
    if (out.size() == 8) out = out.substr(2);  // ARGB -> RGB
    for (char& ch : out) ch = static_cast<char>(std::toupper((unsigned char)ch));
    return out;
}

struct ColorSpec {
    std::optional<std::string> rgb;  // "RRGGBB"
    std::optional<int> theme;
    double tint = 0.0;
    std::optional<int> indexed;
    bool present = false;
};

ColorSpec read_color(const xml::Node* color_node) {
    ColorSpec c;
    if (!color_node) return c;
    c.present = true;
    if (const auto* v = color_node->attr("rgb")) {
        std::string rgb = *v;
        if (rgb.size() == 8) rgb = rgb.substr(2);  // drop alpha
        for (char& ch : rgb) ch = static_cast<char>(std::toupper((unsigned char)ch));
        if (rgb.size() == 6) c.rgb = rgb;
    }
    if (const auto* v = color_node->attr("theme")) c.theme = std::atoi(v->c_str());
    if (const auto* v = color_node->attr("tint")) c.tint = std::atof(v->c_str());
    if (const auto* v = color_node->attr("indexed")) c.indexed = std::atoi(v->c_str());
    return c;
}

struct Styles {
    std::vector<std::string> formats;               // per cellXf
    std::vector<ColorSpec> font_colors;             // per cellXf
    std::vector<std::optional<ColorSpec>> fill_fg;  // per cellXf; nullopt = no fill,
                                                    // ColorSpec{present=false} = unresolvable
};

// Theme slot order after the clrMap swap Excel applies: 0 lt1, 1 dk1,
// 2 lt2, 3 dk2, 4..9 accent1-6, 10 hlink, 11 folHlink.
std::vector<std::optional<std::string>> read_theme(const zip::Archive& ar,
                                                   const std::string& part) {
    std::vector<std::optional<std::string>> slots(12);
    const zip::Entry* e = ar.find(part);
    if (!e) return slots;
    xml::Node root;
    try {
        root = xml::parse(ar.extract(*e, kPartBudget));
    } catch (...) {
        return slots;
    }
    const xml::Node* elements = root.child("themeElements");
    const xml::Node* scheme = elements ? elements->child("clrScheme") : nullptr;
    if (!scheme) return slots;
    auto color_of = [&](const char* name) -> std::optional<std::string> {
        const xml::Node* n = scheme->child(name);
        if (!n) return std::nullopt;
        if (const xml::Node* srgb = n->child("srgbClr")) {
            if (const auto* v = srgb->attr("val")) return to_upper_hex(*v);
        }
        if (const xml::Node* sys = n->child("sysClr")) {
            if (const auto* v = sys->attr("lastClr")) return to_upper_hex(*v);
        }
        return std::nullopt;
    };
    slots[0] = color_of("lt1");
    slots[1] = color_of("dk1");
    slots[2] = color_of("lt2");
    slots[3] = color_of("dk2");
    const char* accents[] = {"accent1", "accent2", "accent3", "accent4", "accent5", "accent6"};
    for (int i = 0; i < 6; ++i) slots[4 + i] = color_of(accents[i]);
    slots[10] = color_of("hlink");
    slots[11] = color_of("folHlink");
    return slots;
}

std::optional<std::string> resolve_color(const ColorSpec& c,
                                         const std::vector<std::optional<std::string>>& theme,
                                         std::optional<std::string> fallback) {
    if (!c.present) return fallback;
    if (c.rgb) return c.rgb;
    if (c.indexed) return indexed_color(*c.indexed);
    if (c.theme) {
        // Tinted theme colors are left unresolved: reporting them as a flat
        // RGB would manufacture false invisible-cell positives.
        if (std::abs(c.tint) > 1e-9) return std::nullopt;
        if (*c.theme >= 0 && static_cast<size_t>(*c.theme) < theme.size())
            return theme[*c.theme];
        return std::nullopt;
    }
    return fallback;  // "auto" colors follow the default
}

// ---- A1 helpers ----

std::uint32_t column_of_ref(std::string_view ref) {
    std::uint32_t col = 0;
    for (char c : ref) {
        if (c == '$') continue;
        if (c >= 'A' && c <= 'Z')
            col = col * 26 + static_cast<std::uint32_t>(c - 'A' + 1);
        else if (c >= 'a' && c <= 'z')
            col = col * 26 + static_cast<std::uint32_t>(c - 'a' + 1);
        else
            break;
    }
    return col;
}

std::uint32_t row_of_ref(std::string_view ref) {
    std::uint32_t row = 0;
    for (char c : ref) {
        if (c >= '0' && c <= '9') row = row * 10 + static_cast<std::uint32_t>(c - '0');
    }
    return row;
}

struct ColRange {
    std::uint32_t min, max;
};

}  // namespace

WorkbookFacts parse_workbook(const FileRecord& record, std::span<const std::uint8_t> bytes) {
    if (record.kind == FileKind::legacy_binary_spreadsheet)
        throw Error(errc::unsupported_format,
                    "legacy binary workbook; inventoried without metrics");
    if (record.kind == FileKind::encrypted_spreadsheet) {
        WorkbookFacts facts;
        facts.encrypted = true;
        facts.workbook_protected = true;  // open password is password protection
        facts.size_bytes = bytes.size();
        return facts;
    }
    if (record.kind != FileKind::ooxml_spreadsheet &&
        record.kind != FileKind::ooxml_macro_spreadsheet)
        throw Error(errc::unsupported_format, "not a workbook kind: " +
                                                  std::string(to_string(record.kind)));

    WorkbookFacts facts;
    facts.size_bytes = bytes.size();

    std::optional<zip::Archive> ar_opt;
    try {
        ar_opt = zip::Archive::open(bytes);
    } catch (const zip::ZipError& e) {
        fail("zip: " + e.detail);
    }
    if (!ar_opt) fail("no zip structure");
    const zip::Archive& ar = *ar_opt;

    try {
        // Root rels -> workbook part.
        auto root_rels = read_rels(ar, "");
        std::string wb_part;
        for (const auto& r : root_rels) {
            if (type_ends_with(r, "/officeDocument")) {
                wb_part = resolve_part_path("", r.target);
                break;
            }
        }
        if (wb_part.empty()) fail("no officeDocument relationship");
        std::string wb_dir = part_dir(wb_part);

        auto wb_rels = read_rels(ar, wb_part);
        xml::Node wb = parse_part(ar, wb_part);

        facts.workbook_protected = wb.child("workbookProtection") != nullptr;

        if (const xml::Node* dn = wb.child("definedNames")) {
            for (const auto& d : dn->children) {
                if (d.name != "definedName") continue;
                if (const auto* n = d.attr("name")) facts.defined_names.push_back(*n);
            }
        }

        // Macro presence: content type or the VBA part itself.
        if (record.kind == FileKind::ooxml_macro_spreadsheet) facts.has_macros = true;
        for (const auto& r : wb_rels) {
            if (type_ends_with(r, "/vbaProject")) facts.has_macros = true;
        }
        if (ar.find("xl/vbaProject.bin")) facts.has_macros = true;

        // Styles.
        Styles styles;
        std::vector<std::optional<std::string>> theme(12);
        for (const auto& r : wb_rels) {
            if (type_ends_with(r, "/theme"))
                theme = read_theme(ar, resolve_part_path(wb_dir, r.target));
        }
        for (const auto& r : wb_rels) {
            if (!type_ends_with(r, "/styles")) continue;
            xml::Node st = parse_part(ar, resolve_part_path(wb_dir, r.target));
            std::map<int, std::string> num_fmts;
            if (const xml::Node* fmts = st.child("numFmts")) {
                for (const auto& f : fmts->children) {
                    const auto* id = f.attr("numFmtId");
                    const auto* code = f.attr("formatCode");
                    if (id && code) num_fmts[std::atoi(id->c_str())] = *code;
                }
            }
            std::vector<ColorSpec> fonts;
            if (const xml::Node* fs = st.child("fonts")) {
                for (const auto& f : fs->children) {
                    if (f.name == "font") fonts.push_back(read_color(f.child("color")));
                }
            }
            // nullopt marks patternType="none"; present=false marks gradients
            // and patterns we do not resolve.
            std::vector<std::optional<ColorSpec>> fills;
            if (const xml::Node* fl = st.child("fills")) {
                for (const auto& f : fl->children) {
                    if (f.name != "fill") continue;
                    const xml::Node* pf = f.child("patternFill");
                    if (!pf) {
                        fills.push_back(ColorSpec{});  // gradient: unresolvable
                        continue;
                    }
                    const auto* pt = pf->attr("patternType");
                    std::string pattern = pt ? *pt : "none";
                    if (pattern == "none") {
                        fills.push_back(std::nullopt);
                    } else if (pattern == "solid") {
                        fills.push_back(read_color(pf->child("fgColor")));
                    } else {
                        fills.push_back(ColorSpec{});
                    }
                }
            }
            if (const xml::Node* xfs = st.child("cellXfs")) {
                for (const auto& xf : xfs->children) {
                    if (xf.name != "xf") continue;
                    int fmt_id = 0, font_id = 0, fill_id = 0;
                    if (const auto* v = xf.attr("numFmtId")) fmt_id = std::atoi(v->c_str());
                    if (const auto* v = xf.attr("fontId")) font_id = std::atoi(v->c_str());
                    if (const auto* v = xf.attr("fillId")) fill_id = std::atoi(v->c_str());
                    auto it = num_fmts.find(fmt_id);
                    styles.formats.push_back(it != num_fmts.end() ? it->second
                                                                  : builtin_format(fmt_id));
                    styles.font_colors.push_back(
                        font_id >= 0 && static_cast<size_t>(font_id) < fonts.size()
                            ? fonts[font_id]
                            : ColorSpec{});
                    styles.fill_fg.push_back(
                        fill_id >= 0 && static_cast<size_t>(fill_id) < fills.size()
                            ? fills[fill_id]
                            : std::optional<ColorSpec>{std::nullopt});
                }
            }
        }

        // Shared strings.
        std::vector<std::string> shared;
        for (const auto& r : wb_rels) {
            if (!type_ends_with(r, "/sharedStrings")) continue;
            xml::Node sst = parse_part(ar, resolve_part_path(wb_dir, r.target));
            for (const auto& si : sst.children) {
                if (si.name != "si") continue;
                std::string s;
                if (const xml::Node* t = si.child("t")) {
                    s = t->text;
                } else {
                    for (const auto& run : si.children) {
                        if (run.name != "r") continue;
                        if (const xml::Node* t = run.child("t")) s += t->text;
                    }
                }
                shared.push_back(std::move(s));
            }
        }

        // External reference targets, in workbook order so [n] indexes align.
        if (const xml::Node* ext = wb.child("externalReferences")) {
            for (const auto& er : ext->children) {
                if (er.name != "externalReference") continue;
                const auto* rid = er.attr("id");
                std::string target;
                if (rid) {
                    if (const Relationship* rel = rel_by_id(wb_rels, *rid)) {
                        std::string link_part = resolve_part_path(wb_dir, rel->target);
                        for (const auto& lr : read_rels(ar, link_part)) {
                            if (type_ends_with(lr, "/externalLinkPath")) {
                                target = lr.target;
                                break;
                            }
                        }
                    }
                }
                facts.external_targets.push_back(std::move(target));
            }
        }

        // Worksheets, in workbook order.
        const xml::Node* sheets = wb.child("sheets");
        if (!sheets) fail("workbook has no sheets element");
        for (const auto& sh : sheets->children) {
            if (sh.name != "sheet") continue;
            SheetFacts sf;
            if (const auto* n = sh.attr("name")) sf.name = *n;
            if (const auto* st = sh.attr("state")) {
                if (*st == "hidden") sf.visibility = SheetVisibility::hidden;
                else if (*st == "veryHidden") sf.visibility = SheetVisibility::very_hidden;
            }
            const auto* rid = sh.attr("id");
            const Relationship* rel = rid ? rel_by_id(wb_rels, *rid) : nullptr;
            if (!rel) fail("sheet " + sf.name + " has no part");
            xml::Node ws = parse_part(ar, resolve_part_path(wb_dir, rel->target));

            sf.protected_ = ws.child("sheetProtection") != nullptr;

            std::vector<ColRange> hidden_cols;
            if (const xml::Node* cols = ws.child("cols")) {
                for (const auto& col : cols->children) {
                    if (col.name != "col") continue;
                    bool hidden = false;
                    if (const auto* h = col.attr("hidden"))
                        hidden = (*h == "1" || *h == "true");
                    if (const auto* w = col.attr("width"))
                        if (std::atof(w->c_str()) == 0.0) hidden = true;
                    if (!hidden) continue;
                    std::uint32_t mn = 0, mx = 0;
                    if (const auto* v = col.attr("min"))
                        mn = static_cast<std::uint32_t>(std::atoi(v->c_str()));
                    if (const auto* v = col.attr("max"))
                        mx = static_cast<std::uint32_t>(std::atoi(v->c_str()));
                    if (mn == 0 || mx < mn) continue;
                    hidden_cols.push_back({mn, mx});
                    sf.hidden_column_count += mx - mn + 1;
                }
            }
            auto col_hidden = [&](std::uint32_t c) {
                return std::any_of(hidden_cols.begin(), hidden_cols.end(),
                                   [&](const ColRange& r) { return c >= r.min && c <= r.max; });
            };

            std::set<std::uint32_t> hidden_rows;
            const xml::Node* data = ws.child("sheetData");
            if (data) {
                for (const auto& row : data->children) {
                    if (row.name != "row") continue;
                    bool hidden = false;
                    if (const auto* h = row.attr("hidden"))
                        hidden = (*h == "1" || *h == "true");
                    if (const auto* ht = row.attr("ht"))
                        if (std::atof(ht->c_str()) == 0.0) hidden = true;
                    if (hidden) {
                        if (const auto* rr = row.attr("r"))
                            hidden_rows.insert(
                                static_cast<std::uint32_t>(std::atoi(rr->c_str())));
                    }
                }
            }
            sf.hidden_row_count = static_cast<std::uint32_t>(hidden_rows.size());

            if (data) {
                for (const auto& row : data->children) {
                    if (row.name != "row") continue;
                    for (const auto& c : row.children) {
                        if (c.name != "c") continue;
                        const auto* ref = c.attr("r");
                        if (!ref) continue;
                        std::string type = "n";
                        if (const auto* t = c.attr("t")) type = *t;
                        const xml::Node* v = c.child("v");
                        const xml::Node* f = c.child("f");
                        const xml::Node* is = c.child("is");

                        if (f && !f->text.empty()) {
                            FormulaFacts ff;
                            ff.sheet = sf.name;
                            ff.ref = *ref;
                            ff.text = f->text;
                            if (const auto* ft = f->attr("t")) ff.is_array = (*ft == "array");
                            facts.formulas.push_back(std::move(ff));
                        }

                        CellSnapshot cell;
                        cell.sheet = sf.name;
                        cell.ref = *ref;
                        if (type == "s") {
                            cell.value_kind = CellValueKind::text;
                            if (v) {
                                size_t idx = static_cast<size_t>(std::atol(v->text.c_str()));
                                if (idx < shared.size()) cell.cached_value = shared[idx];
                            }
                        } else if (type == "str") {
                            cell.value_kind = CellValueKind::text;
                            if (v) cell.cached_value = v->text;
                        } else if (type == "inlineStr") {
                            cell.value_kind = CellValueKind::text;
                            if (is) {
                                if (const xml::Node* t = is->child("t"))
                                    cell.cached_value = t->text;
                            }
                        } else if (type == "b") {
                            cell.value_kind = CellValueKind::boolean;
                            if (v) cell.cached_value = (v->text == "1") ? "TRUE" : "FALSE";
                        } else if (type == "e") {
                            cell.value_kind = CellValueKind::error;
                            if (v) cell.cached_value = v->text;
                        } else {
                            if (v && !v->text.empty()) {
                                cell.value_kind = CellValueKind::number;
                                cell.cached_value = v->text;
                            } else {
                                cell.value_kind = CellValueKind::empty;
                            }
                        }
                        // Cells with no stored content at all are not kept.
                        if (cell.value_kind == CellValueKind::empty && !f) continue;

                        size_t style = 0;
                        if (const auto* s = c.attr("s"))
                            style = static_cast<size_t>(std::atol(s->c_str()));
                        if (style < styles.formats.size()) {
                            cell.number_format = styles.formats[style];
                            cell.font_color =
                                resolve_color(styles.font_colors[style], theme,
                                              std::string("000000"));
                            const auto& fill = styles.fill_fg[style];
                            if (!fill.has_value()) {
                                cell.fill_color = "FFFFFF";  // unfilled: effective white
                            } else {
                                cell.fill_color = resolve_color(*fill, theme, std::nullopt);
                            }
                        } else {
                            cell.number_format = "General";
                            cell.font_color = "000000";
                            cell.fill_color = "FFFFFF";
                        }
                        std::uint32_t row_idx = row_of_ref(*ref);
                        cell.in_hidden_row = hidden_rows.count(row_idx) > 0;
                        cell.in_hidden_column = col_hidden(column_of_ref(*ref));
                        facts.cells.push_back(std::move(cell));
                    }
                }
            }
            facts.sheets.push_back(std::move(sf));
        }

        // Document properties: core, app, then custom; later sources win.
        auto absorb_simple_props = [&](const char* part) {
            const zip::Entry* e = ar.find(part);
            if (!e) return;
            xml::Node props = xml::parse(ar.extract(*e, kPartBudget));
            for (const auto& p : props.children) {
                if (!p.text.empty()) facts.doc_properties[p.name] = p.text;
            }
        };
        absorb_simple_props("docProps/core.xml");
        absorb_simple_props("docProps/app.xml");
        if (const zip::Entry* e = ar.find("docProps/custom.xml")) {
            xml::Node props = xml::parse(ar.extract(*e, kPartBudget));
            for (const auto& p : props.children) {
                if (p.name != "property") continue;
                const auto* name = p.attr("name");
                if (!name) continue;
                std::string value;
                for (const auto& vchild : p.children) value += vchild.text;
                facts.doc_properties[*name] = value;
            }
        }
    } catch (const zip::ZipError& e) {
        fail("zip: " + e.detail);
    } catch (const xml::XmlError& e) {
        fail(std::string("xml: ") + e.what());
    }
    return facts;
}

std::uint32_t count_invisible_cells(const WorkbookFacts& facts) {
    std::uint32_t count = 0;
    for (const auto& c : facts.cells) {
        if (c.value_kind == CellValueKind::empty) continue;
        if (c.font_color && c.fill_color && *c.font_color == *c.fill_color) ++count;
    }
    return count;
}

HiddenCensus hidden_census(const WorkbookFacts& facts) {
    HiddenCensus hc;
    for (const auto& s : facts.sheets) {
        if (s.visibility == SheetVisibility::hidden) ++hc.hidden_sheets;
        if (s.visibility == SheetVisibility::very_hidden) ++hc.very_hidden_sheets;
        hc.hidden_rows += s.hidden_row_count;
        hc.hidden_columns += s.hidden_column_count;
    }
    return hc;
}

}  // namespace ssrisk
