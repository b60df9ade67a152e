#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ssrisk/errors.hpp"
#include "ssrisk/file_record.hpp"

namespace ssrisk {

enum class SheetVisibility { visible, hidden, very_hidden };

std::string_view to_string(SheetVisibility v);
std::optional<SheetVisibility> sheet_visibility_from_string(std::string_view s);

struct SheetFacts {
    std::string name;
    SheetVisibility visibility = SheetVisibility::visible;
    std::uint32_t hidden_row_count = 0;
    std::uint32_t hidden_column_count = 0;
    bool protected_ = false;

    bool operator==(const SheetFacts&) const = default;
};

enum class CellValueKind { number, text, boolean, error, empty };

std::string_view to_string(CellValueKind k);
std::optional<CellValueKind> cell_value_kind_from_string(std::string_view s);

struct CellSnapshot {
    std::string sheet;
    std::string ref;  // A1-style
    CellValueKind value_kind = CellValueKind::empty;
    std::string cached_value;   // text rendering of the stored value
    std::string number_format;  // resolved format code, "General" by default
    std::optional<std::string> font_color;  // resolved "RRGGBB"
    std::optional<std::string> fill_color;  // effective fill; "FFFFFF" when unfilled
    bool in_hidden_row = false;
    bool in_hidden_column = false;

    bool operator==(const CellSnapshot&) const = default;
};

struct FormulaFacts {
    std::string sheet;
    std::string ref;
    std::string text;  // source without leading '='
    bool is_array = false;

    bool operator==(const FormulaFacts&) const = default;
};

struct WorkbookFacts {
    std::vector<SheetFacts> sheets;
    std::vector<CellSnapshot> cells;  // non-empty cells only
    std::vector<FormulaFacts> formulas;
    std::vector<std::string> defined_names;
    std::vector<std::string> external_targets;  // raw strings, workbook order
    bool has_macros = false;
    bool encrypted = false;
    bool workbook_protected = false;
    std::map<std::string, std::string> doc_properties;
    std::uint64_t size_bytes = 0;

    bool operator==(const WorkbookFacts&) const = default;
};

// Extracts structural facts from an OOXML workbook, read-only; cached values
// are reported as stored and formulas are never evaluated. encrypted-
// spreadsheet records degrade to size/protection facts. Throws Error with
// code `corrupt-workbook` on structural damage and `unsupported-format` for
// legacy binary input.
WorkbookFacts parse_workbook(const FileRecord& record, std::span<const std::uint8_t> bytes);

// Non-empty cells whose resolved font color equals their effective fill
// color. Missing or unresolvable color information counts as visible.
std::uint32_t count_invisible_cells(const WorkbookFacts& facts);

struct HiddenCensus {
    std::uint32_t hidden_sheets = 0;
    std::uint32_t very_hidden_sheets = 0;
    std::uint32_t hidden_rows = 0;
    std::uint32_t hidden_columns = 0;

    bool operator==(const HiddenCensus&) const = default;
};

HiddenCensus hidden_census(const WorkbookFacts& facts);

}  // namespace ssrisk
