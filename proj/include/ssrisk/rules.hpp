#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ssrisk/errors.hpp"
#include "ssrisk/file_record.hpp"
#include "ssrisk/formula.hpp"
#include "ssrisk/workbook.hpp"

namespace ssrisk {

// --- materiality rules -------------------------------------------------

enum class MaterialityKind {
    cell_text_contains,
    currency_exceeds,
    numeric_exceeds,
    doc_property_matches,
    file_name_matches,
    sheet_name_matches,
    path_matches,
    has_external_links,
};

std::string_view to_string(MaterialityKind k);
std::optional<MaterialityKind> materiality_kind_from_string(std::string_view s);

// Pattern kinds carry `pattern` (glob when it has wildcards, case-insensitive
// substring otherwise); the two exceeds kinds carry `threshold`;
// has-external-links carries neither.
struct MaterialityRule {
    std::string id;
    MaterialityKind kind = MaterialityKind::cell_text_contains;
    std::string pattern;
    std::optional<double> threshold;
    std::uint64_t points = 0;

    bool operator==(const MaterialityRule&) const = default;
};

// --- complexity rules ---------------------------------------------------

enum class Metric {
    worksheet_count,
    formula_count,
    formula_error_count,
    array_formula_count,
    max_if_nesting,
    external_link_count,
    has_macros,
    named_item_count,
    invisible_cell_count,
    hidden_element_count,
    very_hidden_sheet_count,
    workbook_size_bytes,
    is_password_protected,
    unparsed_formula_count,
};

std::string_view to_string(Metric m);
std::optional<Metric> metric_from_string(std::string_view s);
bool metric_is_boolean(Metric m);

enum class Comparator { greater_than, at_least, is_true };

std::string_view to_string(Comparator c);
std::optional<Comparator> comparator_from_string(std::string_view s);

struct ComplexityRule {
    std::string id;
    Metric metric = Metric::formula_count;
    Comparator comparator = Comparator::greater_than;
    std::optional<double> threshold;
    std::uint64_t points = 0;

    bool operator==(const ComplexityRule&) const = default;
};

// --- banding and the risk matrix -----------------------------------------

// score < lower_cut -> labels[0]; lower_cut <= score < upper_cut ->
// labels[1]; score >= upper_cut -> labels[2].
struct BandScale {
    std::uint64_t lower_cut = 40;
    std::uint64_t upper_cut = 80;
    std::array<std::string, 3> labels;

    bool operator==(const BandScale&) const = default;
};

enum class RiskLevel { low, medium, high };

std::string_view to_string(RiskLevel r);
std::optional<RiskLevel> risk_level_from_string(std::string_view s);

// cells[materiality band][complexity band], band index 0 = lowest.
struct RiskMatrix {
    std::array<std::array<RiskLevel, 3>, 3> cells{};

    bool operator==(const RiskMatrix&) const = default;
};

// --- computed per-workbook state ------------------------------------------

// One value per complexity metric. Encrypted workbooks cannot be opened, so
// they carry metrics_available=false: only the protection flag and the size
// are trustworthy and everything else stays zero.
struct MetricsProfile {
    bool metrics_available = true;
    std::uint64_t worksheet_count = 0;
    std::uint64_t formula_count = 0;
    std::uint64_t formula_error_count = 0;
    std::uint64_t array_formula_count = 0;
    std::uint64_t max_if_nesting = 0;
    std::uint64_t external_link_count = 0;
    bool has_macros = false;
    std::uint64_t named_item_count = 0;
    std::uint64_t invisible_cell_count = 0;
    std::uint64_t hidden_element_count = 0;
    std::uint64_t very_hidden_sheet_count = 0;
    std::uint64_t workbook_size_bytes = 0;
    bool is_password_protected = false;
    std::uint64_t unparsed_formula_count = 0;

    bool operator==(const MetricsProfile&) const = default;
};

struct RiskAssessment {
    std::uint64_t materiality_score = 0;
    std::uint64_t complexity_score = 0;
    std::vector<std::string> matched_materiality_rule_ids;
    std::vector<std::string> matched_complexity_rule_ids;
    std::size_t materiality_band_index = 0;
    std::size_t complexity_band_index = 0;
    std::string materiality_band;
    std::string complexity_band;
    RiskLevel risk = RiskLevel::low;
    bool inherited_critical = false;
    std::string effective_materiality_band;

    bool operator==(const RiskAssessment&) const = default;
};

// Rule grids, scales, and matrix as one unit; what the pipeline config
// carries and validates.
struct RiskConfig {
    std::vector<MaterialityRule> materiality_rules;
    std::vector<ComplexityRule> complexity_rules;
    BandScale materiality_scale;
    BandScale complexity_scale;
    RiskMatrix matrix;

    bool operator==(const RiskConfig&) const = default;
};

// --- defaults ------------------------------------------------------------

std::vector<MaterialityRule> default_materiality_rules();
std::vector<ComplexityRule> default_complexity_rules();
BandScale default_materiality_scale();
BandScale default_complexity_scale();
RiskMatrix default_matrix();
RiskConfig default_risk_config();

// --- validation ------------------------------------------------------------

// Field-precise `config-invalid` on malformed rules/scales;
// `matrix-not-monotone` when raising a band lowers the mapped risk.
// `field_prefix` seeds the dotted path in error messages.
void validate_materiality_rules(const std::vector<MaterialityRule>& rules,
                                std::string_view field_prefix = "materiality_rules");
void validate_complexity_rules(const std::vector<ComplexityRule>& rules,
                               std::string_view field_prefix = "complexity_rules");
void validate_scale(const BandScale& scale, std::string_view field_prefix);
void validate_matrix(const RiskMatrix& matrix);
void validate_risk_config(const RiskConfig& config);

// --- scoring -----------------------------------------------------------

// Distinct external workbook targets: the workbook's external parts plus any
// '[n]' formula references, resolved through the part list when the index is
// in range and kept as the literal "[n]" marker otherwise. Sorted, deduped.
std::vector<std::string> collect_external_targets(
    const WorkbookFacts& facts, const std::vector<formula::Analysis>& analyses);

MetricsProfile compute_metrics(const WorkbookFacts& facts,
                               const std::vector<formula::Analysis>& analyses);

// Each rule fires at most once per workbook (existential match); the score is
// the sum of fired points. Encrypted workbooks still expose name/path facts,
// so file-name/path rules can fire on them.
std::pair<std::uint64_t, std::vector<std::string>> score_materiality(
    const WorkbookFacts& facts, const FileRecord& record,
    const std::vector<MaterialityRule>& rules);

// Unavailable metrics restrict firing to is-password-protected and
// workbook-size-bytes rules.
std::pair<std::uint64_t, std::vector<std::string>> score_complexity(
    const MetricsProfile& profile, const std::vector<ComplexityRule>& rules);

std::size_t band_index(std::uint64_t score, const BandScale& scale);
const std::string& band(std::uint64_t score, const BandScale& scale);

RiskLevel assess(std::size_t materiality_band, std::size_t complexity_band,
                 const RiskMatrix& matrix);

// Full per-workbook assessment: score both axes, band them, and look the risk
// up in the matrix. Propagation may later raise the effective materiality
// band; at this stage effective == own.
RiskAssessment assess_workbook(const WorkbookFacts& facts, const FileRecord& record,
                               const MetricsProfile& profile, const RiskConfig& config);

}  // namespace ssrisk
