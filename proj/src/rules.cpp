#include "ssrisk/rules.hpp"

#include <cmath>
#include <cstdlib>
#include <set>

#include "ssrisk/util.hpp"

namespace ssrisk {

namespace {

struct KindName {
    MaterialityKind kind;
    const char* name;
};

constexpr KindName kMaterialityKinds[] = {
    {MaterialityKind::cell_text_contains, "cell-text-contains"},
    {MaterialityKind::currency_exceeds, "currency-exceeds"},
    {MaterialityKind::numeric_exceeds, "numeric-exceeds"},
    {MaterialityKind::doc_property_matches, "doc-property-matches"},
    {MaterialityKind::file_name_matches, "file-name-matches"},
    {MaterialityKind::sheet_name_matches, "sheet-name-matches"},
    {MaterialityKind::path_matches, "path-matches"},
    {MaterialityKind::has_external_links, "has-external-links"},
};

struct MetricName {
    Metric metric;
    const char* name;
};

constexpr MetricName kMetrics[] = {
    {Metric::worksheet_count, "worksheet-count"},
    {Metric::formula_count, "formula-count"},
    {Metric::formula_error_count, "formula-error-count"},
    {Metric::array_formula_count, "array-formula-count"},
    {Metric::max_if_nesting, "max-if-nesting"},
    {Metric::external_link_count, "external-link-count"},
    {Metric::has_macros, "has-macros"},
    {Metric::named_item_count, "named-item-count"},
    {Metric::invisible_cell_count, "invisible-cell-count"},
    {Metric::hidden_element_count, "hidden-element-count"},
    {Metric::very_hidden_sheet_count, "very-hidden-sheet-count"},
    {Metric::workbook_size_bytes, "workbook-size-bytes"},
    {Metric::is_password_protected, "is-password-protected"},
    {Metric::unparsed_formula_count, "unparsed-formula-count"},
};

bool kind_wants_pattern(MaterialityKind k) {
    switch (k) {
        case MaterialityKind::cell_text_contains:
        case MaterialityKind::doc_property_matches:
        case MaterialityKind::file_name_matches:
        case MaterialityKind::sheet_name_matches:
        case MaterialityKind::path_matches:
            return true;
        default:
            return false;
    }
}

bool kind_wants_threshold(MaterialityKind k) {
    return k == MaterialityKind::currency_exceeds || k == MaterialityKind::numeric_exceeds;
}

// Currency indicator in a number-format code: a currency symbol or the
// "[$..." locale-currency prefix accounting codes use.
bool format_is_currency(const std::string& fmt) {
    if (fmt.find('$') != std::string::npos) return true;
    static const char* kSymbols[] = {"\xE2\x82\xAC" /* € */, "\xC2\xA3" /* £ */,
                                     "\xC2\xA5" /* ¥ */, "\xE2\x82\xB9" /* ₹ */,
                                     "\xE2\x82\xA9" /* ₩ */};
    for (const char* sym : kSymbols) {
        if (fmt.find(sym) != std::string::npos) return true;
    }
    return false;
}

std::optional<double> numeric_value(const CellSnapshot& cell) {
    if (cell.value_kind != CellValueKind::number) return std::nullopt;
    const char* begin = cell.cached_value.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin || !std::isfinite(v)) return std::nullopt;
    return v;
}

bool rule_fires(const MaterialityRule& rule, const WorkbookFacts& facts,
                const FileRecord& record) {
    switch (rule.kind) {
        case MaterialityKind::cell_text_contains:
            for (const auto& cell : facts.cells) {
                if (cell.value_kind == CellValueKind::text &&
                    matches_pattern(cell.cached_value, rule.pattern)) {
                    return true;
                }
            }
            return false;
        case MaterialityKind::currency_exceeds:
            for (const auto& cell : facts.cells) {
                if (!format_is_currency(cell.number_format)) continue;
                auto v = numeric_value(cell);
                if (v && *v > *rule.threshold) return true;
            }
            return false;
        case MaterialityKind::numeric_exceeds:
            for (const auto& cell : facts.cells) {
                auto v = numeric_value(cell);
                if (v && *v > *rule.threshold) return true;
            }
            return false;
        case MaterialityKind::doc_property_matches:
            for (const auto& [name, value] : facts.doc_properties) {
                if (matches_pattern(value, rule.pattern)) return true;
            }
            return false;
        case MaterialityKind::file_name_matches:
            return matches_pattern(record.display_name(), rule.pattern);
        case MaterialityKind::sheet_name_matches:
            for (const auto& sheet : facts.sheets) {
                if (matches_pattern(sheet.name, rule.pattern)) return true;
            }
            return false;
        case MaterialityKind::path_matches:
            return matches_pattern(record.identity(), rule.pattern);
        case MaterialityKind::has_external_links:
            return !facts.external_targets.empty();
    }
    return false;
}

double metric_number(const MetricsProfile& p, Metric m) {
    switch (m) {
        case Metric::worksheet_count: return double(p.worksheet_count);
        case Metric::formula_count: return double(p.formula_count);
        case Metric::formula_error_count: return double(p.formula_error_count);
        case Metric::array_formula_count: return double(p.array_formula_count);
        case Metric::max_if_nesting: return double(p.max_if_nesting);
        case Metric::external_link_count: return double(p.external_link_count);
        case Metric::named_item_count: return double(p.named_item_count);
        case Metric::invisible_cell_count: return double(p.invisible_cell_count);
        case Metric::hidden_element_count: return double(p.hidden_element_count);
        case Metric::very_hidden_sheet_count: return double(p.very_hidden_sheet_count);
        case Metric::workbook_size_bytes: return double(p.workbook_size_bytes);
        case Metric::unparsed_formula_count: return double(p.unparsed_formula_count);
        default: return 0.0;
    }
}

bool metric_flag(const MetricsProfile& p, Metric m) {
    switch (m) {
        case Metric::has_macros: return p.has_macros;
        case Metric::is_password_protected: return p.is_password_protected;
        default: return false;
    }
}

int risk_rank(RiskLevel r) { return static_cast<int>(r); }

}  // namespace

std::string_view to_string(MaterialityKind k) {
    for (const auto& e : kMaterialityKinds) {
        if (e.kind == k) return e.name;
    }
    return "cell-text-contains";
}

std::optional<MaterialityKind> materiality_kind_from_string(std::string_view s) {
    for (const auto& e : kMaterialityKinds) {
        if (s == e.name) return e.kind;
    }
    return std::nullopt;
}

std::string_view to_string(Metric m) {
    for (const auto& e : kMetrics) {
        if (e.metric == m) return e.name;
    }
    return "formula-count";
}

std::optional<Metric> metric_from_string(std::string_view s) {
    for (const auto& e : kMetrics) {
        if (s == e.name) return e.metric;
    }
    return std::nullopt;
}

bool metric_is_boolean(Metric m) {
    return m == Metric::has_macros || m == Metric::is_password_protected;
}

std::string_view to_string(Comparator c) {
    switch (c) {
        case Comparator::greater_than: return "greater-than";
        case Comparator::at_least: return "at-least";
        case Comparator::is_true: return "is-true";
    }
    return "greater-than";
}

std::optional<Comparator> comparator_from_string(std::string_view s) {
    if (s == "greater-than") return Comparator::greater_than;
    if (s == "at-least") return Comparator::at_least;
    if (s == "is-true") return Comparator::is_true;
    return std::nullopt;
}

std::string_view to_string(RiskLevel r) {
    switch (r) {
        case RiskLevel::low: return "LOW";
        case RiskLevel::medium: return "MEDIUM";
        case RiskLevel::high: return "HIGH";
    }
    return "LOW";
}

std::optional<RiskLevel> risk_level_from_string(std::string_view s) {
    if (s == "LOW") return RiskLevel::low;
    if (s == "MEDIUM") return RiskLevel::medium;
    if (s == "HIGH") return RiskLevel::high;
    return std::nullopt;
}

// --- defaults ---------------------------------------------------------

std::vector<MaterialityRule> default_materiality_rules() {
    std::vector<MaterialityRule> rules;
    rules.push_back({.id = "income-cell-text",
                     .kind = MaterialityKind::cell_text_contains,
                     .pattern = "Income",
                     .threshold = std::nullopt,
                     .points = 10});
    rules.push_back({.id = "large-currency-value",
                     .kind = MaterialityKind::currency_exceeds,
                     .pattern = {},
                     .threshold = 5'000'000.0,
                     .points = 80});
    return rules;
}

std::vector<ComplexityRule> default_complexity_rules() {
    std::vector<ComplexityRule> rules;
    rules.push_back({.id = "formula-errors",
                     .metric = Metric::formula_error_count,
                     .comparator = Comparator::greater_than,
                     .threshold = 1.0,
                     .points = 75});
    rules.push_back({.id = "invisible-cells",
                     .metric = Metric::invisible_cell_count,
                     .comparator = Comparator::greater_than,
                     .threshold = 0.0,
                     .points = 10});
    rules.push_back({.id = "password-protected",
                     .metric = Metric::is_password_protected,
                     .comparator = Comparator::is_true,
                     .threshold = std::nullopt,
                     .points = 10});
    return rules;
}

BandScale default_materiality_scale() {
    return {.lower_cut = 40, .upper_cut = 80, .labels = {"LOW", "MODERATE", "CRITICAL"}};
}

BandScale default_complexity_scale() {
    return {.lower_cut = 40, .upper_cut = 80, .labels = {"BASIC", "INTERMEDIATE", "ADVANCED"}};
}

RiskMatrix default_matrix() {
    RiskMatrix m;
    m.cells = {{
        {RiskLevel::low, RiskLevel::low, RiskLevel::medium},
        {RiskLevel::medium, RiskLevel::medium, RiskLevel::high},
        {RiskLevel::medium, RiskLevel::high, RiskLevel::high},
    }};
    return m;
}

RiskConfig default_risk_config() {
    return {.materiality_rules = default_materiality_rules(),
            .complexity_rules = default_complexity_rules(),
            .materiality_scale = default_materiality_scale(),
            .complexity_scale = default_complexity_scale(),
            .matrix = default_matrix()};
}

// --- validation ---------------------------------------------------------

void validate_materiality_rules(const std::vector<MaterialityRule>& rules,
                                std::string_view field_prefix) {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < rules.size(); ++i) {
        const auto& rule = rules[i];
        std::string field = std::string(field_prefix) + "[" + std::to_string(i) + "]";
        if (rule.id.empty()) {
            throw Error(errc::config_invalid, "rule id must not be empty", field + ".id");
        }
        if (!seen.insert(rule.id).second) {
            throw Error(errc::config_invalid, "duplicate rule id '" + rule.id + "'",
                        field + ".id");
        }
        if (kind_wants_pattern(rule.kind)) {
            if (rule.pattern.empty()) {
                throw Error(errc::config_invalid,
                            "kind '" + std::string(to_string(rule.kind)) + "' requires a pattern",
                            field + ".pattern");
            }
            if (rule.threshold) {
                throw Error(errc::config_invalid,
                            "kind '" + std::string(to_string(rule.kind)) +
                                "' does not take a threshold",
                            field + ".threshold");
            }
        } else if (kind_wants_threshold(rule.kind)) {
            if (!rule.threshold) {
                throw Error(errc::config_invalid,
                            "kind '" + std::string(to_string(rule.kind)) +
                                "' requires a threshold",
                            field + ".threshold");
            }
            if (!std::isfinite(*rule.threshold)) {
                throw Error(errc::config_invalid, "threshold must be finite",
                            field + ".threshold");
            }
            if (!rule.pattern.empty()) {
                throw Error(errc::config_invalid,
                            "kind '" + std::string(to_string(rule.kind)) +
                                "' does not take a pattern",
                            field + ".pattern");
            }
        } else {
            if (!rule.pattern.empty()) {
                throw Error(errc::config_invalid,
                            "kind 'has-external-links' does not take a pattern",
                            field + ".pattern");
            }
            if (rule.threshold) {
                throw Error(errc::config_invalid,
                            "kind 'has-external-links' does not take a threshold",
                            field + ".threshold");
            }
        }
    }
}

void validate_complexity_rules(const std::vector<ComplexityRule>& rules,
                               std::string_view field_prefix) {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < rules.size(); ++i) {
        const auto& rule = rules[i];
        std::string field = std::string(field_prefix) + "[" + std::to_string(i) + "]";
        if (rule.id.empty()) {
            throw Error(errc::config_invalid, "rule id must not be empty", field + ".id");
        }
        if (!seen.insert(rule.id).second) {
            throw Error(errc::config_invalid, "duplicate rule id '" + rule.id + "'",
                        field + ".id");
        }
        if (metric_is_boolean(rule.metric)) {
            if (rule.comparator != Comparator::is_true) {
                throw Error(errc::config_invalid,
                            "boolean metric '" + std::string(to_string(rule.metric)) +
                                "' requires comparator 'is-true'",
                            field + ".comparator");
            }
            if (rule.threshold) {
                throw Error(errc::config_invalid, "boolean metrics do not take a threshold",
                            field + ".threshold");
            }
        } else {
            if (rule.comparator == Comparator::is_true) {
                throw Error(errc::config_invalid,
                            "comparator 'is-true' requires a boolean metric",
                            field + ".comparator");
            }
            if (!rule.threshold) {
                throw Error(errc::config_invalid,
                            "numeric comparators require a threshold", field + ".threshold");
            }
            if (!std::isfinite(*rule.threshold)) {
                throw Error(errc::config_invalid, "threshold must be finite",
                            field + ".threshold");
            }
        }
    }
}

void validate_scale(const BandScale& scale, std::string_view field_prefix) {
    std::string field(field_prefix);
    if (scale.lower_cut >= scale.upper_cut) {
        throw Error(errc::config_invalid, "cuts must be ascending", field + ".cuts");
    }
    for (std::size_t i = 0; i < scale.labels.size(); ++i) {
        if (scale.labels[i].empty()) {
            throw Error(errc::config_invalid, "band label must not be empty",
                        field + ".labels[" + std::to_string(i) + "]");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (scale.labels[j] == scale.labels[i]) {
                throw Error(errc::config_invalid,
                            "duplicate band label '" + scale.labels[i] + "'",
                            field + ".labels[" + std::to_string(i) + "]");
            }
        }
    }
}

void validate_matrix(const RiskMatrix& matrix) {
    for (std::size_t m = 0; m < 3; ++m) {
        for (std::size_t c = 0; c + 1 < 3; ++c) {
            if (risk_rank(matrix.cells[m][c]) > risk_rank(matrix.cells[m][c + 1])) {
                throw Error(errc::matrix_not_monotone,
                            "raising the complexity band lowers risk",
                            "matrix[" + std::to_string(m) + "][" + std::to_string(c + 1) + "]");
            }
        }
    }
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t m = 0; m + 1 < 3; ++m) {
            if (risk_rank(matrix.cells[m][c]) > risk_rank(matrix.cells[m + 1][c])) {
                throw Error(errc::matrix_not_monotone,
                            "raising the materiality band lowers risk",
                            "matrix[" + std::to_string(m + 1) + "][" + std::to_string(c) + "]");
            }
        }
    }
}

void validate_risk_config(const RiskConfig& config) {
    validate_materiality_rules(config.materiality_rules, "materiality_rules");
    validate_complexity_rules(config.complexity_rules, "complexity_rules");
    validate_scale(config.materiality_scale, "materiality_scale");
    validate_scale(config.complexity_scale, "complexity_scale");
    validate_matrix(config.matrix);
}

// --- scoring -------------------------------------------------------------

std::vector<std::string> collect_external_targets(
    const WorkbookFacts& facts, const std::vector<formula::Analysis>& analyses) {
    std::set<std::string> targets(facts.external_targets.begin(),
                                  facts.external_targets.end());
    for (const auto& analysis : analyses) {
        if (!analysis.parsed) continue;
        for (const auto& ref : analysis.refs) {
            if (ref.scope != formula::RefTarget::Scope::external || !ref.workbook_index) {
                continue;
            }
            int n = *ref.workbook_index;
            if (n >= 1 && std::size_t(n) <= facts.external_targets.size()) {
                targets.insert(facts.external_targets[std::size_t(n) - 1]);
            } else {
                targets.insert("[" + std::to_string(n) + "]");
            }
        }
    }
    return {targets.begin(), targets.end()};
}

MetricsProfile compute_metrics(const WorkbookFacts& facts,
                               const std::vector<formula::Analysis>& analyses) {
    MetricsProfile p;
    p.workbook_size_bytes = facts.size_bytes;
    if (facts.encrypted) {
        p.metrics_available = false;
        p.is_password_protected = true;
        return p;
    }
    p.worksheet_count = facts.sheets.size();
    p.formula_count = facts.formulas.size();
    for (const auto& cell : facts.cells) {
        if (cell.value_kind == CellValueKind::error) ++p.formula_error_count;
    }
    for (const auto& f : facts.formulas) {
        if (f.is_array) ++p.array_formula_count;
    }
    for (const auto& analysis : analyses) {
        if (!analysis.parsed) {
            ++p.unparsed_formula_count;
        } else if (analysis.if_depth > p.max_if_nesting) {
            p.max_if_nesting = analysis.if_depth;
        }
    }
    p.external_link_count = collect_external_targets(facts, analyses).size();
    p.has_macros = facts.has_macros;
    p.named_item_count = facts.defined_names.size();
    p.invisible_cell_count = count_invisible_cells(facts);
    HiddenCensus census = hidden_census(facts);
    p.hidden_element_count =
        std::uint64_t(census.hidden_rows) + census.hidden_columns + census.hidden_sheets;
    p.very_hidden_sheet_count = census.very_hidden_sheets;
    bool sheet_protected = false;
    for (const auto& sheet : facts.sheets) {
        if (sheet.protected_) sheet_protected = true;
    }
    p.is_password_protected = facts.workbook_protected || sheet_protected;
    return p;
}

std::pair<std::uint64_t, std::vector<std::string>> score_materiality(
    const WorkbookFacts& facts, const FileRecord& record,
    const std::vector<MaterialityRule>& rules) {
    std::uint64_t score = 0;
    std::vector<std::string> matched;
    for (const auto& rule : rules) {
        if (rule_fires(rule, facts, record)) {
            score += rule.points;
            matched.push_back(rule.id);
        }
    }
    return {score, matched};
}

std::pair<std::uint64_t, std::vector<std::string>> score_complexity(
    const MetricsProfile& profile, const std::vector<ComplexityRule>& rules) {
    std::uint64_t score = 0;
    std::vector<std::string> matched;
    for (const auto& rule : rules) {
        if (!profile.metrics_available && rule.metric != Metric::is_password_protected &&
            rule.metric != Metric::workbook_size_bytes) {
            continue;
        }
        bool hit = false;
        if (metric_is_boolean(rule.metric)) {
            hit = metric_flag(profile, rule.metric);
        } else {
            double value = metric_number(profile, rule.metric);
            hit = rule.comparator == Comparator::greater_than ? value > *rule.threshold
                                                              : value >= *rule.threshold;
        }
        if (hit) {
            score += rule.points;
            matched.push_back(rule.id);
        }
    }
    return {score, matched};
}

std::size_t band_index(std::uint64_t score, const BandScale& scale) {
    if (score < scale.lower_cut) return 0;
    if (score < scale.upper_cut) return 1;
    return 2;
}

const std::string& band(std::uint64_t score, const BandScale& scale) {
    return scale.labels[band_index(score, scale)];
}

RiskLevel assess(std::size_t materiality_band, std::size_t complexity_band,
                 const RiskMatrix& matrix) {
    return matrix.cells.at(materiality_band).at(complexity_band);
}

RiskAssessment assess_workbook(const WorkbookFacts& facts, const FileRecord& record,
                               const MetricsProfile& profile, const RiskConfig& config) {
    RiskAssessment a;
    auto [ms, mids] = score_materiality(facts, record, config.materiality_rules);
    auto [cs, cids] = score_complexity(profile, config.complexity_rules);
    a.materiality_score = ms;
    a.matched_materiality_rule_ids = std::move(mids);
    a.complexity_score = cs;
    a.matched_complexity_rule_ids = std::move(cids);
    a.materiality_band_index = band_index(ms, config.materiality_scale);
    a.complexity_band_index = band_index(cs, config.complexity_scale);
    a.materiality_band = config.materiality_scale.labels[a.materiality_band_index];
    a.complexity_band = config.complexity_scale.labels[a.complexity_band_index];
    a.risk = assess(a.materiality_band_index, a.complexity_band_index, config.matrix);
    a.inherited_critical = false;
    a.effective_materiality_band = a.materiality_band;
    return a;
}

}  // namespace ssrisk
