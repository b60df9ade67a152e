#include <doctest.h>

#include <filesystem>
#include <random>

#include "ssrisk/config.hpp"
#include "ssrisk/util.hpp"

using namespace ssrisk;
namespace fs = std::filesystem;

namespace {

const fs::path kBase = "/etc/ssrisk";

PipelineConfig parse(const std::string& text) { return parse_config(text, kBase); }

void expect_invalid(const std::string& text, const std::string& field,
                    const char* code = "config-invalid") {
    try {
        parse_config(text, kBase);
        FAIL_CHECK("expected " << code << " at " << field << " for: " << text);
    } catch (const Error& e) {
        CHECK(e.code() == std::string(code));
        CHECK(e.field() == field);
    }
}

}  // namespace

TEST_CASE("minimal config applies all documented defaults") {
    PipelineConfig cfg = parse(R"({"roots": ["/share/finance"]})");
    REQUIRE(cfg.roots.size() == 1);
    CHECK(cfg.roots[0].path == "/share/finance");
    CHECK(cfg.roots[0].label == "/share/finance");
    CHECK(cfg.roots[0].kind == RootKind::file_share);
    CHECK(cfg.risk == default_risk_config());
    CHECK(cfg.filter == ScanFilter{});
    CHECK(cfg.archive == ArchiveLimits{});
    CHECK(cfg.worker_threads == 0);
    CHECK(cfg.catalog_dir == "/etc/ssrisk/catalog");
    CHECK(cfg.output_dir == "/etc/ssrisk/reports");
    CHECK(cfg.report_formats == std::set<std::string>{"csv", "structured"});
    CHECK(cfg.schema_version == 1);
}

TEST_CASE("full config round-trips every section") {
    PipelineConfig cfg = parse(R"({
        "schema_version": 1,
        "roots": [
            {"path": "/srv/shares/accounting", "label": "accounting", "kind": "file-share"},
            {"path": "exports", "kind": "repository-export"},
            {"path": "/home/crunch", "kind": "workstation"}
        ],
        "filter": {
            "name_patterns": ["*.xls*", "close"],
            "modified_windows": [{"start": "2026-01-01", "end": "2026-03-31"}],
            "since_last_scan": true,
            "max_file_size_bytes": 1048576,
            "follow_symlinks": true
        },
        "archive": {"max_depth": 2, "budget_bytes": 1000000},
        "worker_threads": 4,
        "materiality_rules": [
            {"id": "inc", "kind": "cell-text-contains", "pattern": "Income", "points": 10},
            {"id": "cur", "kind": "currency-exceeds", "threshold": 5000000, "points": 80},
            {"id": "lnk", "kind": "has-external-links", "points": 3}
        ],
        "complexity_rules": [
            {"id": "err", "metric": "formula-error-count", "comparator": "greater-than",
             "threshold": 1, "points": 75},
            {"id": "mac", "metric": "has-macros", "comparator": "is-true", "points": 5}
        ],
        "materiality_scale": {"cuts": [30, 70], "labels": ["L", "M", "C"]},
        "complexity_scale": {"cuts": [20, 60], "labels": ["B", "I", "A"]},
        "matrix": {
            "L": {"B": "LOW",    "I": "LOW",  "A": "MEDIUM"},
            "M": {"B": "MEDIUM", "I": "MEDIUM", "A": "HIGH"},
            "C": {"B": "HIGH",   "I": "HIGH", "A": "HIGH"}
        },
        "catalog_dir": "/var/lib/ssrisk/catalog",
        "output_dir": "out",
        "report_formats": ["csv"]
    })");

    REQUIRE(cfg.roots.size() == 3);
    CHECK(cfg.roots[0].label == "accounting");
    CHECK(cfg.roots[1].path == "/etc/ssrisk/exports");  // relative, resolved
    CHECK(cfg.roots[1].kind == RootKind::repository_export);
    CHECK(cfg.roots[2].kind == RootKind::workstation);

    CHECK(cfg.filter.name_patterns == std::vector<std::string>{"*.xls*", "close"});
    REQUIRE(cfg.filter.modified_windows.size() == 1);
    CHECK(cfg.filter.modified_windows[0].start == *parse_iso8601("2026-01-01"));
    // Bare end dates cover the whole day.
    CHECK(cfg.filter.modified_windows[0].end == *parse_iso8601("2026-03-31") + 86399);
    CHECK(cfg.filter.since_last_scan);
    CHECK(cfg.filter.max_file_size_bytes == 1048576);
    CHECK(cfg.filter.follow_symlinks);

    CHECK(cfg.archive.max_depth == 2);
    CHECK(cfg.archive.budget_bytes == 1000000);
    CHECK(cfg.worker_threads == 4);

    REQUIRE(cfg.risk.materiality_rules.size() == 3);
    CHECK(cfg.risk.materiality_rules[1].threshold == 5000000.0);
    CHECK(cfg.risk.materiality_rules[2].kind == MaterialityKind::has_external_links);
    REQUIRE(cfg.risk.complexity_rules.size() == 2);
    CHECK(cfg.risk.complexity_rules[1].comparator == Comparator::is_true);
    CHECK(cfg.risk.materiality_scale.labels == std::array<std::string, 3>{"L", "M", "C"});
    CHECK(cfg.risk.matrix.cells[2][0] == RiskLevel::high);

    CHECK(cfg.catalog_dir == "/var/lib/ssrisk/catalog");
    CHECK(cfg.output_dir == "/etc/ssrisk/out");
    CHECK(cfg.report_formats == std::set<std::string>{"csv"});
}

TEST_CASE("config rejections name the offending field") {
    expect_invalid("not json", "");
    expect_invalid("[1,2]", "");
    expect_invalid("{}", "roots");
    expect_invalid(R"({"roots": []})", "roots");
    expect_invalid(R"({"roots": [42]})", "roots[0]");
    expect_invalid(R"({"roots": [{"label": "x"}]})", "roots[0].path");
    expect_invalid(R"({"roots": [{"path": ""}]})", "roots[0].path");
    expect_invalid(R"({"roots": [{"path": "/a", "kind": "cloud"}]})", "roots[0].kind");
    expect_invalid(R"({"roots": [{"path": "/a", "color": "red"}]})", "roots[0].color");
    expect_invalid(R"({"roots": ["/a"], "schema_version": 2})", "schema_version");
    expect_invalid(R"({"roots": ["/a"], "typo_key": 1})", "typo_key");
    expect_invalid(R"({"roots": ["/a"], "filter": {"max_file_size_bytes": 0}})",
                   "filter.max_file_size_bytes");
    expect_invalid(
        R"({"roots": ["/a"], "filter": {"modified_windows": [{"start": "2026-02-01", "end": "2026-01-01"}]}})",
        "filter.modified_windows[0]");
    expect_invalid(
        R"({"roots": ["/a"], "filter": {"modified_windows": [{"start": "soon"}]}})",
        "filter.modified_windows[0].start");
    expect_invalid(R"({"roots": ["/a"], "archive": {"max_depth": 0}})",
                   "archive.max_depth");
    expect_invalid(R"({"roots": ["/a"], "worker_threads": -1})", "worker_threads");
}

TEST_CASE("config rejections: rules") {
    // Negative points name the rule.
    expect_invalid(
        R"({"roots": ["/a"], "materiality_rules": [
            {"id": "x", "kind": "cell-text-contains", "pattern": "p", "points": -5}]})",
        "materiality_rules[0].points");
    expect_invalid(
        R"({"roots": ["/a"], "complexity_rules": [
            {"id": "x", "metric": "formula-count", "comparator": "at-least",
             "threshold": 1, "points": -1}]})",
        "complexity_rules[0].points");
    // Unknown kind / metric / comparator.
    expect_invalid(
        R"({"roots": ["/a"], "materiality_rules": [
            {"id": "x", "kind": "vibes", "pattern": "p", "points": 1}]})",
        "materiality_rules[0].kind");
    expect_invalid(
        R"({"roots": ["/a"], "complexity_rules": [
            {"id": "x", "metric": "vibes", "comparator": "is-true", "points": 1}]})",
        "complexity_rules[0].metric");
    // Kind/shape mismatches surface through the risk-engine validators.
    expect_invalid(
        R"({"roots": ["/a"], "materiality_rules": [
            {"id": "x", "kind": "currency-exceeds", "pattern": "USD",
             "threshold": 5, "points": 1}]})",
        "materiality_rules[0].pattern");
    expect_invalid(
        R"({"roots": ["/a"], "complexity_rules": [
            {"id": "x", "metric": "has-macros", "comparator": "greater-than",
             "threshold": 5, "points": 1}]})",
        "complexity_rules[0].comparator");
    // Duplicate ids.
    expect_invalid(
        R"({"roots": ["/a"], "materiality_rules": [
            {"id": "x", "kind": "cell-text-contains", "pattern": "p", "points": 1},
            {"id": "x", "kind": "has-external-links", "points": 1}]})",
        "materiality_rules[1].id");
}

TEST_CASE("config rejections: scales and matrix") {
    expect_invalid(
        R"({"roots": ["/a"], "materiality_scale": {"cuts": [80], "labels": ["a","b","c"]}})",
        "materiality_scale.cuts");
    expect_invalid(
        R"({"roots": ["/a"], "materiality_scale": {"cuts": [80, 40], "labels": ["a","b","c"]}})",
        "materiality_scale.cuts");
    expect_invalid(
        R"({"roots": ["/a"], "complexity_scale": {"cuts": [10, 20], "labels": ["a","b"]}})",
        "complexity_scale.labels");

    // A matrix missing one cell names the cell.
    expect_invalid(R"({"roots": ["/a"], "matrix": {
        "LOW":      {"BASIC": "LOW", "INTERMEDIATE": "LOW", "ADVANCED": "MEDIUM"},
        "MODERATE": {"BASIC": "MEDIUM", "INTERMEDIATE": "MEDIUM"},
        "CRITICAL": {"BASIC": "MEDIUM", "INTERMEDIATE": "HIGH", "ADVANCED": "HIGH"}}})",
                   "matrix.MODERATE.ADVANCED");
    // A whole missing row names the row.
    expect_invalid(R"({"roots": ["/a"], "matrix": {
        "LOW":      {"BASIC": "LOW", "INTERMEDIATE": "LOW", "ADVANCED": "MEDIUM"},
        "CRITICAL": {"BASIC": "MEDIUM", "INTERMEDIATE": "HIGH", "ADVANCED": "HIGH"}}})",
                   "matrix.MODERATE");
    // Keys must match the configured band labels.
    expect_invalid(R"({"roots": ["/a"], "matrix": {
        "LOW":      {"BASIC": "LOW", "INTERMEDIATE": "LOW", "ADVANCED": "MEDIUM"},
        "MODERATE": {"BASIC": "MEDIUM", "INTERMEDIATE": "MEDIUM", "ADVANCED": "HIGH"},
        "SEVERE":   {"BASIC": "MEDIUM", "INTERMEDIATE": "HIGH", "ADVANCED": "HIGH"}}})",
                   "matrix.SEVERE");
    // Bad risk value.
    expect_invalid(R"({"roots": ["/a"], "matrix": {
        "LOW":      {"BASIC": "NONE", "INTERMEDIATE": "LOW", "ADVANCED": "MEDIUM"},
        "MODERATE": {"BASIC": "MEDIUM", "INTERMEDIATE": "MEDIUM", "ADVANCED": "HIGH"},
        "CRITICAL": {"BASIC": "MEDIUM", "INTERMEDIATE": "HIGH", "ADVANCED": "HIGH"}}})",
                   "matrix.LOW.BASIC");
    // Monotonicity violations surface with the dedicated code.
    expect_invalid(R"({"roots": ["/a"], "matrix": {
        "LOW":      {"BASIC": "HIGH", "INTERMEDIATE": "LOW", "ADVANCED": "MEDIUM"},
        "MODERATE": {"BASIC": "MEDIUM", "INTERMEDIATE": "MEDIUM", "ADVANCED": "HIGH"},
        "CRITICAL": {"BASIC": "MEDIUM", "INTERMEDIATE": "HIGH", "ADVANCED": "HIGH"}}})",
                   "matrix[0][1]", "matrix-not-monotone");
}

TEST_CASE("config rejections: artifact directories must not overlap roots") {
    expect_invalid(
        R"({"roots": ["/share/finance"], "catalog_dir": "/share/finance/catalog"})",
        "catalog_dir");
    expect_invalid(
        R"({"roots": ["/share/finance"], "output_dir": "/share/finance"})",
        "output_dir");
    expect_invalid(
        R"({"roots": ["/var/lib/ssrisk/reports/tree"], "output_dir": "/var/lib/ssrisk/reports"})",
        "roots[0].path");
    // Sibling directories with a shared prefix are fine.
    CHECK_NOTHROW(parse(
        R"({"roots": ["/share/finance"], "output_dir": "/share/finance-reports",
            "catalog_dir": "/share/finance2"})"));
}

TEST_CASE("config rejections: report formats") {
    expect_invalid(R"({"roots": ["/a"], "report_formats": []})", "report_formats");
    expect_invalid(R"({"roots": ["/a"], "report_formats": ["pdf"]})",
                   "report_formats[0]");
    PipelineConfig cfg =
        parse(R"({"roots": ["/a"], "report_formats": ["structured", "structured"]})");
    CHECK(cfg.report_formats == std::set<std::string>{"structured"});
}

TEST_CASE("load_config reads from disk and resolves against the file's directory") {
    fs::path dir = fs::temp_directory_path() /
                   ("ssrisk-cfg-" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
    fs::path file = dir / "pipeline.json";
    atomic_write_file(file, R"({"roots": ["tree"], "catalog_dir": "cat"})");
    PipelineConfig cfg = load_config(file);
    CHECK(cfg.roots[0].path == (dir / "tree").string());
    CHECK(cfg.catalog_dir == dir / "cat");
    CHECK(cfg.output_dir == dir / "reports");

    try {
        load_config(dir / "missing.json");
        FAIL_CHECK("expected config-invalid for a missing file");
    } catch (const Error& e) {
        CHECK(e.code() == std::string("config-invalid"));
    }
    std::error_code ec;
    fs::remove_all(dir, ec);
}
