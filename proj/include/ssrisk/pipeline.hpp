#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ssrisk/config.hpp"
#include "ssrisk/inventory.hpp"
#include "ssrisk/link_graph.hpp"

namespace ssrisk {

// Process-level exit statuses shared by the pipeline and the CLI.
inline constexpr int kExitClean = 0;
inline constexpr int kExitErrors = 1;
inline constexpr int kExitViolations = 2;

struct PipelineOptions {
    std::ostream* log = nullptr;  // stage progress lines, one per pipeline step
    std::optional<bool> since_last_scan;                   // overrides config.filter
    std::optional<std::filesystem::path> output_dir;       // overrides config
    std::optional<std::set<std::string>> report_formats;   // overrides config
    std::optional<std::int64_t> clock_now;                 // fixed scan timestamp
};

struct PipelineResult {
    InventorySnapshot snapshot;
    DiffReport diff;
    LinkGraph graph;
    std::filesystem::path snapshot_path;
    std::vector<std::filesystem::path> report_files;
    int exit_status = kExitClean;
};

// Report content derived from one snapshot + diff + graph. Row lists hold
// indices into snapshot.records in report order: risk HIGH first, then
// materiality score descending, then identity ascending.
struct ReportBundle {
    std::vector<std::size_t> inventory;                        // every record
    std::vector<std::size_t> high_risk;                        // risk == HIGH
    std::vector<std::pair<std::string, std::string>> summary;  // key/value rows
    std::vector<std::size_t> violations;  // records named by diff.newly_high_risk
    std::string graph_tsv;                // feeder \t dependent \t resolved
};

// Reads one discovered record's bytes from disk, descending its container
// chain through nested archives. Throws Error on unreadable or corrupt input.
Bytes load_record_bytes(const FileRecord& record, const ArchiveLimits& limits);

// Parses, measures, and scores one discovered file. Encrypted and legacy
// workbooks degrade to name/size facts without an error entry; unreadable or
// structurally damaged input degrades the same way and records an error.
// The returned assessment reflects the record alone (no graph effects).
SnapshotRecord assess_record(const FileRecord& record, const RiskConfig& risk,
                             const ArchiveLimits& limits,
                             std::vector<ScanError>& errors);

// Rebuilds the inter-workbook link graph from a snapshot's stored targets.
LinkGraph graph_from_snapshot(const InventorySnapshot& snapshot);

ReportBundle build_report_bundle(const InventorySnapshot& snapshot,
                                 const DiffReport& delta, const LinkGraph& graph);

// Writes the bundle into output_dir atomically and returns the written paths.
// `formats`: "csv" selects inventory/high-risk/summary/violations CSVs plus
// the graph edge list, "structured" a line-delimited report mirroring the
// snapshot. Throws `report-write-failed` when output_dir is unwritable.
std::vector<std::filesystem::path> render_reports(const InventorySnapshot& snapshot,
                                                  const DiffReport& delta,
                                                  const LinkGraph& graph,
                                                  const std::set<std::string>& formats,
                                                  const std::filesystem::path& output_dir);

// discover -> parse+measure -> score -> graph+propagate -> snapshot save ->
// diff against the previous snapshot -> report rendering. Fatal setup
// problems (bad catalog, unwritable output) throw Error; per-file problems
// become snapshot error entries and exit status 1.
PipelineResult run_pipeline(const PipelineConfig& config,
                            const PipelineOptions& options = {});

}  // namespace ssrisk
