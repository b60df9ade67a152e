#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ssrisk/errors.hpp"
#include "ssrisk/file_record.hpp"
#include "ssrisk/link_graph.hpp"
#include "ssrisk/rules.hpp"

namespace ssrisk {

// One scanned workbook with everything the scan learned about it.
struct SnapshotRecord {
    FileRecord file;
    MetricsProfile metrics;  // metrics_available=false for encrypted workbooks
    std::vector<TargetRef> targets;  // external-link targets; rebuilds the graph
    RiskAssessment assessment;

    bool operator==(const SnapshotRecord&) const = default;
};

struct InventorySnapshot {
    std::string scan_id;
    std::int64_t started_at = 0;
    std::int64_t finished_at = 0;
    std::vector<SnapshotRecord> records;  // sorted by (path, container_chain)
    std::vector<ScanError> errors;

    bool operator==(const InventorySnapshot&) const = default;
};

// Identity-level scan-to-scan comparison. The four primary lists partition
// the union of both snapshots' identities.
struct DiffReport {
    std::vector<std::string> added;     // present now, absent before
    std::vector<std::string> modified;  // present in both, content hash changed
    std::vector<std::string> deleted;   // present before, absent now
    std::vector<std::string> unchanged;
    std::vector<std::string> newly_high_risk;  // risk HIGH now, not HIGH before

    bool operator==(const DiffReport&) const = default;
};

// Filename-safe scan id: UTC stamp plus a random suffix.
std::string make_scan_id(std::int64_t started_at_unix);

// Writes `<catalog>/scan-<scan_id>.jsonl` atomically under the catalog's
// advisory lock: one header line, then one line per record, then one per
// error. Creates the catalog directory when missing. Existing snapshots are
// never rewritten. Throws `catalog-write-failed`.
std::filesystem::path save_snapshot(const InventorySnapshot& snapshot,
                                    const std::filesystem::path& catalog_dir);

// Inverse of save_snapshot; load(save(x)) == x field-for-field. Throws
// `catalog-corrupt` naming the offending line number.
InventorySnapshot load_snapshot(const std::filesystem::path& path);

// Canonical structured-report lines (no trailing newline), identical to the
// record and error lines save_snapshot writes.
std::string record_jsonl_line(const SnapshotRecord& rec);
std::string error_jsonl_line(const ScanError& err);

DiffReport diff(const InventorySnapshot& previous, const InventorySnapshot& current);

// finished_at of the latest snapshot in the catalog, or nullopt when none.
// Unreadable or damaged snapshot files contribute nothing.
std::optional<std::int64_t> last_scan_time(const std::filesystem::path& catalog_dir);

// Paths of the snapshot files in a catalog, sorted by name.
std::vector<std::filesystem::path> list_snapshots(const std::filesystem::path& catalog_dir);

}  // namespace ssrisk
