#include "ssrisk/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <ctime>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <set>
#include <thread>

#include <json.hpp>

#include "ssrisk/csv.hpp"
#include "ssrisk/discovery.hpp"
#include "ssrisk/formula.hpp"
#include "ssrisk/util.hpp"
#include "ssrisk/workbook.hpp"
#include "ssrisk/zip_reader.hpp"

namespace ssrisk {

namespace fs = std::filesystem;
using json = nlohmann::json;

Bytes load_record_bytes(const FileRecord& record, const ArchiveLimits& limits) {
    Bytes bytes = read_file(record.path);
    for (const auto& member : record.container_chain) {
        auto archive = zip::Archive::open(bytes);
        if (!archive) {
            throw Error(errc::corrupt_archive, "container is not a zip archive");
        }
        const zip::Entry* entry = archive->find(member);
        if (!entry) {
            throw Error(errc::corrupt_archive, "missing member '" + member + "'");
        }
        try {
            Bytes inner = archive->extract(*entry, limits.budget_bytes);
            bytes = std::move(inner);
        } catch (const zip::ZipError& ze) {
            throw Error(ze.kind == zip::ZipError::Kind::budget_exceeded
                            ? errc::archive_budget_exceeded
                            : errc::corrupt_archive,
                        ze.detail);
        }
    }
    return bytes;
}

SnapshotRecord assess_record(const FileRecord& record, const RiskConfig& risk,
                             const ArchiveLimits& limits,
                             std::vector<ScanError>& errors) {
    SnapshotRecord rec;
    rec.file = record;

    WorkbookFacts facts;
    bool parsed = false;
    try {
        Bytes bytes = load_record_bytes(record, limits);
        facts = parse_workbook(record, bytes);
        parsed = true;
    } catch (const Error& e) {
        // Legacy binaries are expected finds, catalogued on name/size facts
        // alone. Anything else unreadable is that too, plus an error entry.
        if (e.code() != errc::unsupported_format) {
            errors.push_back({e.code(), record.path, record.container_chain, e.what()});
        }
    }

    if (parsed) {
        std::vector<formula::Analysis> analyses;
        analyses.reserve(facts.formulas.size());
        for (const auto& f : facts.formulas) analyses.push_back(formula::analyze(f.text));
        rec.metrics = compute_metrics(facts, analyses);
        rec.targets = collect_target_refs(facts, analyses);
    } else {
        facts = WorkbookFacts{};
        facts.size_bytes = record.size_bytes;
        rec.metrics.metrics_available = false;
        rec.metrics.workbook_size_bytes = record.size_bytes;
        rec.metrics.is_password_protected =
            record.kind == FileKind::encrypted_spreadsheet;
    }
    rec.assessment = assess_workbook(facts, record, rec.metrics, risk);
    return rec;
}

namespace {

// Report row order: HIGH risk first, then materiality descending, then
// identity ascending as the deterministic tie-break.
struct ReportOrderLess {
    const InventorySnapshot& snap;

    bool operator()(std::size_t ia, std::size_t ib) const {
        const auto& a = snap.records[ia];
        const auto& b = snap.records[ib];
        if (a.assessment.risk != b.assessment.risk) {
            return static_cast<int>(a.assessment.risk) >
                   static_cast<int>(b.assessment.risk);
        }
        if (a.assessment.materiality_score != b.assessment.materiality_score) {
            return a.assessment.materiality_score > b.assessment.materiality_score;
        }
        return a.file.identity() < b.file.identity();
    }
};

std::string join(const std::vector<std::string>& parts, const char* sep) {
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += sep;
        out += p;
    }
    return out;
}

const std::vector<std::string>& record_columns() {
    static const std::vector<std::string> cols{
        "path", "container_chain", "kind", "extension", "extension_mismatch",
        "size_bytes", "modified_at", "created_at", "content_hash",
        "metrics_available", "worksheet_count", "formula_count",
        "formula_error_count", "array_formula_count", "max_if_nesting",
        "external_link_count", "has_macros", "named_item_count",
        "invisible_cell_count", "hidden_element_count", "very_hidden_sheet_count",
        "is_password_protected", "unparsed_formula_count", "materiality_score",
        "materiality_band", "matched_materiality_rules", "complexity_score",
        "complexity_band", "matched_complexity_rules", "inherited_critical",
        "effective_materiality_band", "risk"};
    return cols;
}

std::vector<std::string> record_row(const SnapshotRecord& r) {
    auto flag = [](bool v) { return std::string(v ? "true" : "false"); };
    auto num = [](std::uint64_t v) { return std::to_string(v); };
    const auto& m = r.metrics;
    const auto& a = r.assessment;
    return {r.file.path,
            join(r.file.container_chain, "::"),
            std::string(to_string(r.file.kind)),
            r.file.extension,
            flag(r.file.extension_mismatch),
            num(r.file.size_bytes),
            format_iso8601(r.file.modified_at),
            r.file.created_at ? format_iso8601(*r.file.created_at) : "",
            r.file.content_hash,
            flag(m.metrics_available),
            num(m.worksheet_count),
            num(m.formula_count),
            num(m.formula_error_count),
            num(m.array_formula_count),
            num(m.max_if_nesting),
            num(m.external_link_count),
            flag(m.has_macros),
            num(m.named_item_count),
            num(m.invisible_cell_count),
            num(m.hidden_element_count),
            num(m.very_hidden_sheet_count),
            flag(m.is_password_protected),
            num(m.unparsed_formula_count),
            num(a.materiality_score),
            a.materiality_band,
            join(a.matched_materiality_rule_ids, ";"),
            num(a.complexity_score),
            a.complexity_band,
            join(a.matched_complexity_rule_ids, ";"),
            flag(a.inherited_critical),
            a.effective_materiality_band,
            std::string(to_string(a.risk))};
}

std::string rows_csv(const InventorySnapshot& snap,
                     const std::vector<std::size_t>& order) {
    csv::Writer w;
    w.row(record_columns());
    for (std::size_t i : order) w.row(record_row(snap.records[i]));
    return w.str();
}

std::string summary_csv(const std::vector<std::pair<std::string, std::string>>& rows) {
    csv::Writer w;
    w.row({"metric", "value"});
    for (const auto& [k, v] : rows) w.row({k, v});
    return w.str();
}

std::string structured_report(const InventorySnapshot& snap, const ReportBundle& bundle,
                              const LinkGraph& graph) {
    std::string out;
    json summary{{"type", "summary"}};
    for (const auto& [k, v] : bundle.summary) summary[k] = v;
    out += summary.dump();
    out += '\n';
    for (std::size_t i : bundle.inventory) {
        out += record_jsonl_line(snap.records[i]);
        out += '\n';
    }
    for (const auto& err : snap.errors) {
        out += error_jsonl_line(err);
        out += '\n';
    }
    for (std::size_t i : bundle.violations) {
        json line{{"type", "violation"},
                  {"identity", snap.records[i].file.identity()},
                  {"risk", std::string(to_string(snap.records[i].assessment.risk))}};
        out += line.dump();
        out += '\n';
    }
    for (const auto& e : graph.edges) {
        json line{{"type", "edge"},
                  {"feeder", graph.nodes[e.from].file_id},
                  {"dependent", graph.nodes[e.to].file_id},
                  {"resolved", graph.nodes[e.from].resolved},
                  {"source", std::string(to_string(e.source))}};
        out += line.dump();
        out += '\n';
    }
    return out;
}

}  // namespace

LinkGraph graph_from_snapshot(const InventorySnapshot& snapshot) {
    std::vector<FileRecord> files;
    std::vector<std::vector<TargetRef>> targets;
    files.reserve(snapshot.records.size());
    targets.reserve(snapshot.records.size());
    for (const auto& rec : snapshot.records) {
        files.push_back(rec.file);
        targets.push_back(rec.targets);
    }
    return build_graph(files, targets);
}

ReportBundle build_report_bundle(const InventorySnapshot& snapshot,
                                 const DiffReport& delta, const LinkGraph& graph) {
    ReportBundle bundle;
    bundle.inventory.resize(snapshot.records.size());
    std::iota(bundle.inventory.begin(), bundle.inventory.end(), std::size_t{0});
    std::sort(bundle.inventory.begin(), bundle.inventory.end(),
              ReportOrderLess{snapshot});

    std::set<std::string> violating(delta.newly_high_risk.begin(),
                                    delta.newly_high_risk.end());
    std::map<std::string, std::size_t> by_risk;
    std::map<std::string, std::size_t> by_kind;
    std::size_t inherited = 0;
    for (std::size_t i : bundle.inventory) {
        const auto& rec = snapshot.records[i];
        if (rec.assessment.risk == RiskLevel::high) bundle.high_risk.push_back(i);
        if (violating.count(rec.file.identity())) bundle.violations.push_back(i);
        ++by_risk[std::string(to_string(rec.assessment.risk))];
        ++by_kind[std::string(to_string(rec.file.kind))];
        if (rec.assessment.inherited_critical) ++inherited;
    }

    std::map<std::string, std::size_t> by_error;
    for (const auto& err : snapshot.errors) ++by_error[err.code];

    std::map<std::string, std::size_t> hash_counts;
    for (const auto& rec : snapshot.records) ++hash_counts[rec.file.content_hash];
    std::size_t dup_groups = 0, dup_files = 0;
    for (const auto& [hash, n] : hash_counts) {
        if (n >= 2) {
            ++dup_groups;
            dup_files += n;
        }
    }

    auto& rows = bundle.summary;
    auto num = [](std::size_t v) { return std::to_string(v); };
    rows.emplace_back("scan_id", snapshot.scan_id);
    rows.emplace_back("started_at", format_iso8601(snapshot.started_at));
    rows.emplace_back("finished_at", format_iso8601(snapshot.finished_at));
    rows.emplace_back("record_count", num(snapshot.records.size()));
    rows.emplace_back("error_count", num(snapshot.errors.size()));
    for (auto level : {RiskLevel::high, RiskLevel::medium, RiskLevel::low}) {
        std::string name(to_string(level));
        rows.emplace_back("risk_" + name, num(by_risk[name]));
    }
    rows.emplace_back("inherited_critical", num(inherited));
    for (const auto& [kind, n] : by_kind) rows.emplace_back("kind_" + kind, num(n));
    for (const auto& [code, n] : by_error) rows.emplace_back("error_" + code, num(n));
    rows.emplace_back("duplicate_hash_groups", num(dup_groups));
    rows.emplace_back("duplicate_hash_files", num(dup_files));
    rows.emplace_back("diff_added", num(delta.added.size()));
    rows.emplace_back("diff_modified", num(delta.modified.size()));
    rows.emplace_back("diff_deleted", num(delta.deleted.size()));
    rows.emplace_back("diff_unchanged", num(delta.unchanged.size()));
    rows.emplace_back("newly_high_risk", num(delta.newly_high_risk.size()));
    rows.emplace_back("graph_edges", num(graph.edges.size()));
    rows.emplace_back("graph_dangling", num(graph.nodes.size() - graph.record_count));

    bundle.graph_tsv = edge_list_tsv(graph);
    return bundle;
}

std::vector<fs::path> render_reports(const InventorySnapshot& snapshot,
                                     const DiffReport& delta, const LinkGraph& graph,
                                     const std::set<std::string>& formats,
                                     const fs::path& output_dir) {
    std::error_code ec;
    fs::create_directories(output_dir, ec);
    if (ec) {
        throw Error(errc::report_write_failed,
                    "cannot create " + output_dir.string() + ": " + ec.message());
    }

    ReportBundle bundle = build_report_bundle(snapshot, delta, graph);
    std::vector<fs::path> written;
    auto put = [&](const char* name, const std::string& body) {
        fs::path full = output_dir / name;
        atomic_write_file(full, body);
        written.push_back(full);
    };
    if (formats.count("csv")) {
        put("inventory.csv", rows_csv(snapshot, bundle.inventory));
        put("high-risk.csv", rows_csv(snapshot, bundle.high_risk));
        put("summary.csv", summary_csv(bundle.summary));
        put("violations.csv", rows_csv(snapshot, bundle.violations));
        put("graph.tsv", bundle.graph_tsv);
    }
    if (formats.count("structured")) {
        put("report.jsonl", structured_report(snapshot, bundle, graph));
    }
    return written;
}

PipelineResult run_pipeline(const PipelineConfig& config,
                            const PipelineOptions& options) {
    PipelineResult result;
    std::ostream* log = options.log;
    auto now = [&] {
        return options.clock_now ? *options.clock_now
                                 : static_cast<std::int64_t>(std::time(nullptr));
    };
    std::int64_t started = now();

    ScanFilter filter = config.filter;
    if (options.since_last_scan) filter.since_last_scan = *options.since_last_scan;
    std::optional<std::int64_t> last_scan;
    if (filter.since_last_scan) last_scan = last_scan_time(config.catalog_dir);

    // The previous snapshot is whatever the catalog held before this run.
    std::optional<InventorySnapshot> previous;
    {
        auto snaps = list_snapshots(config.catalog_dir);
        if (!snaps.empty()) previous = load_snapshot(snaps.back());
    }

    DiscoveryOptions dopts;
    dopts.archive = config.archive;
    dopts.worker_threads = config.worker_threads;
    DiscoveryResult found = discover(config.roots, filter, last_scan, dopts);
    if (log) {
        *log << "step 1/5 discover: " << found.records.size() << " spreadsheets under "
             << config.roots.size() << " roots, " << found.errors.size() << " errors\n";
    }

    auto& snapshot = result.snapshot;
    snapshot.records.resize(found.records.size());
    std::vector<std::vector<ScanError>> record_errors(found.records.size());
    {
        std::size_t n = found.records.size();
        unsigned want =
            config.worker_threads ? config.worker_threads : std::thread::hardware_concurrency();
        if (want == 0) want = 1;
        want = static_cast<unsigned>(std::min<std::size_t>(want, n));
        auto assess_one = [&](std::size_t i) {
            snapshot.records[i] =
                assess_record(found.records[i], config.risk, config.archive,
                              record_errors[i]);
        };
        if (want <= 1) {
            for (std::size_t i = 0; i < n; ++i) assess_one(i);
        } else {
            std::atomic<std::size_t> next{0};
            std::exception_ptr first_failure;
            std::mutex failure_mutex;
            auto worker = [&] {
                for (;;) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= n) return;
                    try {
                        assess_one(i);
                    } catch (...) {
                        std::lock_guard<std::mutex> hold(failure_mutex);
                        if (!first_failure) first_failure = std::current_exception();
                    }
                }
            };
            std::vector<std::thread> pool;
            pool.reserve(want);
            for (unsigned t = 0; t < want; ++t) pool.emplace_back(worker);
            for (auto& t : pool) t.join();
            if (first_failure) std::rethrow_exception(first_failure);
        }
    }
    snapshot.errors = std::move(found.errors);
    for (auto& errs : record_errors) {
        for (auto& e : errs) snapshot.errors.push_back(std::move(e));
    }

    // Under an incremental narrowing, records the filter skipped are carried
    // forward from the previous snapshot so the inventory stays complete.
    // Graph-derived state is re-derived below from the merged record set.
    std::size_t carried = 0;
    if (filter.since_last_scan && previous) {
        std::set<std::string> current_ids;
        for (const auto& rec : snapshot.records) current_ids.insert(rec.file.identity());
        for (const auto& prev : previous->records) {
            if (current_ids.count(prev.file.identity())) continue;
            SnapshotRecord kept = prev;
            kept.assessment.inherited_critical = false;
            kept.assessment.effective_materiality_band = kept.assessment.materiality_band;
            kept.assessment.risk =
                assess(kept.assessment.materiality_band_index,
                       kept.assessment.complexity_band_index, config.risk.matrix);
            snapshot.records.push_back(std::move(kept));
            ++carried;
        }
        std::sort(snapshot.records.begin(), snapshot.records.end(),
                  [](const SnapshotRecord& a, const SnapshotRecord& b) {
                      return FileIdentityLess{}(a.file, b.file);
                  });
    }
    if (log) {
        *log << "step 2/5 inventory: " << snapshot.records.size()
             << " records captured, " << carried << " carried forward\n";
    }

    {
        result.graph = graph_from_snapshot(snapshot);
        std::vector<RiskAssessment> assessments;
        assessments.reserve(snapshot.records.size());
        for (const auto& rec : snapshot.records) assessments.push_back(rec.assessment);
        propagate_criticality(result.graph, assessments, config.risk);
        for (std::size_t i = 0; i < assessments.size(); ++i) {
            snapshot.records[i].assessment = std::move(assessments[i]);
        }
    }
    if (log) {
        std::size_t high = 0, medium = 0, low = 0, inherited = 0;
        for (const auto& rec : snapshot.records) {
            switch (rec.assessment.risk) {
                case RiskLevel::high: ++high; break;
                case RiskLevel::medium: ++medium; break;
                case RiskLevel::low: ++low; break;
            }
            if (rec.assessment.inherited_critical) ++inherited;
        }
        *log << "step 3/5 assess: risk high " << high << " / medium " << medium
             << " / low " << low << ", inherited-critical " << inherited << "\n";
    }

    snapshot.scan_id = make_scan_id(started);
    snapshot.started_at = started;
    snapshot.finished_at = now();
    result.snapshot_path = save_snapshot(snapshot, config.catalog_dir);

    result.diff =
        previous ? diff(*previous, snapshot) : diff(InventorySnapshot{}, snapshot);

    fs::path out_dir = options.output_dir ? *options.output_dir : config.output_dir;
    const std::set<std::string>& formats =
        options.report_formats ? *options.report_formats : config.report_formats;
    result.report_files = render_reports(snapshot, result.diff, result.graph, formats,
                                         out_dir);
    if (log) {
        *log << "step 4/5 report: snapshot " << result.snapshot_path.filename().string()
             << ", diff +" << result.diff.added.size() << " ~"
             << result.diff.modified.size() << " -" << result.diff.deleted.size()
             << ", " << result.report_files.size() << " report files -> "
             << out_dir.string() << "\n";
    }

    if (!snapshot.errors.empty()) {
        result.exit_status = kExitErrors;
    } else if (!result.diff.newly_high_risk.empty()) {
        result.exit_status = kExitViolations;
    } else {
        result.exit_status = kExitClean;
    }
    if (log) {
        *log << "step 5/5 schedule: violations " << result.diff.newly_high_risk.size()
             << ", errors " << snapshot.errors.size() << ", exit "
             << result.exit_status << "\n";
    }
    return result;
}

}  // namespace ssrisk
