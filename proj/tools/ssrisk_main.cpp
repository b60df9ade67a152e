// ssrisk: spreadsheet discovery, risk assessment, and inventory reporting.
//
// Exit codes: 0 clean, 2 newly-high-risk findings, 1 errors (scan errors or
// a fatal failure, reported as one JSON line on stderr).
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ssrisk/config.hpp"
#include "ssrisk/discovery.hpp"
#include "ssrisk/inventory.hpp"
#include "ssrisk/pipeline.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace ssrisk;

namespace {

struct GlobalFlags {
    std::string config_path = "ssrisk.json";
    std::string out_dir;
    bool since_last_scan = false;
    std::vector<std::string> formats;
};

PipelineOptions options_from(const GlobalFlags& g) {
    PipelineOptions opts;
    opts.log = &std::clog;
    if (g.since_last_scan) opts.since_last_scan = true;
    if (!g.out_dir.empty()) opts.output_dir = fs::path(g.out_dir);
    if (!g.formats.empty()) {
        opts.report_formats =
            std::set<std::string>(g.formats.begin(), g.formats.end());
    }
    return opts;
}

// The snapshot to report on, plus its predecessor in the same catalog.
struct SnapshotPick {
    fs::path current;
    std::optional<fs::path> previous;
};

SnapshotPick pick_snapshot(const std::string& explicit_path,
                           const fs::path& catalog_dir) {
    SnapshotPick pick;
    std::vector<fs::path> known;
    if (!explicit_path.empty()) {
        pick.current = fs::path(explicit_path);
        known = list_snapshots(pick.current.parent_path());
    } else {
        known = list_snapshots(catalog_dir);
        if (known.empty()) {
            throw Error(errc::catalog_empty,
                        "no snapshots in " + catalog_dir.string());
        }
        pick.current = known.back();
    }
    for (std::size_t i = 0; i < known.size(); ++i) {
        if (known[i].filename() == pick.current.filename() && i > 0) {
            pick.previous = known[i - 1];
        }
    }
    return pick;
}

int exit_status_for(const InventorySnapshot& snap, const DiffReport& delta) {
    if (!snap.errors.empty()) return kExitErrors;
    if (!delta.newly_high_risk.empty()) return kExitViolations;
    return kExitClean;
}

int cmd_scan(const GlobalFlags& g) {
    PipelineConfig cfg = load_config(g.config_path);
    ScanFilter filter = cfg.filter;
    if (g.since_last_scan) filter.since_last_scan = true;
    std::optional<std::int64_t> last;
    if (filter.since_last_scan) last = last_scan_time(cfg.catalog_dir);

    DiscoveryOptions dopts;
    dopts.archive = cfg.archive;
    dopts.worker_threads = cfg.worker_threads;
    DiscoveryResult found = discover(cfg.roots, filter, last, dopts);
    for (const auto& rec : found.records) {
        std::cout << to_string(rec.kind) << '\t' << rec.size_bytes << '\t'
                  << rec.identity() << '\n';
    }
    for (const auto& err : found.errors) {
        std::cerr << err.code << '\t' << err.path << '\t' << err.detail << '\n';
    }
    std::clog << found.records.size() << " spreadsheets, " << found.errors.size()
              << " errors\n";
    return found.errors.empty() ? kExitClean : kExitErrors;
}

int cmd_assess(const GlobalFlags& g) {
    PipelineConfig cfg = load_config(g.config_path);
    PipelineResult res = run_pipeline(cfg, options_from(g));
    std::cout << res.snapshot_path.string() << '\n';
    for (const auto& p : res.report_files) std::cout << p.string() << '\n';
    return res.exit_status;
}

int cmd_report(const GlobalFlags& g, const std::string& snapshot_path) {
    PipelineConfig cfg = load_config(g.config_path);
    SnapshotPick pick = pick_snapshot(snapshot_path, cfg.catalog_dir);
    InventorySnapshot snap = load_snapshot(pick.current);
    InventorySnapshot prev;
    if (pick.previous) prev = load_snapshot(*pick.previous);
    DiffReport delta = diff(prev, snap);
    LinkGraph graph = graph_from_snapshot(snap);

    fs::path out_dir = g.out_dir.empty() ? cfg.output_dir : fs::path(g.out_dir);
    std::set<std::string> formats =
        g.formats.empty() ? cfg.report_formats
                          : std::set<std::string>(g.formats.begin(), g.formats.end());
    for (const auto& p : render_reports(snap, delta, graph, formats, out_dir)) {
        std::cout << p.string() << '\n';
    }
    return exit_status_for(snap, delta);
}

int cmd_diff(const std::string& previous_path, const std::string& current_path) {
    InventorySnapshot prev = load_snapshot(previous_path);
    InventorySnapshot cur = load_snapshot(current_path);
    DiffReport delta = diff(prev, cur);
    json out{{"previous", prev.scan_id},
             {"current", cur.scan_id},
             {"added", delta.added},
             {"modified", delta.modified},
             {"deleted", delta.deleted},
             {"unchanged", delta.unchanged},
             {"newly_high_risk", delta.newly_high_risk}};
    std::cout << out.dump() << '\n';
    return delta.newly_high_risk.empty() ? kExitClean : kExitViolations;
}

int cmd_graph(const GlobalFlags& g, const std::string& snapshot_path) {
    PipelineConfig cfg = load_config(g.config_path);
    SnapshotPick pick = pick_snapshot(snapshot_path, cfg.catalog_dir);
    InventorySnapshot snap = load_snapshot(pick.current);
    std::cout << edge_list_tsv(graph_from_snapshot(snap));
    return kExitClean;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spreadsheet inventory and risk assessment"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand name

    GlobalFlags g;
    app.add_option("--config", g.config_path,
                   "pipeline configuration file (default ssrisk.json)");
    app.add_option("--out-dir", g.out_dir, "report output directory override");
    app.add_flag("--since-last-scan", g.since_last_scan,
                 "narrow discovery to files modified since the last scan");
    app.add_option("--format", g.formats, "report format: csv or structured")
        ->check(CLI::IsMember({"csv", "structured"}));

    CLI::App* scan = app.add_subcommand("scan", "discover spreadsheets and list them");
    CLI::App* assess =
        app.add_subcommand("assess", "run the full discover/assess/report pipeline");
    CLI::App* report =
        app.add_subcommand("report", "re-render reports from a stored snapshot");
    std::string report_snapshot;
    report->add_option("--snapshot", report_snapshot,
                       "snapshot file (default: latest in the catalog)");
    CLI::App* diffc = app.add_subcommand("diff", "compare two snapshot files");
    std::string diff_previous, diff_current;
    diffc->add_option("previous", diff_previous, "earlier snapshot file")->required();
    diffc->add_option("current", diff_current, "later snapshot file")->required();
    CLI::App* graphc =
        app.add_subcommand("graph", "emit the link-graph edge list as TSV");
    std::string graph_snapshot;
    graphc->add_option("--snapshot", graph_snapshot,
                       "snapshot file (default: latest in the catalog)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (scan->parsed()) return cmd_scan(g);
        if (assess->parsed()) return cmd_assess(g);
        if (report->parsed()) return cmd_report(g, report_snapshot);
        if (diffc->parsed()) return cmd_diff(diff_previous, diff_current);
        if (graphc->parsed()) return cmd_graph(g, graph_snapshot);
    } catch (const Error& e) {
        json err{{"error", e.code()}, {"message", e.what()}};
        if (!e.field().empty()) err["field"] = e.field();
        std::cerr << err.dump() << '\n';
        return kExitErrors;
    } catch (const std::exception& e) {
        json err{{"error", "internal"}, {"message", e.what()}};
        std::cerr << err.dump() << '\n';
        return kExitErrors;
    }
    return kExitErrors;  // unreachable: a subcommand is required
}
