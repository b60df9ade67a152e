#include "ssrisk/link_graph.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include "ssrisk/util.hpp"

namespace ssrisk {

namespace {

// On-disk path plus container entries joined into one lexical path, so
// archive members resolve relative targets inside their own archive.
std::string virtual_path(const FileRecord& record) {
    std::string p = record.path;
    for (const auto& entry : record.container_chain) {
        p += '/';
        p += entry;
    }
    return lexically_normalize(p);
}

std::string parent_dir(std::string_view path) {
    auto pos = path.find_last_of('/');
    if (pos == std::string_view::npos || pos == 0) return "/";
    return std::string(path.substr(0, pos));
}

}  // namespace

std::string_view to_string(EdgeSource s) {
    switch (s) {
        case EdgeSource::external_part: return "external-part";
        case EdgeSource::formula_ref: return "formula-ref";
    }
    return "external-part";
}

std::optional<EdgeSource> edge_source_from_string(std::string_view s) {
    if (s == "external-part") return EdgeSource::external_part;
    if (s == "formula-ref") return EdgeSource::formula_ref;
    return std::nullopt;
}

std::optional<std::size_t> LinkGraph::node_index(std::string_view file_id) const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].file_id == file_id) return i;
    }
    return std::nullopt;
}

std::vector<TargetRef> collect_target_refs(const WorkbookFacts& facts,
                                           const std::vector<formula::Analysis>& analyses) {
    std::map<std::string, EdgeSource> targets;
    for (const auto& t : facts.external_targets) {
        targets.emplace(t, EdgeSource::external_part);
    }
    for (const auto& analysis : analyses) {
        if (!analysis.parsed) continue;
        for (const auto& ref : analysis.refs) {
            if (ref.scope != formula::RefTarget::Scope::external || !ref.workbook_index) {
                continue;
            }
            int n = *ref.workbook_index;
            if (n >= 1 && std::size_t(n) <= facts.external_targets.size()) {
                // Backed by a declared part; already present with that source.
                continue;
            }
            targets.emplace("[" + std::to_string(n) + "]", EdgeSource::formula_ref);
        }
    }
    std::vector<TargetRef> out;
    out.reserve(targets.size());
    for (const auto& [target, source] : targets) out.push_back({target, source});
    return out;
}

LinkGraph build_graph(const std::vector<FileRecord>& records,
                      const std::vector<std::vector<TargetRef>>& targets_per_record) {
    LinkGraph graph;
    graph.record_count = records.size();
    graph.nodes.reserve(records.size());

    // Case-insensitive lookup from lexical path to node index.
    std::map<std::string, std::size_t> by_path;
    for (std::size_t i = 0; i < records.size(); ++i) {
        graph.nodes.push_back({records[i].identity(), true});
        by_path.emplace(to_lower(virtual_path(records[i])), i);
    }

    std::set<std::pair<std::size_t, std::size_t>> seen_edges;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (i >= targets_per_record.size()) break;
        const std::string base = parent_dir(virtual_path(records[i]));
        for (const auto& ref : targets_per_record[i]) {
            std::string resolved = normalize_target_path(ref.target, base);
            std::size_t feeder;
            auto hit = by_path.find(to_lower(resolved));
            if (hit != by_path.end()) {
                feeder = hit->second;
            } else {
                feeder = graph.nodes.size();
                graph.nodes.push_back({resolved, false});
                by_path.emplace(to_lower(resolved), feeder);
            }
            if (seen_edges.emplace(feeder, i).second) {
                graph.edges.push_back({feeder, i, ref.source});
            }
        }
    }
    return graph;
}

void propagate_criticality(const LinkGraph& graph,
                           std::vector<RiskAssessment>& assessments,
                           const RiskConfig& config) {
    const std::size_t n = graph.nodes.size();
    const std::size_t top = 2;

    // Reverse adjacency: who feeds each dependent.
    std::vector<std::vector<std::size_t>> feeders_of(n);
    for (const auto& e : graph.edges) {
        if (e.from < n && e.to < n) feeders_of[e.to].push_back(e.from);
    }

    // Seed from own materiality bands; walk dependent -> feeder.
    std::vector<char> reaches_critical(n, 0);
    std::deque<std::size_t> queue;
    for (std::size_t i = 0; i < assessments.size() && i < n; ++i) {
        if (assessments[i].materiality_band_index == top) queue.push_back(i);
    }
    std::vector<char> seed(n, 0);
    for (std::size_t i : queue) seed[i] = 1;
    while (!queue.empty()) {
        std::size_t node = queue.front();
        queue.pop_front();
        for (std::size_t feeder : feeders_of[node]) {
            if (!reaches_critical[feeder]) {
                reaches_critical[feeder] = 1;
                queue.push_back(feeder);
            }
        }
    }

    for (std::size_t i = 0; i < assessments.size() && i < n; ++i) {
        if (!reaches_critical[i] || seed[i]) continue;
        auto& a = assessments[i];
        a.inherited_critical = true;
        a.effective_materiality_band = config.materiality_scale.labels[top];
        a.risk = assess(top, a.complexity_band_index, config.matrix);
    }
}

std::string edge_list_tsv(const LinkGraph& graph) {
    std::vector<std::string> lines;
    lines.reserve(graph.edges.size());
    for (const auto& e : graph.edges) {
        const auto& feeder = graph.nodes[e.from];
        const auto& dependent = graph.nodes[e.to];
        lines.push_back(feeder.file_id + "\t" + dependent.file_id + "\t" +
                        (feeder.resolved ? "true" : "false"));
    }
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const auto& line : lines) {
        out += line;
        out += '\n';
    }
    return out;
}

}  // namespace ssrisk
