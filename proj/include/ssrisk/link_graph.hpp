#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ssrisk/file_record.hpp"
#include "ssrisk/formula.hpp"
#include "ssrisk/rules.hpp"
#include "ssrisk/workbook.hpp"

namespace ssrisk {

enum class EdgeSource { external_part, formula_ref };

std::string_view to_string(EdgeSource s);
std::optional<EdgeSource> edge_source_from_string(std::string_view s);

// One graph node: an inventory record (resolved) or an external target no
// record matched (dangling). file_id is the record identity for resolved
// nodes and the normalized target path for dangling ones.
struct LinkNode {
    std::string file_id;
    bool resolved = true;

    bool operator==(const LinkNode&) const = default;
};

// Data-flow edge: `from` feeds `to` (the dependent's formulas read the
// feeder). Indices into LinkGraph::nodes.
struct LinkEdge {
    std::size_t from = 0;
    std::size_t to = 0;
    EdgeSource source = EdgeSource::external_part;

    bool operator==(const LinkEdge&) const = default;
};

struct LinkGraph {
    // Nodes [0, record_count) mirror the input records in order; dangling
    // targets follow in first-encounter order.
    std::vector<LinkNode> nodes;
    std::vector<LinkEdge> edges;
    std::size_t record_count = 0;

    std::optional<std::size_t> node_index(std::string_view file_id) const;
};

// One external target occurrence with its provenance: declared external part,
// or a bracket index in formula text that no part backs.
struct TargetRef {
    std::string target;
    EdgeSource source = EdgeSource::external_part;

    bool operator==(const TargetRef&) const = default;
};

// Deduplicated per-workbook targets, sorted by target string. Bracket
// indexes that resolve into the part list collapse onto the part's target;
// out-of-range indexes stay as literal "[n]" markers with formula-ref
// provenance.
std::vector<TargetRef> collect_target_refs(const WorkbookFacts& facts,
                                           const std::vector<formula::Analysis>& analyses);

// Builds the dependency graph for one scan. targets_per_record aligns with
// records. Each target resolves lexically against the referencing record's
// directory (container members resolve within their archive); name comparison
// is case-insensitive. Unmatched targets become dangling nodes; edges are
// deduplicated on (from, to).
LinkGraph build_graph(const std::vector<FileRecord>& records,
                      const std::vector<std::vector<TargetRef>>& targets_per_record);

// Marks every node that transitively feeds a node whose own materiality band
// is the top band: inherited_critical=true, effective band raised to the top
// label, risk recomputed from (top band, own complexity band). assessments
// align with the graph's record nodes. Idempotent; complexity untouched.
void propagate_criticality(const LinkGraph& graph,
                           std::vector<RiskAssessment>& assessments,
                           const RiskConfig& config);

// Plain-text export: one "feeder<TAB>dependent<TAB>resolved" line per edge,
// sorted, where resolved reports the feeder node's flag.
std::string edge_list_tsv(const LinkGraph& graph);

}  // namespace ssrisk
