#include "ssrisk/config.hpp"

#include <initializer_list>

#include <json.hpp>

#include "ssrisk/util.hpp"

namespace ssrisk {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& message) {
    throw Error(errc::config_invalid, message, field);
}

std::string join_field(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
}

void require_keys(const json& obj, const std::string& field,
                  std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed) {
            if (it.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) fail(join_field(field, it.key()), "unknown field");
    }
}

const json& member(const json& obj, const std::string& field, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(join_field(field, key), "required field is missing");
    return *it;
}

std::string get_string(const json& j, const std::string& field) {
    if (!j.is_string()) fail(field, "expected a string");
    return j.get<std::string>();
}

bool get_bool(const json& j, const std::string& field) {
    if (!j.is_boolean()) fail(field, "expected true or false");
    return j.get<bool>();
}

std::uint64_t get_uint(const json& j, const std::string& field) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer()) {
        auto v = j.get<std::int64_t>();
        if (v < 0) fail(field, "must be non-negative");
        return std::uint64_t(v);
    }
    fail(field, "expected a non-negative integer");
}

double get_number(const json& j, const std::string& field) {
    if (!j.is_number()) fail(field, "expected a number");
    return j.get<double>();
}

std::int64_t get_timestamp(const json& j, const std::string& field) {
    auto text = get_string(j, field);
    auto t = parse_iso8601(text);
    if (!t) fail(field, "expected an ISO-8601 timestamp or date");
    return *t;
}

fs::path resolve_path(const std::string& raw, const fs::path& base_dir,
                      const std::string& field) {
    if (raw.empty()) fail(field, "path must not be empty");
    fs::path p(raw);
    if (p.is_relative()) p = base_dir / p;
    return fs::path(lexically_normalize(fs::absolute(p).string()));
}

bool path_contains(const fs::path& outer, const fs::path& inner) {
    std::string o = outer.string();
    std::string i = inner.string();
    if (o == i) return true;
    if (!o.ends_with('/')) o += '/';
    return i.starts_with(o);
}

void parse_roots(const json& j, const fs::path& base_dir, PipelineConfig& cfg) {
    if (!j.is_array() || j.empty()) fail("roots", "at least one scan root is required");
    for (std::size_t i = 0; i < j.size(); ++i) {
        std::string field = "roots[" + std::to_string(i) + "]";
        const json& r = j[i];
        if (r.is_string()) {  // shorthand: bare path string
            ScanRoot root;
            root.path = resolve_path(r.get<std::string>(), base_dir, field).string();
            root.label = root.path;
            cfg.roots.push_back(std::move(root));
            continue;
        }
        if (!r.is_object()) fail(field, "expected a path string or an object");
        require_keys(r, field, {"path", "label", "kind"});
        ScanRoot root;
        root.path = resolve_path(get_string(member(r, field, "path"), field + ".path"),
                                 base_dir, field + ".path")
                        .string();
        root.label = r.contains("label") ? get_string(r["label"], field + ".label")
                                         : root.path;
        if (r.contains("kind")) {
            auto kind = root_kind_from_string(get_string(r["kind"], field + ".kind"));
            if (!kind) fail(field + ".kind", "unknown root kind");
            root.kind = *kind;
        }
        cfg.roots.push_back(std::move(root));
    }
}

void parse_filter(const json& j, PipelineConfig& cfg) {
    if (!j.is_object()) fail("filter", "expected an object");
    require_keys(j, "filter",
                 {"name_patterns", "modified_windows", "since_last_scan",
                  "max_file_size_bytes", "follow_symlinks"});
    if (j.contains("name_patterns")) {
        const json& pats = j["name_patterns"];
        if (!pats.is_array()) fail("filter.name_patterns", "expected an array");
        for (std::size_t i = 0; i < pats.size(); ++i) {
            std::string field = "filter.name_patterns[" + std::to_string(i) + "]";
            auto p = get_string(pats[i], field);
            if (p.empty()) fail(field, "pattern must not be empty");
            cfg.filter.name_patterns.push_back(std::move(p));
        }
    }
    if (j.contains("modified_windows")) {
        const json& wins = j["modified_windows"];
        if (!wins.is_array()) fail("filter.modified_windows", "expected an array");
        for (std::size_t i = 0; i < wins.size(); ++i) {
            std::string field = "filter.modified_windows[" + std::to_string(i) + "]";
            const json& w = wins[i];
            if (!w.is_object()) fail(field, "expected an object");
            require_keys(w, field, {"start", "end"});
            DateWindow win;
            win.start = get_timestamp(member(w, field, "start"), field + ".start");
            const json& endj = member(w, field, "end");
            win.end = get_timestamp(endj, field + ".end");
            // A bare end date means "through that whole day".
            if (endj.is_string() && endj.get<std::string>().size() == 10) {
                win.end += 86'399;
            }
            if (win.start > win.end) fail(field, "window start is after its end");
            cfg.filter.modified_windows.push_back(win);
        }
    }
    if (j.contains("since_last_scan")) {
        cfg.filter.since_last_scan = get_bool(j["since_last_scan"], "filter.since_last_scan");
    }
    if (j.contains("max_file_size_bytes")) {
        cfg.filter.max_file_size_bytes =
            get_uint(j["max_file_size_bytes"], "filter.max_file_size_bytes");
        if (cfg.filter.max_file_size_bytes == 0) {
            fail("filter.max_file_size_bytes", "must be positive");
        }
    }
    if (j.contains("follow_symlinks")) {
        cfg.filter.follow_symlinks = get_bool(j["follow_symlinks"], "filter.follow_symlinks");
    }
}

MaterialityRule parse_materiality_rule(const json& j, const std::string& field) {
    if (!j.is_object()) fail(field, "expected an object");
    require_keys(j, field, {"id", "kind", "pattern", "threshold", "points"});
    MaterialityRule rule;
    rule.id = get_string(member(j, field, "id"), field + ".id");
    auto kind =
        materiality_kind_from_string(get_string(member(j, field, "kind"), field + ".kind"));
    if (!kind) fail(field + ".kind", "unknown materiality rule kind");
    rule.kind = *kind;
    if (j.contains("pattern")) rule.pattern = get_string(j["pattern"], field + ".pattern");
    if (j.contains("threshold")) {
        rule.threshold = get_number(j["threshold"], field + ".threshold");
    }
    rule.points = get_uint(member(j, field, "points"), field + ".points");
    return rule;
}

ComplexityRule parse_complexity_rule(const json& j, const std::string& field) {
    if (!j.is_object()) fail(field, "expected an object");
    require_keys(j, field, {"id", "metric", "comparator", "threshold", "points"});
    ComplexityRule rule;
    rule.id = get_string(member(j, field, "id"), field + ".id");
    auto metric = metric_from_string(get_string(member(j, field, "metric"), field + ".metric"));
    if (!metric) fail(field + ".metric", "unknown complexity metric");
    rule.metric = *metric;
    auto cmp = comparator_from_string(
        get_string(member(j, field, "comparator"), field + ".comparator"));
    if (!cmp) fail(field + ".comparator", "unknown comparator");
    rule.comparator = *cmp;
    if (j.contains("threshold")) {
        rule.threshold = get_number(j["threshold"], field + ".threshold");
    }
    rule.points = get_uint(member(j, field, "points"), field + ".points");
    return rule;
}

BandScale parse_scale(const json& j, const std::string& field) {
    if (!j.is_object()) fail(field, "expected an object");
    require_keys(j, field, {"cuts", "labels"});
    BandScale scale;
    const json& cuts = member(j, field, "cuts");
    if (!cuts.is_array() || cuts.size() != 2) {
        fail(field + ".cuts", "expected [lower-cut, upper-cut]");
    }
    scale.lower_cut = get_uint(cuts[0], field + ".cuts[0]");
    scale.upper_cut = get_uint(cuts[1], field + ".cuts[1]");
    const json& labels = member(j, field, "labels");
    if (!labels.is_array() || labels.size() != 3) {
        fail(field + ".labels", "expected three band labels");
    }
    for (std::size_t i = 0; i < 3; ++i) {
        scale.labels[i] = get_string(labels[i], field + ".labels[" + std::to_string(i) + "]");
    }
    return scale;
}

RiskMatrix parse_matrix(const json& j, const BandScale& materiality,
                        const BandScale& complexity) {
    if (!j.is_object()) fail("matrix", "expected an object keyed by materiality band");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const auto& label : materiality.labels) {
            if (it.key() == label) known = true;
        }
        if (!known) fail("matrix." + it.key(), "not a materiality band label");
    }
    RiskMatrix matrix;
    for (std::size_t m = 0; m < 3; ++m) {
        const std::string& mlabel = materiality.labels[m];
        auto row = j.find(mlabel);
        if (row == j.end()) fail("matrix." + mlabel, "missing matrix row");
        if (!row->is_object()) {
            fail("matrix." + mlabel, "expected an object keyed by complexity band");
        }
        for (auto it = row->begin(); it != row->end(); ++it) {
            bool known = false;
            for (const auto& label : complexity.labels) {
                if (it.key() == label) known = true;
            }
            if (!known) {
                fail("matrix." + mlabel + "." + it.key(), "not a complexity band label");
            }
        }
        for (std::size_t c = 0; c < 3; ++c) {
            const std::string& clabel = complexity.labels[c];
            std::string field = "matrix." + mlabel + "." + clabel;
            auto cell = row->find(clabel);
            if (cell == row->end()) fail(field, "missing matrix cell");
            auto risk = risk_level_from_string(get_string(*cell, field));
            if (!risk) fail(field, "expected LOW, MEDIUM, or HIGH");
            matrix.cells[m][c] = *risk;
        }
    }
    return matrix;
}

}  // namespace

PipelineConfig default_pipeline_config() {
    PipelineConfig cfg;
    cfg.risk = default_risk_config();
    cfg.catalog_dir = "catalog";
    cfg.output_dir = "reports";
    return cfg;
}

PipelineConfig parse_config(std::string_view text, const fs::path& base_dir) {
    json root;
    try {
        root = json::parse(text);
    } catch (const std::exception& e) {
        fail("", std::string("not valid JSON: ") + e.what());
    }
    if (!root.is_object()) fail("", "top level must be an object");
    require_keys(root, "",
                 {"schema_version", "roots", "filter", "archive", "worker_threads",
                  "materiality_rules", "complexity_rules", "materiality_scale",
                  "complexity_scale", "matrix", "catalog_dir", "output_dir",
                  "report_formats"});

    PipelineConfig cfg = default_pipeline_config();
    cfg.roots.clear();

    if (root.contains("schema_version")) {
        auto v = get_uint(root["schema_version"], "schema_version");
        if (v != 1) fail("schema_version", "unsupported schema version");
        cfg.schema_version = int(v);
    }

    parse_roots(member(root, "", "roots"), base_dir, cfg);

    if (root.contains("filter")) parse_filter(root["filter"], cfg);

    if (root.contains("archive")) {
        const json& a = root["archive"];
        if (!a.is_object()) fail("archive", "expected an object");
        require_keys(a, "archive", {"max_depth", "budget_bytes"});
        if (a.contains("max_depth")) {
            auto d = get_uint(a["max_depth"], "archive.max_depth");
            if (d < 1 || d > 16) fail("archive.max_depth", "must be between 1 and 16");
            cfg.archive.max_depth = int(d);
        }
        if (a.contains("budget_bytes")) {
            cfg.archive.budget_bytes = get_uint(a["budget_bytes"], "archive.budget_bytes");
            if (cfg.archive.budget_bytes == 0) fail("archive.budget_bytes", "must be positive");
        }
    }

    if (root.contains("worker_threads")) {
        auto w = get_uint(root["worker_threads"], "worker_threads");
        if (w > 1024) fail("worker_threads", "must be at most 1024");
        cfg.worker_threads = unsigned(w);
    }

    if (root.contains("materiality_rules")) {
        const json& rules = root["materiality_rules"];
        if (!rules.is_array()) fail("materiality_rules", "expected an array");
        cfg.risk.materiality_rules.clear();
        for (std::size_t i = 0; i < rules.size(); ++i) {
            cfg.risk.materiality_rules.push_back(parse_materiality_rule(
                rules[i], "materiality_rules[" + std::to_string(i) + "]"));
        }
    }
    if (root.contains("complexity_rules")) {
        const json& rules = root["complexity_rules"];
        if (!rules.is_array()) fail("complexity_rules", "expected an array");
        cfg.risk.complexity_rules.clear();
        for (std::size_t i = 0; i < rules.size(); ++i) {
            cfg.risk.complexity_rules.push_back(parse_complexity_rule(
                rules[i], "complexity_rules[" + std::to_string(i) + "]"));
        }
    }
    if (root.contains("materiality_scale")) {
        cfg.risk.materiality_scale = parse_scale(root["materiality_scale"], "materiality_scale");
    }
    if (root.contains("complexity_scale")) {
        cfg.risk.complexity_scale = parse_scale(root["complexity_scale"], "complexity_scale");
    }
    if (root.contains("matrix")) {
        cfg.risk.matrix = parse_matrix(root["matrix"], cfg.risk.materiality_scale,
                                       cfg.risk.complexity_scale);
    }

    if (root.contains("catalog_dir")) {
        cfg.catalog_dir = resolve_path(get_string(root["catalog_dir"], "catalog_dir"),
                                       base_dir, "catalog_dir");
    } else {
        cfg.catalog_dir = resolve_path("catalog", base_dir, "catalog_dir");
    }
    if (root.contains("output_dir")) {
        cfg.output_dir = resolve_path(get_string(root["output_dir"], "output_dir"),
                                      base_dir, "output_dir");
    } else {
        cfg.output_dir = resolve_path("reports", base_dir, "output_dir");
    }

    if (root.contains("report_formats")) {
        const json& formats = root["report_formats"];
        if (!formats.is_array() || formats.empty()) {
            fail("report_formats", "expected a non-empty array");
        }
        cfg.report_formats.clear();
        for (std::size_t i = 0; i < formats.size(); ++i) {
            std::string field = "report_formats[" + std::to_string(i) + "]";
            auto f = get_string(formats[i], field);
            if (f != "csv" && f != "structured") {
                fail(field, "expected \"csv\" or \"structured\"");
            }
            cfg.report_formats.insert(std::move(f));
        }
    }

    validate_risk_config(cfg.risk);

    // Artifacts inside a scanned tree would make every run dirty the tree it
    // audits (and re-scan its own outputs); keep them disjoint.
    auto check_disjoint = [&](const fs::path& dir, const char* name, std::size_t i) {
        fs::path root_path(cfg.roots[i].path);
        if (path_contains(root_path, dir)) {
            fail(name, "must not lie inside scan root " + cfg.roots[i].path);
        }
        if (path_contains(dir, root_path)) {
            fail("roots[" + std::to_string(i) + "].path",
                 "must not lie inside " + std::string(name));
        }
    };
    for (std::size_t i = 0; i < cfg.roots.size(); ++i) {
        check_disjoint(cfg.catalog_dir, "catalog_dir", i);
        check_disjoint(cfg.output_dir, "output_dir", i);
    }

    return cfg;
}

PipelineConfig load_config(const fs::path& path) {
    Bytes bytes;
    try {
        bytes = read_file(path);
    } catch (const Error& e) {
        throw Error(errc::config_invalid,
                    "cannot read config file " + path.string() + ": " + e.what());
    }
    fs::path base = fs::absolute(path).parent_path();
    return parse_config(std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                         bytes.size()),
                        base);
}

}  // namespace ssrisk
