#include "ssrisk/inventory.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cctype>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include <json.hpp>

#include "ssrisk/util.hpp"

namespace ssrisk {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

// Single writer per catalog directory; readers do not take the lock.
class CatalogLock {
public:
    explicit CatalogLock(const fs::path& dir) {
        fd_ = ::open((dir / "lock").c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
        if (fd_ < 0 || ::flock(fd_, LOCK_EX) != 0) {
            if (fd_ >= 0) ::close(fd_);
            throw Error(errc::catalog_write_failed,
                        "cannot lock catalog directory " + dir.string());
        }
    }
    ~CatalogLock() {
        if (fd_ >= 0) {
            ::flock(fd_, LOCK_UN);
            ::close(fd_);
        }
    }
    CatalogLock(const CatalogLock&) = delete;
    CatalogLock& operator=(const CatalogLock&) = delete;

private:
    int fd_ = -1;
};

json file_to_json(const FileRecord& r) {
    json j{{"path", r.path},
           {"container_chain", r.container_chain},
           {"size_bytes", r.size_bytes},
           {"modified_at", format_iso8601(r.modified_at)},
           {"content_hash", r.content_hash},
           {"kind", std::string(to_string(r.kind))},
           {"extension", r.extension},
           {"extension_mismatch", r.extension_mismatch}};
    if (r.created_at) {
        j["created_at"] = format_iso8601(*r.created_at);
    } else {
        j["created_at"] = nullptr;
    }
    return j;
}

std::int64_t time_from(const json& j, const char* key) {
    auto text = j.at(key).get<std::string>();
    auto t = parse_iso8601(text);
    if (!t) throw std::runtime_error(std::string("bad timestamp in '") + key + "'");
    return *t;
}

FileRecord file_from_json(const json& j) {
    FileRecord r;
    r.path = j.at("path").get<std::string>();
    r.container_chain = j.at("container_chain").get<std::vector<std::string>>();
    r.size_bytes = j.at("size_bytes").get<std::uint64_t>();
    r.modified_at = time_from(j, "modified_at");
    if (j.contains("created_at") && !j.at("created_at").is_null()) {
        r.created_at = time_from(j, "created_at");
    }
    r.content_hash = j.at("content_hash").get<std::string>();
    auto kind = file_kind_from_string(j.at("kind").get<std::string>());
    if (!kind) throw std::runtime_error("unknown file kind");
    r.kind = *kind;
    r.extension = j.at("extension").get<std::string>();
    r.extension_mismatch = j.at("extension_mismatch").get<bool>();
    return r;
}

json metrics_to_json(const MetricsProfile& p) {
    return json{{"metrics_available", p.metrics_available},
                {"worksheet_count", p.worksheet_count},
                {"formula_count", p.formula_count},
                {"formula_error_count", p.formula_error_count},
                {"array_formula_count", p.array_formula_count},
                {"max_if_nesting", p.max_if_nesting},
                {"external_link_count", p.external_link_count},
                {"has_macros", p.has_macros},
                {"named_item_count", p.named_item_count},
                {"invisible_cell_count", p.invisible_cell_count},
                {"hidden_element_count", p.hidden_element_count},
                {"very_hidden_sheet_count", p.very_hidden_sheet_count},
                {"workbook_size_bytes", p.workbook_size_bytes},
                {"is_password_protected", p.is_password_protected},
                {"unparsed_formula_count", p.unparsed_formula_count}};
}

MetricsProfile metrics_from_json(const json& j) {
    MetricsProfile p;
    p.metrics_available = j.at("metrics_available").get<bool>();
    p.worksheet_count = j.at("worksheet_count").get<std::uint64_t>();
    p.formula_count = j.at("formula_count").get<std::uint64_t>();
    p.formula_error_count = j.at("formula_error_count").get<std::uint64_t>();
    p.array_formula_count = j.at("array_formula_count").get<std::uint64_t>();
    p.max_if_nesting = j.at("max_if_nesting").get<std::uint64_t>();
    p.external_link_count = j.at("external_link_count").get<std::uint64_t>();
    p.has_macros = j.at("has_macros").get<bool>();
    p.named_item_count = j.at("named_item_count").get<std::uint64_t>();
    p.invisible_cell_count = j.at("invisible_cell_count").get<std::uint64_t>();
    p.hidden_element_count = j.at("hidden_element_count").get<std::uint64_t>();
    p.very_hidden_sheet_count = j.at("very_hidden_sheet_count").get<std::uint64_t>();
    p.workbook_size_bytes = j.at("workbook_size_bytes").get<std::uint64_t>();
    p.is_password_protected = j.at("is_password_protected").get<bool>();
    p.unparsed_formula_count = j.at("unparsed_formula_count").get<std::uint64_t>();
    return p;
}

json assessment_to_json(const RiskAssessment& a) {
    return json{{"materiality_score", a.materiality_score},
                {"complexity_score", a.complexity_score},
                {"matched_materiality_rule_ids", a.matched_materiality_rule_ids},
                {"matched_complexity_rule_ids", a.matched_complexity_rule_ids},
                {"materiality_band_index", a.materiality_band_index},
                {"complexity_band_index", a.complexity_band_index},
                {"materiality_band", a.materiality_band},
                {"complexity_band", a.complexity_band},
                {"risk", std::string(to_string(a.risk))},
                {"inherited_critical", a.inherited_critical},
                {"effective_materiality_band", a.effective_materiality_band}};
}

RiskAssessment assessment_from_json(const json& j) {
    RiskAssessment a;
    a.materiality_score = j.at("materiality_score").get<std::uint64_t>();
    a.complexity_score = j.at("complexity_score").get<std::uint64_t>();
    a.matched_materiality_rule_ids =
        j.at("matched_materiality_rule_ids").get<std::vector<std::string>>();
    a.matched_complexity_rule_ids =
        j.at("matched_complexity_rule_ids").get<std::vector<std::string>>();
    a.materiality_band_index = j.at("materiality_band_index").get<std::size_t>();
    a.complexity_band_index = j.at("complexity_band_index").get<std::size_t>();
    a.materiality_band = j.at("materiality_band").get<std::string>();
    a.complexity_band = j.at("complexity_band").get<std::string>();
    auto risk = risk_level_from_string(j.at("risk").get<std::string>());
    if (!risk) throw std::runtime_error("unknown risk level");
    a.risk = *risk;
    a.inherited_critical = j.at("inherited_critical").get<bool>();
    a.effective_materiality_band = j.at("effective_materiality_band").get<std::string>();
    return a;
}

json targets_to_json(const std::vector<TargetRef>& ts) {
    json a = json::array();
    for (const auto& t : ts) {
        a.push_back(json{{"target", t.target}, {"source", std::string(to_string(t.source))}});
    }
    return a;
}

std::vector<TargetRef> targets_from_json(const json& j) {
    std::vector<TargetRef> out;
    for (const auto& e : j) {
        TargetRef t;
        t.target = e.at("target").get<std::string>();
        auto src = edge_source_from_string(e.at("source").get<std::string>());
        if (!src) throw std::runtime_error("unknown edge source");
        t.source = *src;
        out.push_back(std::move(t));
    }
    return out;
}

json error_to_json(const ScanError& e) {
    return json{{"type", "error"},
                {"code", e.code},
                {"path", e.path},
                {"container_chain", e.container_chain},
                {"detail", e.detail}};
}

ScanError error_from_json(const json& j) {
    ScanError e;
    e.code = j.at("code").get<std::string>();
    e.path = j.at("path").get<std::string>();
    e.container_chain = j.at("container_chain").get<std::vector<std::string>>();
    e.detail = j.at("detail").get<std::string>();
    return e;
}

bool scan_id_is_safe(const std::string& id) {
    if (id.empty() || id.size() > 128) return false;
    for (char c : id) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') {
            return false;
        }
    }
    return true;
}

}  // namespace

std::string make_scan_id(std::int64_t started_at_unix) {
    std::string stamp;
    for (char c : format_iso8601(started_at_unix)) {
        if (std::isalnum(static_cast<unsigned char>(c))) stamp += c;
    }
    static const char* hex = "0123456789abcdef";
    std::random_device rd;
    std::mt19937 gen(rd());
    std::uniform_int_distribution<int> nibble(0, 15);
    std::string suffix;
    for (int i = 0; i < 6; ++i) suffix += hex[nibble(gen)];
    return stamp + "-" + suffix;
}

std::string record_jsonl_line(const SnapshotRecord& rec) {
    json line{{"type", "record"},
              {"file", file_to_json(rec.file)},
              {"metrics", metrics_to_json(rec.metrics)},
              {"targets", targets_to_json(rec.targets)},
              {"assessment", assessment_to_json(rec.assessment)}};
    return line.dump();
}

std::string error_jsonl_line(const ScanError& err) { return error_to_json(err).dump(); }

std::filesystem::path save_snapshot(const InventorySnapshot& snapshot,
                                    const std::filesystem::path& catalog_dir) {
    if (!scan_id_is_safe(snapshot.scan_id)) {
        throw Error(errc::catalog_write_failed,
                    "scan id '" + snapshot.scan_id + "' is not filename-safe", "scan_id");
    }
    std::error_code ec;
    fs::create_directories(catalog_dir, ec);
    if (ec) {
        throw Error(errc::catalog_write_failed,
                    "cannot create catalog directory " + catalog_dir.string() + ": " +
                        ec.message());
    }

    CatalogLock lock(catalog_dir);

    fs::path out = catalog_dir / ("scan-" + snapshot.scan_id + ".jsonl");
    if (fs::exists(out)) {
        throw Error(errc::catalog_write_failed,
                    "snapshot already exists: " + out.string(), "scan_id");
    }

    std::string body;
    json header{{"type", "header"},
                {"schema_version", kSchemaVersion},
                {"scan_id", snapshot.scan_id},
                {"started_at", format_iso8601(snapshot.started_at)},
                {"finished_at", format_iso8601(snapshot.finished_at)},
                {"record_count", snapshot.records.size()},
                {"error_count", snapshot.errors.size()}};
    body += header.dump();
    body += '\n';
    for (const auto& rec : snapshot.records) {
        body += record_jsonl_line(rec);
        body += '\n';
    }
    for (const auto& err : snapshot.errors) {
        body += error_jsonl_line(err);
        body += '\n';
    }

    try {
        atomic_write_file(out, body);
    } catch (const Error& e) {
        throw Error(errc::catalog_write_failed, e.what());
    }
    return out;
}

InventorySnapshot load_snapshot(const std::filesystem::path& path) {
    Bytes bytes = read_file(path);
    std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());

    InventorySnapshot snap;
    bool have_header = false;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view line =
            nl == std::string_view::npos ? text.substr(pos) : text.substr(pos, nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++lineno;
        try {
            if (line.empty()) throw std::runtime_error("empty line");
            json j = json::parse(line);
            auto type = j.at("type").get<std::string>();
            if (type == "header") {
                if (have_header) throw std::runtime_error("duplicate header");
                int version = j.at("schema_version").get<int>();
                if (version != kSchemaVersion) {
                    throw std::runtime_error("unsupported schema version " +
                                             std::to_string(version));
                }
                snap.scan_id = j.at("scan_id").get<std::string>();
                snap.started_at = time_from(j, "started_at");
                snap.finished_at = time_from(j, "finished_at");
                have_header = true;
            } else if (type == "record") {
                if (!have_header) throw std::runtime_error("record before header");
                SnapshotRecord rec;
                rec.file = file_from_json(j.at("file"));
                rec.metrics = metrics_from_json(j.at("metrics"));
                rec.targets = targets_from_json(j.at("targets"));
                rec.assessment = assessment_from_json(j.at("assessment"));
                snap.records.push_back(std::move(rec));
            } else if (type == "error") {
                if (!have_header) throw std::runtime_error("error line before header");
                snap.errors.push_back(error_from_json(j));
            } else {
                throw std::runtime_error("unknown line type '" + type + "'");
            }
        } catch (const Error& e) {
            throw Error(errc::catalog_corrupt,
                        "line " + std::to_string(lineno) + ": " + e.what(), path.string());
        } catch (const std::exception& e) {
            throw Error(errc::catalog_corrupt,
                        "line " + std::to_string(lineno) + ": " + e.what(), path.string());
        }
    }
    if (!have_header) {
        throw Error(errc::catalog_corrupt, "line 1: missing header", path.string());
    }
    return snap;
}

DiffReport diff(const InventorySnapshot& previous, const InventorySnapshot& current) {
    DiffReport d;
    std::map<std::string, const SnapshotRecord*> prev;
    for (const auto& r : previous.records) prev.emplace(r.file.identity(), &r);

    std::set<std::string> current_ids;
    for (const auto& r : current.records) {
        std::string id = r.file.identity();
        current_ids.insert(id);
        auto it = prev.find(id);
        if (it == prev.end()) {
            d.added.push_back(id);
        } else if (it->second->file.content_hash != r.file.content_hash) {
            d.modified.push_back(id);
        } else {
            d.unchanged.push_back(id);
        }
        bool now_high = r.assessment.risk == RiskLevel::high;
        bool was_high = it != prev.end() && it->second->assessment.risk == RiskLevel::high;
        if (now_high && !was_high) d.newly_high_risk.push_back(id);
    }
    for (const auto& r : previous.records) {
        std::string id = r.file.identity();
        if (!current_ids.count(id)) d.deleted.push_back(id);
    }
    return d;
}

std::vector<std::filesystem::path> list_snapshots(const std::filesystem::path& catalog_dir) {
    std::vector<fs::path> out;
    std::error_code ec;
    for (fs::directory_iterator it(catalog_dir, ec), end; !ec && it != end;
         it.increment(ec)) {
        if (!it->is_regular_file(ec)) continue;
        std::string name = it->path().filename().string();
        if (name.starts_with("scan-") && name.ends_with(".jsonl")) {
            out.push_back(it->path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<std::int64_t> last_scan_time(const std::filesystem::path& catalog_dir) {
    std::optional<std::int64_t> latest;
    for (const auto& path : list_snapshots(catalog_dir)) {
        std::ifstream in(path);
        std::string first_line;
        if (!in || !std::getline(in, first_line)) continue;
        try {
            json j = json::parse(first_line);
            if (j.at("type").get<std::string>() != "header") continue;
            auto t = parse_iso8601(j.at("finished_at").get<std::string>());
            if (t && (!latest || *t > *latest)) latest = *t;
        } catch (const std::exception&) {
            // Damaged snapshots contribute nothing to the watermark.
        }
    }
    return latest;
}

}  // namespace ssrisk
