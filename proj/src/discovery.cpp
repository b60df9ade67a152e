#include "ssrisk/discovery.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <set>
#include <thread>

#include "ssrisk/sha256.hpp"
#include "ssrisk/sniff.hpp"
#include "ssrisk/zip_reader.hpp"

namespace fs = std::filesystem;

namespace ssrisk {

std::string_view to_string(RootKind k) {
    switch (k) {
        case RootKind::file_share: return "file-share";
        case RootKind::repository_export: return "repository-export";
        case RootKind::workstation: return "workstation";
    }
    return "file-share";
}

std::optional<RootKind> root_kind_from_string(std::string_view s) {
    for (RootKind k : {RootKind::file_share, RootKind::repository_export, RootKind::workstation}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

bool filter_admits(const ScanFilter& filter, std::string_view file_name,
                   std::int64_t modified_at, std::optional<std::int64_t> last_scan_at) {
    bool name_active = !filter.name_patterns.empty();
    bool window_active = !filter.modified_windows.empty();
    bool incremental_active = filter.since_last_scan && last_scan_at.has_value();
    if (!name_active && !window_active && !incremental_active) return true;

    if (name_active) {
        for (const auto& pat : filter.name_patterns) {
            if (matches_pattern(file_name, pat)) return true;
        }
    }
    if (window_active) {
        for (const auto& w : filter.modified_windows) {
            if (modified_at >= w.start && modified_at <= w.end) return true;
        }
    }
    if (incremental_active && modified_at > *last_scan_at) return true;
    return false;
}

namespace {

void gather_files(const fs::path& dir, bool follow_symlinks,
                  std::set<std::string>& visited_dirs, std::vector<fs::path>& files,
                  std::vector<ScanError>& errors) {
    std::error_code ec;
    std::vector<fs::directory_entry> entries;
    fs::directory_iterator it(dir, ec);
    if (ec) {
        errors.push_back({errc::access_denied, dir.string(), {}, ec.message()});
        return;
    }
    for (fs::directory_iterator end; it != end; it.increment(ec)) {
        if (ec) {
            errors.push_back({errc::access_denied, dir.string(), {}, ec.message()});
            return;
        }
        entries.push_back(*it);
    }
    std::sort(entries.begin(), entries.end(),
              [](const fs::directory_entry& a, const fs::directory_entry& b) {
                  return a.path().native() < b.path().native();
              });
    for (const auto& de : entries) {
        std::error_code tec;
        bool symlink = de.is_symlink(tec);
        if (tec) continue;
        if (symlink && !follow_symlinks) continue;
        if (de.is_directory(tec) && !tec) {
            if (follow_symlinks) {
                // Canonical-path visited set breaks symlink loops.
                auto canon = fs::weakly_canonical(de.path(), tec);
                if (tec) continue;
                if (!visited_dirs.insert(canon.string()).second) continue;
            }
            gather_files(de.path(), follow_symlinks, visited_dirs, files, errors);
        } else if (de.is_regular_file(tec) && !tec) {
            files.push_back(de.path());
        }
    }
}

FileRecord make_record(std::string path, std::vector<std::string> chain, FileKind kind,
                       std::span<const std::uint8_t> bytes, std::int64_t modified_at,
                       std::optional<std::int64_t> created_at) {
    FileRecord rec;
    rec.path = std::move(path);
    rec.container_chain = std::move(chain);
    rec.size_bytes = bytes.size();
    rec.modified_at = modified_at;
    rec.created_at = created_at;
    rec.content_hash = sha256_hex(bytes);
    rec.kind = kind;
    rec.extension = extension_of(rec.container_chain.empty() ? rec.path
                                                             : rec.container_chain.back());
    rec.extension_mismatch = compute_extension_mismatch(kind, rec.extension);
    return rec;
}

void expand_into(const std::string& outer_path, const std::vector<std::string>& chain,
                 std::span<const std::uint8_t> bytes, std::uint64_t& remaining,
                 const ArchiveLimits& limits, std::vector<ScanError>& errors,
                 std::vector<FileRecord>& out) {
    std::optional<zip::Archive> archive;
    try {
        archive = zip::Archive::open(bytes);
    } catch (const zip::ZipError& ze) {
        errors.push_back({errc::corrupt_archive, outer_path, chain, ze.detail});
        return;
    }
    if (!archive) {
        errors.push_back({errc::corrupt_archive, outer_path, chain, "no zip structure"});
        return;
    }
    for (const auto& entry : archive->entries()) {
        if (entry.is_directory()) continue;
        auto entry_chain = chain;
        entry_chain.push_back(entry.name);
        Bytes entry_bytes;
        try {
            entry_bytes = archive->extract(entry, remaining);
        } catch (const zip::ZipError& ze) {
            if (ze.kind == zip::ZipError::Kind::budget_exceeded) {
                errors.push_back({errc::archive_budget_exceeded, outer_path, chain, ze.detail});
                return;  // budget is spent for this whole archive; keep partial results
            }
            errors.push_back({errc::corrupt_archive, outer_path, entry_chain, ze.detail});
            continue;
        }
        remaining -= entry_bytes.size();
        FileKind kind = sniff_kind(entry_bytes);
        if (is_spreadsheet_kind(kind)) {
            out.push_back(make_record(outer_path, entry_chain, kind, entry_bytes,
                                      entry.modified_unix(), std::nullopt));
        } else if (kind == FileKind::zip_archive &&
                   entry_chain.size() < static_cast<size_t>(limits.max_depth)) {
            expand_into(outer_path, entry_chain, entry_bytes, remaining, limits, errors, out);
        }
    }
}

}  // namespace

std::vector<FileRecord> expand_archive(const FileRecord& record,
                                       std::span<const std::uint8_t> bytes,
                                       const ArchiveLimits& limits,
                                       std::vector<ScanError>& errors) {
    std::vector<FileRecord> out;
    if (record.kind != FileKind::zip_archive) return out;  // spreadsheets are terminal
    if (record.container_chain.size() >= static_cast<size_t>(limits.max_depth)) return out;
    std::uint64_t remaining = limits.budget_bytes;
    expand_into(record.path, record.container_chain, bytes, remaining, limits, errors, out);
    return out;
}

WalkResult walk(const ScanRoot& root, const ScanFilter& filter,
                std::optional<std::int64_t> last_scan_at, const DiscoveryOptions& opts) {
    WalkResult out;
    std::error_code ec;
    if (!fs::is_directory(root.path, ec) || ec) {
        out.errors.push_back({errc::root_unreadable, root.path, {},
                              "root is not a readable directory (" + root.label + ")"});
        return out;
    }

    std::vector<fs::path> files;
    std::set<std::string> visited;
    gather_files(root.path, filter.follow_symlinks, visited, files, out.errors);

    // Per-file sniff/hash work is embarrassingly parallel; slots keep the
    // deterministic traversal order regardless of worker scheduling.
    std::vector<std::optional<FileRecord>> slots(files.size());
    std::vector<std::vector<ScanError>> error_slots(files.size());

    auto process = [&](size_t i) {
        const fs::path& p = files[i];
        auto times = stat_times(p);
        if (!times) {
            error_slots[i].push_back({errc::access_denied, p.string(), {}, "stat failed"});
            return;
        }
        std::error_code sec;
        std::uint64_t size = fs::file_size(p, sec);
        if (sec) {
            error_slots[i].push_back({errc::access_denied, p.string(), {}, sec.message()});
            return;
        }
        if (size > filter.max_file_size_bytes) return;
        if (!filter_admits(filter, p.filename().string(), times->modified_at, last_scan_at))
            return;
        Bytes bytes;
        try {
            bytes = read_file(p);
        } catch (const Error& e) {
            error_slots[i].push_back({errc::access_denied, p.string(), {}, e.what()});
            return;
        }
        FileKind kind = sniff_kind(bytes);
        if (kind == FileKind::other) return;
        slots[i] = make_record(p.string(), {}, kind, bytes, times->modified_at,
                               times->created_at);
    };

    unsigned n_threads = opts.worker_threads ? opts.worker_threads
                                             : std::max(1u, std::thread::hardware_concurrency());
    if (n_threads <= 1 || files.size() < 2) {
        for (size_t i = 0; i < files.size(); ++i) process(i);
    } else {
        std::atomic<size_t> next{0};
        auto drain = [&] {
            for (;;) {
                size_t i = next.fetch_add(1);
                if (i >= files.size()) break;
                process(i);
            }
        };
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(drain);
        drain();
    }

    for (size_t i = 0; i < files.size(); ++i) {
        for (auto& e : error_slots[i]) out.errors.push_back(std::move(e));
        if (slots[i]) out.records.push_back(std::move(*slots[i]));
    }
    return out;
}

DiscoveryResult discover(const std::vector<ScanRoot>& roots, const ScanFilter& filter,
                         std::optional<std::int64_t> last_scan_at,
                         const DiscoveryOptions& opts) {
    DiscoveryResult out;
    size_t failed_roots = 0;
    for (const auto& root : roots) {
        WalkResult wr = walk(root, filter, last_scan_at, opts);
        bool root_failed =
            !wr.errors.empty() && wr.errors.front().code == errc::root_unreadable;
        if (root_failed) ++failed_roots;
        for (auto& e : wr.errors) out.errors.push_back(std::move(e));
        for (auto& rec : wr.records) {
            if (rec.kind == FileKind::zip_archive) {
                Bytes bytes;
                try {
                    bytes = read_file(rec.path);
                } catch (const Error& e) {
                    out.errors.push_back({errc::access_denied, rec.path, {}, e.what()});
                    continue;
                }
                auto nested = expand_archive(rec, bytes, opts.archive, out.errors);
                for (auto& n : nested) out.records.push_back(std::move(n));
            } else {
                out.records.push_back(std::move(rec));
            }
        }
    }
    if (!roots.empty() && failed_roots == roots.size()) {
        out.no_roots_scanned = true;
        out.errors.push_back({errc::no_roots_scanned, "", {}, "every configured root failed"});
    }
    std::sort(out.records.begin(), out.records.end(), FileIdentityLess{});
    out.records.erase(std::unique(out.records.begin(), out.records.end(),
                                  [](const FileRecord& a, const FileRecord& b) {
                                      return a.path == b.path &&
                                             a.container_chain == b.container_chain;
                                  }),
                      out.records.end());
    return out;
}

}  // namespace ssrisk
