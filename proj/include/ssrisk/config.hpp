#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>

#include "ssrisk/discovery.hpp"
#include "ssrisk/errors.hpp"
#include "ssrisk/rules.hpp"

namespace ssrisk {

// Everything one pipeline run needs. Omitted config sections fall back to
// the documented defaults; only `roots` is mandatory.
struct PipelineConfig {
    int schema_version = 1;
    std::vector<ScanRoot> roots;
    ScanFilter filter;
    ArchiveLimits archive;
    unsigned worker_threads = 0;  // 0 = hardware concurrency
    RiskConfig risk;
    std::filesystem::path catalog_dir;
    std::filesystem::path output_dir;
    std::set<std::string> report_formats{"csv", "structured"};

    bool operator==(const PipelineConfig&) const = default;
};

PipelineConfig default_pipeline_config();

// Parses and validates a JSON config document. Relative catalog/output/root
// paths resolve against base_dir. Throws `config-invalid` with a dotted field
// path, or `matrix-not-monotone`. Unknown keys are rejected so typos cannot
// silently fall back to defaults.
PipelineConfig parse_config(std::string_view text, const std::filesystem::path& base_dir);

// parse_config over a file's contents; relative paths resolve against the
// config file's directory.
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace ssrisk
