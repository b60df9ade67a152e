#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ssrisk {

// Stable error codes carried by scan reports and fatal exceptions.
namespace errc {
inline constexpr const char* access_denied = "access-denied";
inline constexpr const char* root_unreadable = "root-unreadable";
inline constexpr const char* no_roots_scanned = "no-roots-scanned";
inline constexpr const char* corrupt_archive = "corrupt-archive";
inline constexpr const char* archive_budget_exceeded = "archive-budget-exceeded";
inline constexpr const char* corrupt_workbook = "corrupt-workbook";
inline constexpr const char* unsupported_format = "unsupported-format";
inline constexpr const char* lex_error = "lex-error";
inline constexpr const char* parse_error = "parse-error";
inline constexpr const char* catalog_write_failed = "catalog-write-failed";
inline constexpr const char* catalog_corrupt = "catalog-corrupt";
inline constexpr const char* catalog_empty = "catalog-empty";
inline constexpr const char* config_invalid = "config-invalid";
inline constexpr const char* matrix_not_monotone = "matrix-not-monotone";
inline constexpr const char* report_write_failed = "report-write-failed";
}  // namespace errc

// One recorded, non-fatal scan problem. Scans collect these and keep going.
struct ScanError {
    std::string code;
    std::string path;
    std::vector<std::string> container_chain;
    std::string detail;

    bool operator==(const ScanError&) const = default;
};

// Fatal failure: invalid config, unreadable catalog, unwritable output.
// `field` is a dotted path into the offending config/catalog location when known.
class Error : public std::runtime_error {
public:
    Error(std::string code, std::string message, std::string field = {})
        : std::runtime_error(field.empty() ? code + ": " + message
                                           : code + ": " + field + ": " + message),
          code_(std::move(code)),
          field_(std::move(field)) {}

    const std::string& code() const { return code_; }
    const std::string& field() const { return field_; }

private:
    std::string code_;
    std::string field_;
};

}  // namespace ssrisk
