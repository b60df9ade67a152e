#include "ssrisk/csv.hpp"

namespace ssrisk::csv {

std::string escape_field(std::string_view field) {
    bool needs_quote = field.find_first_of(",\"\r\n") != std::string_view::npos;
    if (!needs_quote) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void Writer::row(const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) out_ += ',';
        out_ += escape_field(fields[i]);
    }
    out_ += "\r\n";
}

void Writer::row(std::initializer_list<std::string_view> fields) {
    size_t i = 0;
    for (auto f : fields) {
        if (i++) out_ += ',';
        out_ += escape_field(f);
    }
    out_ += "\r\n";
}

}  // namespace ssrisk::csv
