#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace ssrisk::csv {

// RFC-4180-style field quoting: quote when the field holds a comma, quote,
// CR or LF; embedded quotes doubled.
std::string escape_field(std::string_view field);

class Writer {
public:
    void row(const std::vector<std::string>& fields);
    void row(std::initializer_list<std::string_view> fields);
    const std::string& str() const { return out_; }

private:
    std::string out_;
};

}  // namespace ssrisk::csv
